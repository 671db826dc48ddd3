//! Angular grids for the spherical average over spin projection directions.
//!
//! Three schemes are provided: Lebedev–Laikov rules (octahedrally symmetric,
//! polynomially exact), tensor-product Gauss–Legendre × uniform azimuth, and
//! the Fibonacci lattice (equal weights, no exactness guarantee). Weights are
//! normalized so that summing `w_i f(e_i)` approximates the *average* of `f`
//! over the unit sphere, not the surface integral.

mod lebedev_data;

use crate::gauss::gauss_legendre;
use crate::linalg::Vec3;
use thiserror::Error;

/// Golden ratio conjugate (sqrt(5) - 1) / 2, the azimuthal step of the
/// Fibonacci lattice in turns.
const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error)]
pub enum AngularError {
    #[error("unsupported Lebedev order {0}; supported orders: {SUPPORTED_LEBEDEV_ORDERS:?}")]
    UnsupportedLebedevOrder(u32),
    #[error("Gauss-Legendre grid needs positive counts, got n_theta={0}, n_phi={1}")]
    NonPositiveCounts(usize, usize),
    #[error("Fibonacci lattice needs at least one point, got {0}")]
    EmptyLattice(usize),
}

/// Exactness degrees of the embedded Lebedev rules.
pub const SUPPORTED_LEBEDEV_ORDERS: [u32; 13] = [3, 5, 7, 9, 11, 17, 23, 29, 35, 41, 47, 53, 59];

/// A unit projection direction, stored both as the Cartesian unit vector and
/// as the polar angles it corresponds to:
/// e = (sin θ cos φ, sin θ sin φ, cos θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub e: Vec3,
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    /// Build from polar angles.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            e: [st * cp, st * sp, ct],
            theta,
            phi,
        }
    }

    /// Build from a Cartesian unit vector; the angles are recovered from it.
    pub fn from_unit(e: Vec3) -> Self {
        Self {
            e,
            theta: e[2].clamp(-1.0, 1.0).acos(),
            phi: e[1].atan2(e[0]),
        }
    }

    /// The antipodal direction.
    pub fn opposite(&self) -> Self {
        Self::from_unit([-self.e[0], -self.e[1], -self.e[2]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Lebedev,
    GaussLegendre,
    Fibonacci,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Lebedev => write!(f, "lebedev"),
            Scheme::GaussLegendre => write!(f, "gauss_legendre"),
            Scheme::Fibonacci => write!(f, "fibonacci"),
        }
    }
}

/// A set of directions with normalized weights: the discrete spherical
/// average is `sum_i w_i f(e_i)` with `sum_i w_i = 1`.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    pub points: Vec<Direction>,
    pub weights: Vec<f64>,
    pub scheme: Scheme,
    /// Largest polynomial degree in (e_x, e_y, e_z) averaged without error,
    /// when the scheme guarantees one.
    pub exact_degree: Option<u32>,
}

impl AngularGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted average of `f` over the grid directions.
    pub fn average(&self, mut f: impl FnMut(&Direction) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * f(d))
            .sum()
    }

    fn normalize_weights(mut weights: Vec<f64>) -> Vec<f64> {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        weights
    }
}

/// Lebedev rule of the given exactness degree, from the embedded tables.
pub fn lebedev_grid(order: u32) -> Result<AngularGrid, AngularError> {
    let idx = SUPPORTED_LEBEDEV_ORDERS
        .iter()
        .position(|&o| o == order)
        .ok_or(AngularError::UnsupportedLebedevOrder(order))?;
    let (_, npoints) = lebedev_data::RULES[idx];
    let table = lebedev_data::table(npoints).expect("rule table present for supported order");

    let points = table
        .iter()
        .map(|row| Direction::from_unit([row[0], row[1], row[2]]))
        .collect();
    // the tabulated weights are already normalized; dividing by their sum
    // again would only add rounding noise
    let weights = table.iter().map(|row| row[3]).collect();
    Ok(AngularGrid {
        points,
        weights,
        scheme: Scheme::Lebedev,
        exact_degree: Some(order),
    })
}

/// Number of points of the Lebedev rule with the given exactness degree.
pub fn lebedev_point_count(order: u32) -> Result<usize, AngularError> {
    let idx = SUPPORTED_LEBEDEV_ORDERS
        .iter()
        .position(|&o| o == order)
        .ok_or(AngularError::UnsupportedLebedevOrder(order))?;
    Ok(lebedev_data::RULES[idx].1)
}

/// Lebedev order whose rule has exactly `npoints` points.
pub fn lebedev_order_for_points(npoints: usize) -> Option<u32> {
    lebedev_data::RULES
        .iter()
        .find(|&&(_, n)| n == npoints)
        .map(|&(order, _)| order)
}

/// Tensor grid: `n_theta` Gauss–Legendre nodes in t = cos θ on [-1, 1] times
/// `n_phi` equally spaced azimuths with uniform weights. Exact for spherical
/// polynomials of degree ≤ min(2 n_theta - 1, n_phi - 1).
pub fn gauss_legendre_grid(n_theta: usize, n_phi: usize) -> Result<AngularGrid, AngularError> {
    if n_theta < 1 || n_phi < 1 {
        return Err(AngularError::NonPositiveCounts(n_theta, n_phi));
    }
    let (ts, tws) = gauss_legendre(n_theta);
    let mut points = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (t, tw) in ts.iter().zip(&tws) {
        let theta = t.clamp(-1.0, 1.0).acos();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            points.push(Direction::from_angles(theta, phi));
            // GL weights sum to 2 over t; divide by 2 n_phi to normalize.
            weights.push(tw / (2.0 * n_phi as f64));
        }
    }
    let weights = AngularGrid::normalize_weights(weights);
    let degree = (2 * n_theta - 1).min(n_phi - 1) as u32;
    Ok(AngularGrid {
        points,
        weights,
        scheme: Scheme::GaussLegendre,
        exact_degree: Some(degree),
    })
}

/// Fibonacci lattice with n equally weighted points at
/// t_k = 1 - (2k + 1)/n, φ_k = 2π frac(k (√5-1)/2).
///
/// The half-step offset in t keeps points away from the poles. No polynomial
/// exactness degree is guaranteed; moments converge as n grows.
pub fn fibonacci_grid(n: usize) -> Result<AngularGrid, AngularError> {
    if n < 1 {
        return Err(AngularError::EmptyLattice(n));
    }
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let t = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
        let turns = (k as f64 * GOLDEN_CONJUGATE).fract();
        let phi = 2.0 * std::f64::consts::PI * turns;
        points.push(Direction::from_angles(t.clamp(-1.0, 1.0).acos(), phi));
    }
    Ok(AngularGrid {
        points,
        weights: vec![1.0 / n as f64; n],
        scheme: Scheme::Fibonacci,
        exact_degree: None,
    })
}

/// Discrete moment `sum_i w_i e_x^a e_y^b e_z^c` of the grid.
pub fn moment(grid: &AngularGrid, exponents: (u32, u32, u32)) -> f64 {
    let (a, b, c) = exponents;
    grid.average(|d| d.e[0].powi(a as i32) * d.e[1].powi(b as i32) * d.e[2].powi(c as i32))
}

/// Exact average of `e_x^a e_y^b e_z^c` over the unit sphere:
/// zero when any exponent is odd, else
/// (a-1)!! (b-1)!! (c-1)!! / (a+b+c+1)!!.
pub fn analytic_moment(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    fn double_factorial(k: i64) -> f64 {
        let mut acc = 1.0;
        let mut i = k;
        while i > 1 {
            acc *= i as f64;
            i -= 2;
        }
        acc
    }
    double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1) * double_factorial(c as i64 - 1)
        / double_factorial((a + b + c + 1) as i64)
}
