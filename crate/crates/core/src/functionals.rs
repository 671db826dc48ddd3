//! Registry of collinear integrands with analytic partial derivatives.
//!
//! A collinear integrand f^col sees up to twelve scalar variables: the
//! time-reversal-even set (n, grad n, lap n, tau) and the time-reversal-odd
//! set (s, grad s, lap s, u) obtained by projecting the vector fields onto a
//! direction. Every registry functional is even in the odd set. Derivatives
//! are hand-coded and certified against finite differences by the tests;
//! no automatic differentiation is involved.

use crate::fields::ProjectedPoint;
use crate::linalg::{dot, Vec3};
use thiserror::Error;

/// Slater exchange prefactor (3/4)(3/pi)^(1/3).
pub const C_X: f64 = 0.738_558_766_382_022_4;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error(
        "functional '{0}' is non-local; pointwise evaluation is undefined (use the pair form)"
    )]
    NonLocal(FunctionalId),
    #[error("functional '{0}' is local; the non-local pair form does not apply")]
    NotNonLocal(FunctionalId),
    #[error("derivative order {0} not supported (max 3)")]
    OrderTooHigh(u8),
    #[error("non-local evaluation needs at least one (s, w) sample")]
    EmptySamples,
    #[error("unknown functional '{name}'; known: {:?}", FunctionalId::ALL)]
    UnknownName { name: String },
}

/// One scalar variable slot of a collinear integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    N,
    GradN(usize),
    LapN,
    Tau,
    S,
    GradS(usize),
    LapS,
    U,
}

pub const NVARS: usize = 12;

impl Var {
    pub const ALL: [Var; NVARS] = [
        Var::N,
        Var::GradN(0),
        Var::GradN(1),
        Var::GradN(2),
        Var::LapN,
        Var::Tau,
        Var::S,
        Var::GradS(0),
        Var::GradS(1),
        Var::GradS(2),
        Var::LapS,
        Var::U,
    ];

    /// The six time-reversal-odd (chi) slots.
    pub const ODD: [Var; 6] = [
        Var::S,
        Var::GradS(0),
        Var::GradS(1),
        Var::GradS(2),
        Var::LapS,
        Var::U,
    ];

    /// The six time-reversal-even (kappa) slots.
    pub const EVEN: [Var; 6] = [
        Var::N,
        Var::GradN(0),
        Var::GradN(1),
        Var::GradN(2),
        Var::LapN,
        Var::Tau,
    ];

    pub fn index(self) -> usize {
        match self {
            Var::N => 0,
            Var::GradN(a) => 1 + a,
            Var::LapN => 4,
            Var::Tau => 5,
            Var::S => 6,
            Var::GradS(a) => 7 + a,
            Var::LapS => 10,
            Var::U => 11,
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, Var::S | Var::GradS(_) | Var::LapS | Var::U)
    }
}

/// Value of a variable slot at a projected point.
pub fn var_value(p: &ProjectedPoint, v: Var) -> f64 {
    match v {
        Var::N => p.n,
        Var::GradN(a) => p.grad_n[a],
        Var::LapN => p.lap_n,
        Var::Tau => p.tau,
        Var::S => p.m_w,
        Var::GradS(a) => p.grad_m_w[a],
        Var::LapS => p.lap_m_w,
        Var::U => p.u_w,
    }
}

/// Copy of `p` with variable `v` displaced by `dx`; the finite-difference
/// probe used by the derivative tests.
pub fn perturb(p: &ProjectedPoint, v: Var, dx: f64) -> ProjectedPoint {
    let mut q = *p;
    match v {
        Var::N => q.n += dx,
        Var::GradN(a) => q.grad_n[a] += dx,
        Var::LapN => q.lap_n += dx,
        Var::Tau => q.tau += dx,
        Var::S => q.m_w += dx,
        Var::GradS(a) => q.grad_m_w[a] += dx,
        Var::LapS => q.lap_m_w += dx,
        Var::U => q.u_w += dx,
    }
    q
}

/// Which variable slots a functional reads, split into even and odd lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSet {
    pub kappa: Vec<Var>,
    pub chi: Vec<Var>,
}

impl VariableSet {
    pub fn contains(&self, v: Var) -> bool {
        self.kappa.contains(&v) || self.chi.contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionalId {
    SlaterLsda,
    /// Spin-independent part of the Slater exchange, f = -2 C_X n^(4/3).
    DensityOnly,
    Toy1Gga,
    Toy2Gga,
    Toy3Mgga,
    Toy6MggaU,
    Toy4Nonlocal,
    Toy5Nonlocal,
}

impl FunctionalId {
    pub const ALL: [FunctionalId; 8] = [
        FunctionalId::SlaterLsda,
        FunctionalId::DensityOnly,
        FunctionalId::Toy1Gga,
        FunctionalId::Toy2Gga,
        FunctionalId::Toy3Mgga,
        FunctionalId::Toy6MggaU,
        FunctionalId::Toy4Nonlocal,
        FunctionalId::Toy5Nonlocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionalId::SlaterLsda => "slater_lsda",
            FunctionalId::DensityOnly => "density_only",
            FunctionalId::Toy1Gga => "toy1_gga",
            FunctionalId::Toy2Gga => "toy2_gga",
            FunctionalId::Toy3Mgga => "toy3_mgga",
            FunctionalId::Toy6MggaU => "toy6_mgga_u",
            FunctionalId::Toy4Nonlocal => "toy4_nonlocal",
            FunctionalId::Toy5Nonlocal => "toy5_nonlocal",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, FunctionalError> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.name() == name)
            .ok_or_else(|| FunctionalError::UnknownName {
                name: name.to_string(),
            })
    }

    /// Non-local functionals are point-pair forms and are rejected by the
    /// pointwise evaluator.
    pub fn is_nonlocal(self) -> bool {
        matches!(
            self,
            FunctionalId::Toy4Nonlocal | FunctionalId::Toy5Nonlocal
        )
    }

    /// Homogeneity degree in the odd variables, when the integrand is
    /// homogeneous (every registry toy is; Slater exchange is not).
    pub fn chi_degree(self) -> Option<u32> {
        match self {
            FunctionalId::SlaterLsda => None,
            FunctionalId::DensityOnly => Some(0),
            FunctionalId::Toy1Gga
            | FunctionalId::Toy2Gga
            | FunctionalId::Toy3Mgga
            | FunctionalId::Toy6MggaU
            | FunctionalId::Toy4Nonlocal => Some(2),
            FunctionalId::Toy5Nonlocal => Some(4),
        }
    }

    pub fn variables(self) -> VariableSet {
        let (kappa, chi): (Vec<Var>, Vec<Var>) = match self {
            FunctionalId::SlaterLsda => (vec![Var::N], vec![Var::S]),
            FunctionalId::DensityOnly => (vec![Var::N], vec![]),
            FunctionalId::Toy1Gga => (vec![], vec![Var::GradS(0), Var::GradS(1), Var::GradS(2)]),
            FunctionalId::Toy2Gga => (
                vec![Var::GradN(0), Var::GradN(1), Var::GradN(2)],
                vec![Var::S, Var::GradS(0), Var::GradS(1), Var::GradS(2)],
            ),
            FunctionalId::Toy3Mgga => (vec![], vec![Var::S, Var::LapS]),
            FunctionalId::Toy6MggaU => (vec![], vec![Var::S, Var::U]),
            FunctionalId::Toy4Nonlocal | FunctionalId::Toy5Nonlocal => (vec![], vec![Var::S]),
        };
        VariableSet { kappa, chi }
    }
}

impl std::fmt::Display for FunctionalId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// f^col and its partial derivatives up to the requested order.
///
/// d2 is stored symmetrically; d3 is a sparse list of unordered index
/// triples (the registry integrands have at most a handful of nonzero
/// third derivatives).
#[derive(Debug, Clone)]
pub struct CollinearEval {
    order: u8,
    pub f: f64,
    /// Set when the LSDA domain guard |s| <= n had to clamp the input.
    pub clamped: bool,
    d1: [f64; NVARS],
    d2: [[f64; NVARS]; NVARS],
    d3: Vec<(usize, usize, usize, f64)>,
}

impl CollinearEval {
    fn new(order: u8) -> Self {
        Self {
            order,
            f: 0.0,
            clamped: false,
            d1: [0.0; NVARS],
            d2: [[0.0; NVARS]; NVARS],
            d3: Vec::new(),
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn d1(&self, v: Var) -> f64 {
        debug_assert!(self.order >= 1);
        self.d1[v.index()]
    }

    pub fn d2(&self, a: Var, b: Var) -> f64 {
        debug_assert!(self.order >= 2);
        self.d2[a.index()][b.index()]
    }

    pub fn d3(&self, a: Var, b: Var, c: Var) -> f64 {
        debug_assert!(self.order >= 3);
        let mut key = [a.index(), b.index(), c.index()];
        key.sort_unstable();
        self.d3
            .iter()
            .find(|&&(i, j, k, _)| [i, j, k] == key)
            .map_or(0.0, |&(_, _, _, v)| v)
    }

    /// Whether any stored third derivative involves the given variable.
    pub fn d3_involves(&self, v: Var) -> bool {
        let idx = v.index();
        self.d3
            .iter()
            .any(|&(i, j, k, val)| val != 0.0 && (i == idx || j == idx || k == idx))
    }

    fn set_d1(&mut self, v: Var, value: f64) {
        self.d1[v.index()] = value;
    }

    fn set_d2(&mut self, a: Var, b: Var, value: f64) {
        self.d2[a.index()][b.index()] = value;
        self.d2[b.index()][a.index()] = value;
    }

    fn set_d3(&mut self, a: Var, b: Var, c: Var, value: f64) {
        let mut key = [a.index(), b.index(), c.index()];
        key.sort_unstable();
        if let Some(slot) = self
            .d3
            .iter_mut()
            .find(|&&mut (i, j, k, _)| [i, j, k] == key)
        {
            slot.3 = value;
        } else {
            self.d3.push((key[0], key[1], key[2], value));
        }
    }

    /// a * lhs + b * rhs: how composite integrands (exchange plus
    /// correlation pieces, scaled mixtures) combine. All stored partials
    /// combine linearly; the result carries the smaller order.
    pub fn linear_combination(a: f64, lhs: &Self, b: f64, rhs: &Self) -> Self {
        let mut out = Self::new(lhs.order.min(rhs.order));
        out.f = a * lhs.f + b * rhs.f;
        out.clamped = lhs.clamped || rhs.clamped;
        for i in 0..NVARS {
            out.d1[i] = a * lhs.d1[i] + b * rhs.d1[i];
            for j in 0..NVARS {
                out.d2[i][j] = a * lhs.d2[i][j] + b * rhs.d2[i][j];
            }
        }
        for &(i, j, k, v) in &lhs.d3 {
            out.d3.push((i, j, k, a * v));
        }
        for &(i, j, k, v) in &rhs.d3 {
            if let Some(slot) = out
                .d3
                .iter_mut()
                .find(|&&mut (x, y, z, _)| (x, y, z) == (i, j, k))
            {
                slot.3 += b * v;
            } else {
                out.d3.push((i, j, k, b * v));
            }
        }
        out
    }

    /// Same integrand with a constant added to the value; every derivative
    /// is unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.f += c;
        out
    }
}

/// Evaluate a local collinear integrand and its partials at a projected
/// point, analytically, up to `order` (0..=3).
pub fn eval_collinear(
    fid: FunctionalId,
    p: &ProjectedPoint,
    order: u8,
) -> Result<CollinearEval, FunctionalError> {
    if fid.is_nonlocal() {
        return Err(FunctionalError::NonLocal(fid));
    }
    if order > 3 {
        return Err(FunctionalError::OrderTooHigh(order));
    }
    let mut out = CollinearEval::new(order);
    match fid {
        FunctionalId::SlaterLsda => slater(p, order, &mut out),
        FunctionalId::DensityOnly => density_only(p, order, &mut out),
        FunctionalId::Toy1Gga => toy1(p, order, &mut out),
        FunctionalId::Toy2Gga => toy2(p, order, &mut out),
        FunctionalId::Toy3Mgga => toy3(p, order, &mut out),
        FunctionalId::Toy6MggaU => toy6(p, order, &mut out),
        FunctionalId::Toy4Nonlocal | FunctionalId::Toy5Nonlocal => unreachable!(),
    }
    Ok(out)
}

/// Slater LSDA exchange, f = -C_X [(n+s)^(4/3) + (n-s)^(4/3)].
///
/// Physical inputs satisfy |s| <= |m| <= n; if unphysical data pushes |s|
/// past n the spin density is clamped to +-n and the result is flagged.
fn slater(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    let n = p.n;
    let mut s = p.m_w;
    if s.abs() > n {
        s = s.clamp(-n, n);
        out.clamped = true;
    }
    let a = n + s;
    let b = n - s;
    let p13 = 1.0 / 3.0;
    out.f = -C_X * (a.powf(4.0 * p13) + b.powf(4.0 * p13));
    if order >= 1 {
        let fa = a.powf(p13);
        let fb = b.powf(p13);
        let c1 = 4.0 * p13;
        out.set_d1(Var::N, -C_X * c1 * (fa + fb));
        out.set_d1(Var::S, -C_X * c1 * (fa - fb));
    }
    if order >= 2 {
        let fa = a.powf(-2.0 * p13);
        let fb = b.powf(-2.0 * p13);
        let c2 = 4.0 / 9.0;
        out.set_d2(Var::N, Var::N, -C_X * c2 * (fa + fb));
        out.set_d2(Var::N, Var::S, -C_X * c2 * (fa - fb));
        out.set_d2(Var::S, Var::S, -C_X * c2 * (fa + fb));
    }
    if order >= 3 {
        let fa = a.powf(-5.0 * p13);
        let fb = b.powf(-5.0 * p13);
        let c3 = -8.0 / 27.0;
        // each s-derivative flips the sign of the (n-s) branch
        out.set_d3(Var::N, Var::N, Var::N, -C_X * c3 * (fa + fb));
        out.set_d3(Var::N, Var::N, Var::S, -C_X * c3 * (fa - fb));
        out.set_d3(Var::N, Var::S, Var::S, -C_X * c3 * (fa + fb));
        out.set_d3(Var::S, Var::S, Var::S, -C_X * c3 * (fa - fb));
    }
}

/// f = -2 C_X n^(4/3): the s = 0 restriction of the Slater exchange.
fn density_only(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    let n = p.n;
    let p13 = 1.0 / 3.0;
    out.f = -2.0 * C_X * n.powf(4.0 * p13);
    if order >= 1 {
        out.set_d1(Var::N, -2.0 * C_X * (4.0 * p13) * n.powf(p13));
    }
    if order >= 2 {
        out.set_d2(
            Var::N,
            Var::N,
            -2.0 * C_X * (4.0 / 9.0) * n.powf(-2.0 * p13),
        );
    }
    if order >= 3 {
        out.set_d3(
            Var::N,
            Var::N,
            Var::N,
            2.0 * C_X * (8.0 / 27.0) * n.powf(-5.0 * p13),
        );
    }
}

/// f = grad s . grad s
fn toy1(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    let g = p.grad_m_w;
    out.f = dot(g, g);
    if order >= 1 {
        for a in 0..3 {
            out.set_d1(Var::GradS(a), 2.0 * g[a]);
        }
    }
    if order >= 2 {
        for a in 0..3 {
            out.set_d2(Var::GradS(a), Var::GradS(a), 2.0);
        }
    }
}

/// f = s (grad n . grad s)
fn toy2(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    let s = p.m_w;
    let gn = p.grad_n;
    let gs = p.grad_m_w;
    out.f = s * dot(gn, gs);
    if order >= 1 {
        out.set_d1(Var::S, dot(gn, gs));
        for a in 0..3 {
            out.set_d1(Var::GradN(a), s * gs[a]);
            out.set_d1(Var::GradS(a), s * gn[a]);
        }
    }
    if order >= 2 {
        for a in 0..3 {
            out.set_d2(Var::S, Var::GradN(a), gs[a]);
            out.set_d2(Var::S, Var::GradS(a), gn[a]);
            out.set_d2(Var::GradN(a), Var::GradS(a), s);
        }
    }
    if order >= 3 {
        for a in 0..3 {
            out.set_d3(Var::S, Var::GradN(a), Var::GradS(a), 1.0);
        }
    }
}

/// f = s lap s
fn toy3(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    out.f = p.m_w * p.lap_m_w;
    if order >= 1 {
        out.set_d1(Var::S, p.lap_m_w);
        out.set_d1(Var::LapS, p.m_w);
    }
    if order >= 2 {
        out.set_d2(Var::S, Var::LapS, 1.0);
    }
}

/// f = s u: couples the spin density to the spin kinetic density channel.
fn toy6(p: &ProjectedPoint, order: u8, out: &mut CollinearEval) {
    out.f = p.m_w * p.u_w;
    if order >= 1 {
        out.set_d1(Var::S, p.u_w);
        out.set_d1(Var::U, p.m_w);
    }
    if order >= 2 {
        out.set_d2(Var::S, Var::U, 1.0);
    }
}

/// Non-local collinear energy of weighted spin samples, the full double sum
/// over all pairs:
/// toy4  E = sum_ij s_i s_j w_i w_j = (sum_i s_i w_i)^2
/// toy5  E = sum_ij (s_i s_j)^2 w_i w_j = (sum_i s_i^2 w_i)^2
pub fn eval_nonlocal_collinear(
    fid: FunctionalId,
    samples: &[(f64, f64)],
) -> Result<f64, FunctionalError> {
    eval_nonlocal_collinear_pair(fid, samples, samples)
}

/// Non-local collinear energy with the two integration variables running
/// over different sample sets (domain_a x domain_b double integral).
pub fn eval_nonlocal_collinear_pair(
    fid: FunctionalId,
    domain_a: &[(f64, f64)],
    domain_b: &[(f64, f64)],
) -> Result<f64, FunctionalError> {
    if !fid.is_nonlocal() {
        return Err(FunctionalError::NotNonLocal(fid));
    }
    if domain_a.is_empty() || domain_b.is_empty() {
        return Err(FunctionalError::EmptySamples);
    }
    let energy = match fid {
        FunctionalId::Toy4Nonlocal => {
            let ma: f64 = domain_a.iter().map(|&(s, w)| s * w).sum();
            let mb: f64 = domain_b.iter().map(|&(s, w)| s * w).sum();
            ma * mb
        }
        FunctionalId::Toy5Nonlocal => {
            let qa: f64 = domain_a.iter().map(|&(s, w)| s * s * w).sum();
            let qb: f64 = domain_b.iter().map(|&(s, w)| s * s * w).sum();
            qa * qb
        }
        _ => unreachable!(),
    };
    Ok(energy)
}

/// The effective-transform prefactor (chi degree + 1) of a non-local toy.
pub fn nonlocal_effective_factor(fid: FunctionalId) -> Result<f64, FunctionalError> {
    if !fid.is_nonlocal() {
        return Err(FunctionalError::NotNonLocal(fid));
    }
    Ok(fid.chi_degree().expect("toys are homogeneous") as f64 + 1.0)
}

/// A neutral projected point for building synthetic evaluation inputs.
pub fn zero_projected_point() -> ProjectedPoint {
    ProjectedPoint {
        n: 0.0,
        grad_n: [0.0; 3],
        lap_n: 0.0,
        tau: 0.0,
        m_w: 0.0,
        grad_m_w: [0.0; 3],
        lap_m_w: 0.0,
        u_w: 0.0,
    }
}

/// Random physically plausible projected point: n in [0.5, 2], |s| <= 0.9 n,
/// other channels of order one. Used by the derivative test suites.
pub fn random_projected_point(rng: &mut crate::rng::SplitMix64) -> ProjectedPoint {
    let n = rng.uniform(0.5, 2.0);
    let rand3 = |rng: &mut crate::rng::SplitMix64| -> Vec3 {
        [
            rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0),
        ]
    };
    ProjectedPoint {
        n,
        grad_n: rand3(rng),
        lap_n: rng.uniform(-1.0, 1.0),
        tau: rng.uniform(0.5, 2.0),
        m_w: rng.uniform(-0.9, 0.9) * n,
        grad_m_w: rand3(rng),
        lap_m_w: rng.uniform(-1.0, 1.0),
        u_w: rng.uniform(-0.5, 0.5),
    }
}
