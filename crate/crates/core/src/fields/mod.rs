//! Real-space fields: per-point density/magnetization records, spatial
//! quadrature grids over analytic scenes, projection of the vector channels
//! onto a direction, and global spin rotations.

mod scenes;

pub use scenes::{
    make_scene, ClosedShell, GaussianBlob, QuadraticMx, Scene, SceneError, SceneEval, SpinSpiral,
    TwoRegion, UniformCollinear, SCENE_NAMES,
};

use crate::angular::Direction;
use crate::gauss::gauss_legendre_on;
use crate::linalg::{
    det, dot, mat_vec, norm, orthogonality_defect, scale, trace, Mat3, Vec3, IDENTITY, ZERO33,
};
use crate::rng::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("degenerate box: extent along axis {0} is not positive")]
    DegenerateBox(usize),
    #[error("spatial grid needs at least one point per axis")]
    EmptyGrid,
    #[error("rotation matrix is not orthogonal (defect {0:.3e})")]
    NotOrthogonal(f64),
    #[error("rotation matrix must be proper (det = +1), got det = {0}")]
    ImproperRotation(f64),
}

/// Axis-aligned spatial extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxExtents {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl BoxExtents {
    pub fn new(lo: Vec3, hi: Vec3) -> Result<Self, FieldError> {
        for axis in 0..3 {
            let extent = hi[axis] - lo[axis];
            if extent.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(FieldError::DegenerateBox(axis));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Cube [-h, h]^3.
    pub fn centered_cube(half_width: f64) -> Result<Self, FieldError> {
        Self::new([-half_width; 3], [half_width; 3])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }
}

/// Second spatial derivatives of the scene fields, carried alongside each
/// point so the exchange-correlation field can be assembled analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDerivs {
    /// `hess_n[alpha][gamma]` = d^2 n / dr_alpha dr_gamma
    pub hess_n: Mat3,
    /// `hess_m[beta][alpha][gamma]` = d^2 m_beta / dr_alpha dr_gamma
    pub hess_m: [Mat3; 3],
    pub grad_tau: Vec3,
    /// `grad_u[alpha][beta]` = d u_beta / dr_alpha
    pub grad_u: Mat3,
}

/// One spatial quadrature point with every field the collinear machinery
/// consumes: density channels (n, grad n, lap n, tau) and magnetization
/// channels (m, grad m, lap m, u), plus the quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint {
    pub r: Vec3,
    pub n: f64,
    pub grad_n: Vec3,
    pub lap_n: f64,
    pub tau: f64,
    pub m: Vec3,
    /// `grad_m[alpha][beta]` = d m_beta / d r_alpha
    pub grad_m: Mat3,
    pub lap_m: Vec3,
    /// Spin kinetic energy density vector.
    pub u: Vec3,
    /// Spatial quadrature weight, > 0.
    pub w: f64,
    /// Present when the source scene supplied analytic second derivatives.
    pub second: Option<SecondDerivs>,
}

impl FieldPoint {
    pub fn is_finite(&self) -> bool {
        let mut ok = self.r.iter().all(|x| x.is_finite())
            && self.n.is_finite()
            && self.grad_n.iter().all(|x| x.is_finite())
            && self.lap_n.is_finite()
            && self.tau.is_finite()
            && self.m.iter().all(|x| x.is_finite())
            && self.lap_m.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.w.is_finite();
        for row in &self.grad_m {
            ok &= row.iter().all(|x| x.is_finite());
        }
        ok
    }
}

/// Tensor-product structure of a sampled grid; point index is
/// `(ix * n + iy) * n + iz` over the per-axis node lists.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorLayout {
    pub n_per_axis: usize,
    pub axes: [Vec<f64>; 3],
}

impl TensorLayout {
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n_per_axis + iy) * self.n_per_axis + iz
    }
}

/// A sampled field: points with weights summing to the box volume.
#[derive(Debug, Clone)]
pub struct GridField {
    pub points: Vec<FieldPoint>,
    pub bounds: BoxExtents,
    pub scene_id: String,
    /// Set when the grid is a tensor product (enables finite differences).
    pub layout: Option<TensorLayout>,
    /// Optional two-domain partition for the non-local pair functionals.
    pub regions: Option<Vec<u8>>,
}

impl GridField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.w).sum()
    }

    /// Integral of a per-point quantity over the spatial grid.
    pub fn integrate(&self, mut f: impl FnMut(&FieldPoint) -> f64) -> f64 {
        self.points.iter().map(|p| p.w * f(p)).sum()
    }
}

/// The scalar channels seen by a collinear functional once the vector fields
/// are projected onto a direction: the time-reversal-even entries are copied,
/// the odd ones are dot products with the direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub n: f64,
    pub grad_n: Vec3,
    pub lap_n: f64,
    pub tau: f64,
    /// m · e
    pub m_w: f64,
    /// (grad m) · e, component alpha = sum_beta `grad_m[alpha][beta]` e_beta
    pub grad_m_w: Vec3,
    /// (lap m) · e
    pub lap_m_w: f64,
    /// u · e
    pub u_w: f64,
}

/// Project the vector channels of a field point onto a direction.
pub fn project(p: &FieldPoint, d: &Direction) -> ProjectedPoint {
    ProjectedPoint {
        n: p.n,
        grad_n: p.grad_n,
        lap_n: p.lap_n,
        tau: p.tau,
        m_w: dot(p.m, d.e),
        grad_m_w: mat_vec(&p.grad_m, d.e),
        lap_m_w: dot(p.lap_m, d.e),
        u_w: dot(p.u, d.e),
    }
}

/// A proper rotation acting on the spin index of m, grad m, lap m and u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinRotation {
    mat: Mat3,
}

impl SpinRotation {
    /// Validate orthogonality (within 1e-13) and det = +1.
    pub fn try_new(mat: Mat3) -> Result<Self, FieldError> {
        let defect = orthogonality_defect(&mat);
        if defect > 1e-13 {
            return Err(FieldError::NotOrthogonal(defect));
        }
        let d = det(&mat);
        if (d - 1.0).abs() > 1e-12 {
            return Err(FieldError::ImproperRotation(d));
        }
        Ok(Self { mat })
    }

    pub fn identity() -> Self {
        Self { mat: IDENTITY }
    }

    /// Rodrigues rotation about a (not necessarily normalized) axis.
    pub fn about_axis(axis: Vec3, angle: f64) -> Self {
        let a = scale(axis, 1.0 / norm(axis));
        let (s, c) = angle.sin_cos();
        let mut mat = ZERO33;
        for i in 0..3 {
            for j in 0..3 {
                let eye = if i == j { 1.0 } else { 0.0 };
                mat[i][j] = c * eye + (1.0 - c) * a[i] * a[j];
            }
        }
        // antisymmetric part s * cross-product matrix
        mat[0][1] -= s * a[2];
        mat[0][2] += s * a[1];
        mat[1][0] += s * a[2];
        mat[1][2] -= s * a[0];
        mat[2][0] -= s * a[1];
        mat[2][1] += s * a[0];
        Self { mat }
    }

    /// Rotation matrix of a unit quaternion (w, x, y, z).
    pub fn from_unit_quaternion(q: [f64; 4]) -> Self {
        let [w, x, y, z] = q;
        Self {
            mat: [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - w * z),
                    2.0 * (x * z + w * y),
                ],
                [
                    2.0 * (x * y + w * z),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - w * x),
                ],
                [
                    2.0 * (x * z - w * y),
                    2.0 * (y * z + w * x),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ],
        }
    }

    /// Uniformly distributed random rotation (Shoemake's quaternion method).
    pub fn random(rng: &mut SplitMix64) -> Self {
        let u1 = rng.next_f64();
        let u2 = rng.next_f64();
        let u3 = rng.next_f64();
        let two_pi = 2.0 * std::f64::consts::PI;
        let q = [
            (1.0 - u1).sqrt() * (two_pi * u2).sin(),
            (1.0 - u1).sqrt() * (two_pi * u2).cos(),
            u1.sqrt() * (two_pi * u3).sin(),
            u1.sqrt() * (two_pi * u3).cos(),
        ];
        Self::from_unit_quaternion(q)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.mat
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        mat_vec(&self.mat, v)
    }

    /// Composition: `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            mat: crate::linalg::mat_mul(&self.mat, &other.mat),
        }
    }
}

/// The 24 proper rotations of the octahedral group: signed permutation
/// matrices with determinant +1. Lebedev grids map onto themselves under
/// every one of them.
pub fn octahedral_rotations() -> Vec<SpinRotation> {
    let mut out = Vec::with_capacity(24);
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for perm in perms {
        for signs in 0..8u8 {
            let mut mat = ZERO33;
            for (row, &col) in perm.iter().enumerate() {
                let s = if signs >> row & 1 == 1 { -1.0 } else { 1.0 };
                mat[row][col] = s;
            }
            if det(&mat) > 0.0 {
                out.push(SpinRotation { mat });
            }
        }
    }
    out
}

/// Rotate the spin structure of every point: m -> R m, each spatial row of
/// grad m -> R applied to the spin index, lap m -> R lap m, u -> R u. The
/// density channels and tau are untouched.
pub fn rotate_spin(field: &GridField, rot: &SpinRotation) -> GridField {
    let r = rot.matrix();
    let points = field
        .points
        .iter()
        .map(|p| {
            let mut grad_m = ZERO33;
            for alpha in 0..3 {
                grad_m[alpha] = mat_vec(r, p.grad_m[alpha]);
            }
            let second = p.second.as_ref().map(|s| {
                let mut hess_m = [ZERO33; 3];
                for bp in 0..3 {
                    for alpha in 0..3 {
                        for gamma in 0..3 {
                            for (b, h) in s.hess_m.iter().enumerate() {
                                hess_m[bp][alpha][gamma] += r[bp][b] * h[alpha][gamma];
                            }
                        }
                    }
                }
                let mut grad_u = ZERO33;
                for alpha in 0..3 {
                    grad_u[alpha] = mat_vec(r, s.grad_u[alpha]);
                }
                SecondDerivs {
                    hess_n: s.hess_n,
                    hess_m,
                    grad_tau: s.grad_tau,
                    grad_u,
                }
            });
            FieldPoint {
                m: mat_vec(r, p.m),
                grad_m,
                lap_m: mat_vec(r, p.lap_m),
                u: mat_vec(r, p.u),
                second,
                ..p.clone()
            }
        })
        .collect();
    GridField {
        points,
        bounds: field.bounds,
        scene_id: field.scene_id.clone(),
        layout: field.layout.clone(),
        regions: field.regions.clone(),
    }
}

/// Sample a scene on a tensor-product Gauss–Legendre grid over the box.
/// Weights are the products of 1-D quadrature weights, so they sum to the
/// box volume.
pub fn sample(
    scene: &Scene,
    bounds: BoxExtents,
    n_per_axis: usize,
) -> Result<GridField, FieldError> {
    if n_per_axis < 1 {
        return Err(FieldError::EmptyGrid);
    }
    let mut axes: [(Vec<f64>, Vec<f64>); 3] = Default::default();
    for a in 0..3 {
        axes[a] = gauss_legendre_on(bounds.lo[a], bounds.hi[a], n_per_axis);
    }
    let n = n_per_axis;
    let mut nodes = Vec::with_capacity(n * n * n);
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let r = [axes[0].0[ix], axes[1].0[iy], axes[2].0[iz]];
                let w = axes[0].1[ix] * axes[1].1[iy] * axes[2].1[iz];
                nodes.push((r, w));
            }
        }
    }
    // per-point evaluation parallelizes; output order stays the index order
    let points: Vec<FieldPoint> = nodes
        .par_iter()
        .map(|&(r, w)| scene.eval(r).into_field_point(r, w))
        .collect();
    let regions = scene
        .is_two_region()
        .then(|| nodes.iter().map(|&(r, _)| u8::from(r[0] > 0.0)).collect());
    Ok(GridField {
        points,
        bounds,
        scene_id: scene.id().to_string(),
        layout: Some(TensorLayout {
            n_per_axis: n,
            axes: [axes[0].0.clone(), axes[1].0.clone(), axes[2].0.clone()],
        }),
        regions,
    })
}

impl SceneEval {
    /// Attach position and quadrature weight; Laplacians are the traces of
    /// the supplied Hessians.
    pub fn into_field_point(self, r: Vec3, w: f64) -> FieldPoint {
        FieldPoint {
            r,
            n: self.n,
            grad_n: self.grad_n,
            lap_n: trace(&self.hess_n),
            tau: self.tau,
            m: self.m,
            grad_m: self.grad_m,
            lap_m: [
                trace(&self.hess_m[0]),
                trace(&self.hess_m[1]),
                trace(&self.hess_m[2]),
            ],
            u: self.u,
            w,
            second: Some(SecondDerivs {
                hess_n: self.hess_n,
                hess_m: self.hess_m,
                grad_tau: self.grad_tau,
                grad_u: self.grad_u,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO3;
    use std::collections::BTreeMap;

    fn sample_scene(name: &str) -> GridField {
        let scene = match name {
            "uniform_collinear" => Scene::UniformCollinear(Default::default()),
            "two_region" => Scene::TwoRegion(Default::default()),
            "quadratic_mx" => Scene::QuadraticMx(Default::default()),
            "spin_spiral" => Scene::SpinSpiral(Default::default()),
            "gaussian_blob" => Scene::GaussianBlob(Default::default()),
            "closed_shell" => Scene::ClosedShell(Default::default()),
            other => panic!("no default scene {other}"),
        };
        sample(&scene, BoxExtents::centered_cube(1.0).unwrap(), 4).unwrap()
    }

    #[test]
    fn weights_sum_to_box_volume() {
        let field = sample_scene("uniform_collinear");
        let vol = field.bounds.volume();
        assert!((field.total_weight() - vol).abs() < 1e-12 * vol);
        assert!(field.points.iter().all(|p| p.w > 0.0 && p.is_finite()));
    }

    #[test]
    fn closed_shell_has_no_magnetization() {
        let field = sample_scene("closed_shell");
        for p in &field.points {
            assert_eq!(p.m, ZERO3);
            assert_eq!(p.u, ZERO3);
            assert!(p.n > 0.0);
        }
    }

    #[test]
    fn projection_examples() {
        let field = sample_scene("uniform_collinear");
        let p = &field.points[0];
        // scene default is m = (0, 0, 0.5)
        let along_z = project(p, &Direction::from_unit([0.0, 0.0, 1.0]));
        assert!((along_z.m_w - p.m[2]).abs() < 1e-15);
        let along_x = project(p, &Direction::from_unit([1.0, 0.0, 0.0]));
        assert!(along_x.m_w.abs() < 1e-15);
    }

    #[test]
    fn projection_is_linear_in_direction() {
        let field = sample_scene("quadratic_mx");
        let p = &field.points[7];
        let e1 = [0.3, -0.4, 0.866_f64];
        let e2 = [-0.7, 0.1, 0.2_f64];
        let (a, b) = (1.25, -0.5);
        let combo = [
            a * e1[0] + b * e2[0],
            a * e1[1] + b * e2[1],
            a * e1[2] + b * e2[2],
        ];
        // bypass the unit-norm convention: linearity is exact for any vector
        let d1 = Direction {
            e: e1,
            theta: 0.0,
            phi: 0.0,
        };
        let d2 = Direction {
            e: e2,
            theta: 0.0,
            phi: 0.0,
        };
        let dc = Direction {
            e: combo,
            theta: 0.0,
            phi: 0.0,
        };
        let p1 = project(p, &d1);
        let p2 = project(p, &d2);
        let pc = project(p, &dc);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-15 * y.abs().max(1.0);
        assert!(close(pc.m_w, a * p1.m_w + b * p2.m_w));
        assert!(close(pc.lap_m_w, a * p1.lap_m_w + b * p2.lap_m_w));
        assert!(close(pc.u_w, a * p1.u_w + b * p2.u_w));
        for k in 0..3 {
            assert!(close(
                pc.grad_m_w[k],
                a * p1.grad_m_w[k] + b * p2.grad_m_w[k]
            ));
        }
        // projecting along -e negates exactly the four odd channels
        let neg = project(p, &d1.opposite());
        assert_eq!(neg.m_w, -p1.m_w);
        assert_eq!(neg.lap_m_w, -p1.lap_m_w);
        assert_eq!(neg.u_w, -p1.u_w);
        assert_eq!(neg.n, p1.n);
        assert_eq!(neg.tau, p1.tau);
    }

    #[test]
    fn quadratic_scene_projection_at_x_equals_one() {
        let mut params = BTreeMap::new();
        params.insert("n0".to_string(), "3.0".to_string());
        let scene = make_scene("quadratic_mx", &params).unwrap();
        let p = scene
            .eval([1.0, 0.0, 0.0])
            .into_field_point([1.0, 0.0, 0.0], 1.0);
        let d = Direction::from_unit([1.0, 0.0, 0.0]);
        let proj = project(&p, &d);
        assert!((proj.m_w - 1.0).abs() < 1e-15);
        assert!((proj.lap_m_w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rotate_identity_is_bitwise_noop() {
        let field = sample_scene("spin_spiral");
        let rotated = rotate_spin(&field, &SpinRotation::identity());
        for (a, b) in field.points.iter().zip(&rotated.points) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rotate_pi_about_x_flips_z_magnetization() {
        let field = sample_scene("uniform_collinear");
        let rot = SpinRotation::about_axis([1.0, 0.0, 0.0], std::f64::consts::PI);
        let rotated = rotate_spin(&field, &rot);
        for (a, b) in field.points.iter().zip(&rotated.points) {
            assert!((b.m[2] + a.m[2]).abs() < 1e-15);
            assert!(b.m[0].abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_preserves_magnetization_norm() {
        let field = sample_scene("two_region");
        let mut rng = SplitMix64::new(11);
        for _ in 0..5 {
            let rot = SpinRotation::random(&mut rng);
            let rotated = rotate_spin(&field, &rot);
            for (a, b) in field.points.iter().zip(&rotated.points) {
                assert!((norm(a.m) - norm(b.m)).abs() < 1e-13);
                assert!((norm(a.u) - norm(b.u)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rotation_composition_matches_sequential_application() {
        let field = sample_scene("two_region");
        let mut rng = SplitMix64::new(3);
        let r1 = SpinRotation::random(&mut rng);
        let r2 = SpinRotation::random(&mut rng);
        let once = rotate_spin(&field, &r1.compose(&r2));
        let twice = rotate_spin(&rotate_spin(&field, &r2), &r1);
        for (a, b) in once.points.iter().zip(&twice.points) {
            for k in 0..3 {
                assert!((a.m[k] - b.m[k]).abs() < 1e-13);
                assert!((a.lap_m[k] - b.lap_m[k]).abs() < 1e-13);
                assert!((a.u[k] - b.u[k]).abs() < 1e-13);
                for l in 0..3 {
                    assert!((a.grad_m[k][l] - b.grad_m[k][l]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn non_orthogonal_matrix_is_rejected() {
        let mut mat = IDENTITY;
        mat[0][1] = 0.1;
        assert!(SpinRotation::try_new(mat).is_err());
        // reflections are rejected as well
        let mut refl = IDENTITY;
        refl[2][2] = -1.0;
        assert!(SpinRotation::try_new(refl).is_err());
    }

    #[test]
    fn octahedral_group_has_24_proper_elements() {
        let rots = octahedral_rotations();
        assert_eq!(rots.len(), 24);
        for r in &rots {
            assert!(orthogonality_defect(r.matrix()) == 0.0);
            assert!((det(r.matrix()) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_rotations_are_valid() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..50 {
            let r = SpinRotation::random(&mut rng);
            assert!(orthogonality_defect(r.matrix()) < 1e-14);
            assert!((det(r.matrix()) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_box_is_rejected() {
        assert!(BoxExtents::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
        let scene = make_scene("closed_shell", &BTreeMap::new()).unwrap();
        let bounds = BoxExtents::centered_cube(1.0).unwrap();
        assert!(sample(&scene, bounds, 0).is_err());
    }

    #[test]
    fn quadratic_scene_derivatives_at_origin() {
        let field = {
            let scene = make_scene("quadratic_mx", &BTreeMap::new()).unwrap();
            sample(&scene, BoxExtents::centered_cube(1.0).unwrap(), 5).unwrap()
        };
        // the 5-node GL rule has a node at x = 0; find a point on that plane
        let p = field
            .points
            .iter()
            .find(|p| p.r[0].abs() < 1e-12)
            .expect("grid point at x = 0");
        for beta in 0..3 {
            assert!(p.grad_m[0][beta].abs() < 1e-15, "d m/dx at x=0");
        }
        assert_eq!(p.lap_m, [2.0, 0.0, 0.0]);
    }
}
