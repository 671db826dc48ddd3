//! Analytic magnetization scenes.
//!
//! Every scene provides closed-form n, m, tau and u together with first and
//! second spatial derivatives, so quadrature grids carry exact data and the
//! derivative machinery can be checked against finite differences.
//!
//! The spin kinetic density is taken parallel to the magnetization,
//! u = lambda * m, with tau large enough that tau >= |u| everywhere.

use crate::linalg::{dot, norm, scale, Mat3, Vec3, ZERO3, ZERO33};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown scene '{0}'; known scenes: {SCENE_NAMES:?}")]
    UnknownScene(String),
    #[error("scene '{scene}' is missing required parameter '{param}'")]
    MissingParameter {
        scene: &'static str,
        param: &'static str,
    },
    #[error("scene '{scene}' got unknown parameter '{param}'")]
    UnknownParameter { scene: &'static str, param: String },
    #[error("parameter '{param}': cannot parse '{value}' as {expected}")]
    BadValue {
        param: String,
        value: String,
        expected: &'static str,
    },
    #[error("scene '{scene}': {reason}")]
    Invalid { scene: &'static str, reason: String },
}

pub const SCENE_NAMES: [&str; 6] = [
    "uniform_collinear",
    "two_region",
    "quadratic_mx",
    "spin_spiral",
    "gaussian_blob",
    "closed_shell",
];

/// All analytic channel values at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneEval {
    pub n: f64,
    pub grad_n: Vec3,
    pub hess_n: Mat3,
    pub tau: f64,
    pub grad_tau: Vec3,
    pub m: Vec3,
    /// `grad_m[alpha][beta]` = d m_beta / d r_alpha
    pub grad_m: Mat3,
    /// `hess_m[beta][alpha][gamma]` = d^2 m_beta / d r_alpha d r_gamma
    pub hess_m: [Mat3; 3],
    pub u: Vec3,
    pub grad_u: Mat3,
}

impl SceneEval {
    fn zero() -> Self {
        Self {
            n: 0.0,
            grad_n: ZERO3,
            hess_n: ZERO33,
            tau: 0.0,
            grad_tau: ZERO3,
            m: ZERO3,
            grad_m: ZERO33,
            hess_m: [ZERO33; 3],
            u: ZERO3,
            grad_u: ZERO33,
        }
    }

    /// Fill u = lambda * m and its gradient from the m entries.
    fn with_parallel_u(mut self, lambda: f64) -> Self {
        self.u = scale(self.m, lambda);
        for alpha in 0..3 {
            self.grad_u[alpha] = scale(self.grad_m[alpha], lambda);
        }
        self
    }
}

/// Constant density with a constant magnetization vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCollinear {
    pub n0: f64,
    pub m0: Vec3,
    pub tau0: f64,
    pub lambda: f64,
}

impl Default for UniformCollinear {
    fn default() -> Self {
        Self {
            n0: 1.0,
            m0: [0.0, 0.0, 0.5],
            tau0: 0.6,
            lambda: 0.3,
        }
    }
}

/// Two Gaussian bumps centered at (-sep/2, 0, 0) and (+sep/2, 0, 0) with
/// independently oriented magnetization; the natural playground for the
/// non-local pair functionals and for skew-direction torque fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRegion {
    pub sep: f64,
    pub width: f64,
    pub a1: f64,
    pub a2: f64,
    pub dir1: Vec3,
    pub dir2: Vec3,
    pub n_bg: f64,
    pub tau_scale: f64,
    pub lambda: f64,
}

impl Default for TwoRegion {
    fn default() -> Self {
        Self {
            sep: 3.0,
            width: 0.9,
            a1: 0.8,
            a2: 0.8,
            dir1: [0.0, 0.0, 1.0],
            dir2: [0.0, 0.0, 1.0],
            n_bg: 0.1,
            tau_scale: 1.0,
            lambda: 0.3,
        }
    }
}

/// m = (x^2, 0, 1) over a constant density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMx {
    pub n0: f64,
    pub tau0: f64,
    pub lambda: f64,
}

impl Default for QuadraticMx {
    fn default() -> Self {
        Self {
            n0: 3.0,
            tau0: 2.0,
            lambda: 0.3,
        }
    }
}

/// m = m0 (cos qz, sin qz, 0): constant magnitude, winding direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSpiral {
    pub q: f64,
    pub m0: f64,
    pub n0: f64,
    pub tau0: f64,
    pub lambda: f64,
}

impl Default for SpinSpiral {
    fn default() -> Self {
        Self {
            q: 1.0,
            m0: 1.0,
            n0: 2.0,
            tau0: 1.5,
            lambda: 0.3,
        }
    }
}

/// A single decaying Gaussian density with magnetization along a fixed axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBlob {
    pub n_bg: f64,
    pub amp_n: f64,
    pub amp_m: f64,
    pub width: f64,
    pub dir: Vec3,
    pub tau_scale: f64,
    pub lambda: f64,
}

impl Default for GaussianBlob {
    fn default() -> Self {
        Self {
            n_bg: 0.2,
            amp_n: 1.0,
            amp_m: 0.6,
            width: 1.2,
            dir: [0.0, 0.0, 1.0],
            tau_scale: 1.0,
            lambda: 0.3,
        }
    }
}

/// Spin-unpolarized density: m = 0 and u = 0 everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedShell {
    pub n0: f64,
    pub amp: f64,
    pub width: f64,
    pub tau_scale: f64,
}

impl Default for ClosedShell {
    fn default() -> Self {
        Self {
            n0: 1.0,
            amp: 0.5,
            width: 1.5,
            tau_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scene {
    UniformCollinear(UniformCollinear),
    TwoRegion(TwoRegion),
    QuadraticMx(QuadraticMx),
    SpinSpiral(SpinSpiral),
    GaussianBlob(GaussianBlob),
    ClosedShell(ClosedShell),
}

/// g = amp exp(-|r - c|^2 / w^2) with gradient and Hessian.
fn gaussian(amp: f64, center: Vec3, width: f64, r: Vec3) -> (f64, Vec3, Mat3) {
    let d = [r[0] - center[0], r[1] - center[1], r[2] - center[2]];
    let w2 = width * width;
    let g = amp * (-dot(d, d) / w2).exp();
    let grad = scale(d, -2.0 * g / w2);
    let mut hess = ZERO33;
    for alpha in 0..3 {
        for gamma in 0..3 {
            let eye = if alpha == gamma { 1.0 } else { 0.0 };
            hess[alpha][gamma] = g * (4.0 * d[alpha] * d[gamma] / (w2 * w2) - 2.0 * eye / w2);
        }
    }
    (g, grad, hess)
}

impl Scene {
    pub fn id(&self) -> &'static str {
        match self {
            Scene::UniformCollinear(_) => "uniform_collinear",
            Scene::TwoRegion(_) => "two_region",
            Scene::QuadraticMx(_) => "quadratic_mx",
            Scene::SpinSpiral(_) => "spin_spiral",
            Scene::GaussianBlob(_) => "gaussian_blob",
            Scene::ClosedShell(_) => "closed_shell",
        }
    }

    pub(crate) fn is_two_region(&self) -> bool {
        matches!(self, Scene::TwoRegion(_))
    }

    /// Analytic channel values and derivatives at a position.
    pub fn eval(&self, r: Vec3) -> SceneEval {
        match self {
            Scene::UniformCollinear(s) => {
                let mut e = SceneEval::zero();
                e.n = s.n0;
                e.tau = s.tau0;
                e.m = s.m0;
                e.with_parallel_u(s.lambda)
            }
            Scene::TwoRegion(s) => {
                let c1 = [-0.5 * s.sep, 0.0, 0.0];
                let c2 = [0.5 * s.sep, 0.0, 0.0];
                let (g1, dg1, hg1) = gaussian(s.a1, c1, s.width, r);
                let (g2, dg2, hg2) = gaussian(s.a2, c2, s.width, r);
                let mut e = SceneEval::zero();
                e.n = s.n_bg + g1 + g2;
                for alpha in 0..3 {
                    e.grad_n[alpha] = dg1[alpha] + dg2[alpha];
                    for gamma in 0..3 {
                        e.hess_n[alpha][gamma] = hg1[alpha][gamma] + hg2[alpha][gamma];
                    }
                }
                for beta in 0..3 {
                    e.m[beta] = s.dir1[beta] * g1 + s.dir2[beta] * g2;
                    for alpha in 0..3 {
                        e.grad_m[alpha][beta] =
                            s.dir1[beta] * dg1[alpha] + s.dir2[beta] * dg2[alpha];
                        for gamma in 0..3 {
                            e.hess_m[beta][alpha][gamma] =
                                s.dir1[beta] * hg1[alpha][gamma] + s.dir2[beta] * hg2[alpha][gamma];
                        }
                    }
                }
                e.tau = s.tau_scale * e.n;
                e.grad_tau = scale(e.grad_n, s.tau_scale);
                e.with_parallel_u(s.lambda)
            }
            Scene::QuadraticMx(s) => {
                let mut e = SceneEval::zero();
                e.n = s.n0;
                e.tau = s.tau0;
                e.m = [r[0] * r[0], 0.0, 1.0];
                e.grad_m[0][0] = 2.0 * r[0];
                e.hess_m[0][0][0] = 2.0;
                e.with_parallel_u(s.lambda)
            }
            Scene::SpinSpiral(s) => {
                let (sin, cos) = (s.q * r[2]).sin_cos();
                let mut e = SceneEval::zero();
                e.n = s.n0;
                e.tau = s.tau0;
                e.m = [s.m0 * cos, s.m0 * sin, 0.0];
                e.grad_m[2][0] = -s.m0 * s.q * sin;
                e.grad_m[2][1] = s.m0 * s.q * cos;
                e.hess_m[0][2][2] = -s.m0 * s.q * s.q * cos;
                e.hess_m[1][2][2] = -s.m0 * s.q * s.q * sin;
                e.with_parallel_u(s.lambda)
            }
            Scene::GaussianBlob(s) => {
                let (gn, dgn, hgn) = gaussian(s.amp_n, ZERO3, s.width, r);
                let scale_m = s.amp_m / s.amp_n;
                let mut e = SceneEval::zero();
                e.n = s.n_bg + gn;
                e.grad_n = dgn;
                e.hess_n = hgn;
                for beta in 0..3 {
                    e.m[beta] = s.dir[beta] * scale_m * gn;
                    for alpha in 0..3 {
                        e.grad_m[alpha][beta] = s.dir[beta] * scale_m * dgn[alpha];
                        for gamma in 0..3 {
                            e.hess_m[beta][alpha][gamma] =
                                s.dir[beta] * scale_m * hgn[alpha][gamma];
                        }
                    }
                }
                e.tau = s.tau_scale * e.n;
                e.grad_tau = scale(e.grad_n, s.tau_scale);
                e.with_parallel_u(s.lambda)
            }
            Scene::ClosedShell(s) => {
                let (g, dg, hg) = gaussian(s.amp, ZERO3, s.width, r);
                let mut e = SceneEval::zero();
                e.n = s.n0 + g;
                e.grad_n = dg;
                e.hess_n = hg;
                e.tau = s.tau_scale * e.n;
                e.grad_tau = scale(e.grad_n, s.tau_scale);
                e
            }
        }
    }
}

struct Params<'a> {
    scene: &'static str,
    map: &'a BTreeMap<String, String>,
    known: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(scene: &'static str, map: &'a BTreeMap<String, String>) -> Self {
        Self {
            scene,
            map,
            known: Vec::new(),
        }
    }

    fn scalar(&mut self, key: &'static str, default: f64) -> Result<f64, SceneError> {
        self.known.push(key);
        match self.map.get(key) {
            None => Ok(default),
            Some(raw) => raw.trim().parse().map_err(|_| SceneError::BadValue {
                param: key.to_string(),
                value: raw.clone(),
                expected: "a real number",
            }),
        }
    }

    fn required_scalar(&mut self, key: &'static str) -> Result<f64, SceneError> {
        self.known.push(key);
        let raw = self.map.get(key).ok_or(SceneError::MissingParameter {
            scene: self.scene,
            param: key,
        })?;
        raw.trim().parse().map_err(|_| SceneError::BadValue {
            param: key.to_string(),
            value: raw.clone(),
            expected: "a real number",
        })
    }

    fn required_vec3(&mut self, key: &'static str) -> Result<Vec3, SceneError> {
        self.known.push(key);
        let raw = self.map.get(key).ok_or(SceneError::MissingParameter {
            scene: self.scene,
            param: key,
        })?;
        parse_vec3(key, raw)
    }

    fn finish(self) -> Result<(), SceneError> {
        for key in self.map.keys() {
            if !self.known.contains(&key.as_str()) {
                return Err(SceneError::UnknownParameter {
                    scene: self.scene,
                    param: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn parse_vec3(key: &str, raw: &str) -> Result<Vec3, SceneError> {
    let bad = || SceneError::BadValue {
        param: key.to_string(),
        value: raw.to_string(),
        expected: "three comma-separated reals, e.g. 0,0,1",
    };
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = ZERO3;
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
    }
    Ok(v)
}

fn ensure(scene: &'static str, ok: bool, reason: &str) -> Result<(), SceneError> {
    if ok {
        Ok(())
    } else {
        Err(SceneError::Invalid {
            scene,
            reason: reason.to_string(),
        })
    }
}

/// Build a scene from its registry name and a flat string parameter map.
/// Core parameters (the ones without a sensible universal default) are
/// required; unknown names and unknown or malformed parameters are errors.
pub fn make_scene(name: &str, params: &BTreeMap<String, String>) -> Result<Scene, SceneError> {
    match name {
        "uniform_collinear" => {
            let d = UniformCollinear::default();
            let mut p = Params::new("uniform_collinear", params);
            let m0 = p.required_vec3("m0")?;
            let n0 = p.scalar("n0", d.n0.max(norm(m0)))?;
            let tau0 = p.scalar("tau0", d.tau0.max(norm(m0)))?;
            let lambda = p.scalar("lambda", d.lambda)?;
            p.finish()?;
            ensure("uniform_collinear", n0 >= norm(m0), "need n0 >= |m0|")?;
            Ok(Scene::UniformCollinear(UniformCollinear {
                n0,
                m0,
                tau0,
                lambda,
            }))
        }
        "two_region" => {
            let d = TwoRegion::default();
            let mut p = Params::new("two_region", params);
            let dir1 = p.required_vec3("dir1")?;
            let dir2 = p.required_vec3("dir2")?;
            let sep = p.scalar("sep", d.sep)?;
            let width = p.scalar("width", d.width)?;
            let a1 = p.scalar("a1", d.a1)?;
            let a2 = p.scalar("a2", d.a2)?;
            let n_bg = p.scalar("n_bg", d.n_bg)?;
            let tau_scale = p.scalar("tau_scale", d.tau_scale)?;
            let lambda = p.scalar("lambda", d.lambda)?;
            p.finish()?;
            ensure("two_region", norm(dir1) <= 1.0 + 1e-12, "need |dir1| <= 1")?;
            ensure("two_region", norm(dir2) <= 1.0 + 1e-12, "need |dir2| <= 1")?;
            ensure(
                "two_region",
                width > 0.0 && n_bg > 0.0,
                "need width > 0 and n_bg > 0",
            )?;
            Ok(Scene::TwoRegion(TwoRegion {
                sep,
                width,
                a1,
                a2,
                dir1,
                dir2,
                n_bg,
                tau_scale,
                lambda,
            }))
        }
        "quadratic_mx" => {
            let d = QuadraticMx::default();
            let mut p = Params::new("quadratic_mx", params);
            let n0 = p.scalar("n0", d.n0)?;
            let tau0 = p.scalar("tau0", d.tau0)?;
            let lambda = p.scalar("lambda", d.lambda)?;
            p.finish()?;
            Ok(Scene::QuadraticMx(QuadraticMx { n0, tau0, lambda }))
        }
        "spin_spiral" => {
            let d = SpinSpiral::default();
            let mut p = Params::new("spin_spiral", params);
            let q = p.required_scalar("q")?;
            let m0 = p.required_scalar("m0")?;
            let n0 = p.scalar("n0", d.n0.max(m0.abs()))?;
            let tau0 = p.scalar("tau0", d.tau0.max(m0.abs()))?;
            let lambda = p.scalar("lambda", d.lambda)?;
            p.finish()?;
            ensure("spin_spiral", n0 >= m0.abs(), "need n0 >= m0")?;
            Ok(Scene::SpinSpiral(SpinSpiral {
                q,
                m0,
                n0,
                tau0,
                lambda,
            }))
        }
        "gaussian_blob" => {
            let d = GaussianBlob::default();
            let mut p = Params::new("gaussian_blob", params);
            let dir = p.required_vec3("dir")?;
            let n_bg = p.scalar("n_bg", d.n_bg)?;
            let amp_n = p.scalar("amp_n", d.amp_n)?;
            let amp_m = p.scalar("amp_m", d.amp_m)?;
            let width = p.scalar("width", d.width)?;
            let tau_scale = p.scalar("tau_scale", d.tau_scale)?;
            let lambda = p.scalar("lambda", d.lambda)?;
            p.finish()?;
            ensure("gaussian_blob", norm(dir) <= 1.0 + 1e-12, "need |dir| <= 1")?;
            ensure(
                "gaussian_blob",
                amp_m.abs() <= amp_n && n_bg > 0.0 && width > 0.0,
                "need |amp_m| <= amp_n, n_bg > 0, width > 0",
            )?;
            Ok(Scene::GaussianBlob(GaussianBlob {
                n_bg,
                amp_n,
                amp_m,
                width,
                dir,
                tau_scale,
                lambda,
            }))
        }
        "closed_shell" => {
            let d = ClosedShell::default();
            let mut p = Params::new("closed_shell", params);
            let n0 = p.scalar("n0", d.n0)?;
            let amp = p.scalar("amp", d.amp)?;
            let width = p.scalar("width", d.width)?;
            let tau_scale = p.scalar("tau_scale", d.tau_scale)?;
            p.finish()?;
            Ok(Scene::ClosedShell(ClosedShell {
                n0,
                amp,
                width,
                tau_scale,
            }))
        }
        other => Err(SceneError::UnknownScene(other.to_string())),
    }
}
