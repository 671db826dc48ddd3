//! Assembly of multi-collinear quantities on sampled fields: energies,
//! potential channels, the exchange-correlation magnetic field, local and
//! global torque, plus the independent reference routes (closed forms,
//! locally collinear energies, the 1-D t-integral).
//!
//! Reduction order is fixed everywhere: directions innermost (sequential),
//! points outermost (sequential final sum). Point-level work may run in
//! parallel because each point's value is computed independently and written
//! into its own slot before the ordered reduction; results are therefore
//! bitwise reproducible at any thread count.

use crate::angular::AngularGrid;
use crate::effective::{effective_first_derivs, effective_integrand, ChiValues, EffectiveError};
use crate::fields::{project, FieldPoint, GridField, ProjectedPoint, TensorLayout};
use crate::functionals::{
    eval_collinear, eval_nonlocal_collinear_pair, nonlocal_effective_factor, CollinearEval,
    FunctionalError, FunctionalId, Var,
};
use crate::gauss::gauss_legendre_on;
use crate::linalg::{cross, dot, scale, Mat3, Vec3, ZERO3, ZERO33};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Effective(#[from] EffectiveError),
    #[error("functional '{0}' is non-local; use mc_energy_nonlocal")]
    NonLocalNeedsPairRoute(FunctionalId),
    #[error("functional '{0}' is local; mc_energy_nonlocal applies to the non-local toys only")]
    LocalNeedsPointwiseRoute(FunctionalId),
    #[error("point sets differ in size: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("no closed-form reference for '{0}'")]
    NoClosedForm(FunctionalId),
    #[error(
        "locally collinear reference for '{0}' is refused: projecting before or after \
         differentiating gives different results for Laplacian-level variables"
    )]
    LcAmbiguous(FunctionalId),
    #[error("no locally collinear reference for '{0}'")]
    LcUndefined(FunctionalId),
    #[error("t-integral oracle applies to the LSDA-type functionals, not '{0}'")]
    NotLsda(FunctionalId),
    #[error(
        "field points carry no analytic second derivatives and finite differences are disabled"
    )]
    MissingSecondDerivs,
    #[error(
        "finite-difference divergence needs a tensor grid layout with at least 3 points per axis"
    )]
    MissingTensorLayout,
    #[error("analytic divergence unsupported: {0}")]
    UnsupportedAnalyticDivergence(&'static str),
}

/// Per-point channels and global scalars of one multi-collinear evaluation.
///
/// Channel contents (averages over directions Omega with weight w_Omega):
/// - `v_n`, `v_grad_n`, `v_lap_n`, `tau_channel`: plain averages of the
///   even-variable partials of f_eff;
/// - `m_channel[beta]`     = avg( d f_eff / d m_w       * e_beta );
/// - `grad_channel[a][b]`  = avg( d f_eff / d (grad m_w)_a * e_b );
/// - `lap_channel[beta]`   = avg( d f_eff / d lap m_w   * e_beta );
/// - `u_channel[beta]`     = avg( d f_eff / d u_w       * e_beta ).
#[derive(Debug, Clone)]
pub struct XCResult {
    pub energy: f64,
    pub energy_density: Vec<f64>,
    pub v_n: Vec<f64>,
    pub v_grad_n: Vec<Vec3>,
    pub v_lap_n: Vec<f64>,
    pub tau_channel: Vec<f64>,
    pub m_channel: Vec<Vec3>,
    pub grad_channel: Vec<Mat3>,
    pub lap_channel: Vec<Vec3>,
    pub u_channel: Vec<Vec3>,
    pub bxc: Vec<Vec3>,
    pub torque: Vec<Vec3>,
    pub global_torque: Vec3,
}

impl XCResult {
    fn empty() -> Self {
        Self {
            energy: 0.0,
            energy_density: Vec::new(),
            v_n: Vec::new(),
            v_grad_n: Vec::new(),
            v_lap_n: Vec::new(),
            tau_channel: Vec::new(),
            m_channel: Vec::new(),
            grad_channel: Vec::new(),
            lap_channel: Vec::new(),
            u_channel: Vec::new(),
            bxc: Vec::new(),
            torque: Vec::new(),
            global_torque: ZERO3,
        }
    }
}

/// How the divergence entering Bxc is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergenceMethod {
    /// Analytic when the field carries second derivatives, else grid
    /// finite differences.
    #[default]
    Auto,
    Analytic,
    FiniteDifference,
}

/// Per-point multi-collinear energy density, directions summed sequentially.
pub fn mc_energy_density(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<Vec<f64>, EngineError> {
    if fid.is_nonlocal() {
        return Err(EngineError::NonLocalNeedsPairRoute(fid));
    }
    field
        .points
        .par_iter()
        .map(|p| point_energy_density(p, fid, ang))
        .collect()
}

fn point_energy_density(
    p: &FieldPoint,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<f64, EngineError> {
    let mut acc = 0.0;
    for (d, &w) in ang.points.iter().zip(&ang.weights) {
        let proj = project(p, d);
        let c = eval_collinear(fid, &proj, 1)?;
        acc += w * effective_integrand(&c, &ChiValues::from_projected(&proj))?;
    }
    Ok(acc)
}

/// Multi-collinear energy of a local functional:
/// E = sum_r w_r sum_Omega w_Omega f_eff(projected point).
pub fn mc_energy(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<f64, EngineError> {
    let density = mc_energy_density(field, fid, ang)?;
    Ok(field
        .points
        .iter()
        .zip(&density)
        .map(|(p, e)| p.w * e)
        .sum())
}

/// The two integration domains of a non-local pair functional: the field's
/// region partition when present, else the whole grid twice.
fn pair_domains(field: &GridField) -> (Vec<usize>, Vec<usize>) {
    match &field.regions {
        Some(regions) => {
            let a = (0..field.len()).filter(|&i| regions[i] == 0).collect();
            let b = (0..field.len()).filter(|&i| regions[i] != 0).collect();
            (a, b)
        }
        None => {
            let all: Vec<usize> = (0..field.len()).collect();
            (all.clone(), all)
        }
    }
}

/// Multi-collinear energy of a non-local pair functional:
/// E = sum_Omega w_Omega k E_col(projected spins), k = chi degree + 1.
pub fn mc_energy_nonlocal(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<f64, EngineError> {
    if !fid.is_nonlocal() {
        return Err(EngineError::LocalNeedsPointwiseRoute(fid));
    }
    let factor = nonlocal_effective_factor(fid)?;
    let (dom_a, dom_b) = pair_domains(field);
    let mut samples_a = vec![(0.0, 0.0); dom_a.len()];
    let mut samples_b = vec![(0.0, 0.0); dom_b.len()];
    let mut energy = 0.0;
    for (d, &w) in ang.points.iter().zip(&ang.weights) {
        for (slot, &i) in samples_a.iter_mut().zip(&dom_a) {
            let p = &field.points[i];
            *slot = (dot(p.m, d.e), p.w);
        }
        for (slot, &i) in samples_b.iter_mut().zip(&dom_b) {
            let p = &field.points[i];
            *slot = (dot(p.m, d.e), p.w);
        }
        energy += w * factor * eval_nonlocal_collinear_pair(fid, &samples_a, &samples_b)?;
    }
    Ok(energy)
}

/// Plain collinear energy of the field projected along z: the reference for
/// collinear-limit checks. Handles both local and non-local functionals.
pub fn collinear_reference_energy(
    field: &GridField,
    fid: FunctionalId,
) -> Result<f64, EngineError> {
    let zhat = crate::angular::Direction::from_unit([0.0, 0.0, 1.0]);
    if fid.is_nonlocal() {
        let (dom_a, dom_b) = pair_domains(field);
        let collect = |dom: &[usize]| -> Vec<(f64, f64)> {
            dom.iter()
                .map(|&i| {
                    let p = &field.points[i];
                    (p.m[2], p.w)
                })
                .collect()
        };
        return Ok(eval_nonlocal_collinear_pair(
            fid,
            &collect(&dom_a),
            &collect(&dom_b),
        )?);
    }
    let mut energy = 0.0;
    for p in &field.points {
        let proj = project(p, &zhat);
        energy += p.w * eval_collinear(fid, &proj, 0)?.f;
    }
    Ok(energy)
}

struct PointChannels {
    energy_density: f64,
    v_n: f64,
    v_grad_n: Vec3,
    v_lap_n: f64,
    tau_channel: f64,
    m_channel: Vec3,
    grad_channel: Mat3,
    lap_channel: Vec3,
    u_channel: Vec3,
}

fn point_channels(
    p: &FieldPoint,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<PointChannels, EngineError> {
    let mut out = PointChannels {
        energy_density: 0.0,
        v_n: 0.0,
        v_grad_n: ZERO3,
        v_lap_n: 0.0,
        tau_channel: 0.0,
        m_channel: ZERO3,
        grad_channel: ZERO33,
        lap_channel: ZERO3,
        u_channel: ZERO3,
    };
    for (d, &w) in ang.points.iter().zip(&ang.weights) {
        let proj = project(p, d);
        let c = eval_collinear(fid, &proj, 2)?;
        let chi = ChiValues::from_projected(&proj);
        out.energy_density += w * effective_integrand(&c, &chi)?;
        let d1 = effective_first_derivs(&c, &chi)?;
        out.v_n += w * d1.get(Var::N);
        out.v_lap_n += w * d1.get(Var::LapN);
        out.tau_channel += w * d1.get(Var::Tau);
        for beta in 0..3 {
            let e_b = d.e[beta];
            out.v_grad_n[beta] += w * d1.get(Var::GradN(beta));
            out.m_channel[beta] += w * d1.get(Var::S) * e_b;
            out.lap_channel[beta] += w * d1.get(Var::LapS) * e_b;
            out.u_channel[beta] += w * d1.get(Var::U) * e_b;
            for alpha in 0..3 {
                out.grad_channel[alpha][beta] += w * d1.get(Var::GradS(alpha)) * e_b;
            }
        }
    }
    Ok(out)
}

/// Potential channels of a local functional: every even-variable partial of
/// f_eff averaged over directions, every odd-variable partial averaged with
/// an e_Omega factor restoring its vector character. Bxc and torque slots
/// are left empty.
pub fn mc_potential_channels(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<XCResult, EngineError> {
    if fid.is_nonlocal() {
        return Err(EngineError::NonLocalNeedsPairRoute(fid));
    }
    let per_point: Vec<PointChannels> = field
        .points
        .par_iter()
        .map(|p| point_channels(p, fid, ang))
        .collect::<Result<_, _>>()?;

    let mut out = XCResult::empty();
    for (p, ch) in field.points.iter().zip(&per_point) {
        out.energy += p.w * ch.energy_density;
        out.energy_density.push(ch.energy_density);
        out.v_n.push(ch.v_n);
        out.v_grad_n.push(ch.v_grad_n);
        out.v_lap_n.push(ch.v_lap_n);
        out.tau_channel.push(ch.tau_channel);
        out.m_channel.push(ch.m_channel);
        out.grad_channel.push(ch.grad_channel);
        out.lap_channel.push(ch.lap_channel);
        out.u_channel.push(ch.u_channel);
    }
    Ok(out)
}

/// d2 f_eff / (d a d b) for a single pair, matching
/// `effective::effective_second_derivs` entry by entry.
fn d2_eff_entry(c: &CollinearEval, chi: &ChiValues, a: Var, b: Var) -> f64 {
    let prefactor = match (a.is_odd(), b.is_odd()) {
        (false, false) => 1.0,
        (true, true) => 3.0,
        _ => 2.0,
    };
    let mut d = prefactor * c.d2(a, b);
    for j in Var::ODD {
        d += chi.get(j) * c.d3(a, b, j);
    }
    d
}

/// Spatial alpha-derivative of a projected variable, from the analytic
/// scene derivatives. None when the required data is not carried.
fn grad_var(p: &FieldPoint, v: Var, alpha: usize, e: Vec3) -> Option<f64> {
    let second = p.second.as_ref();
    match v {
        Var::N => Some(p.grad_n[alpha]),
        Var::GradN(gamma) => second.map(|s| s.hess_n[alpha][gamma]),
        Var::Tau => second.map(|s| s.grad_tau[alpha]),
        Var::S => Some(dot(p.grad_m[alpha], e)),
        Var::GradS(gamma) => second.map(|s| {
            (0..3)
                .map(|beta| s.hess_m[beta][alpha][gamma] * e[beta])
                .sum()
        }),
        Var::U => second.map(|s| dot(s.grad_u[alpha], e)),
        // third spatial derivatives of the fields would be needed
        Var::LapN | Var::LapS => None,
    }
}

/// Spatial Laplacian of a projected variable.
fn lap_var(p: &FieldPoint, v: Var, e: Vec3) -> Option<f64> {
    match v {
        Var::N => Some(p.lap_n),
        Var::S => Some(dot(p.lap_m, e)),
        _ => None,
    }
}

/// Analytic Bxc at one point:
/// B_beta = -avg(e_beta d f_eff/d m_w)
///          + avg(e_beta sum_alpha d_alpha [d f_eff / d (grad m_w)_alpha])
///          - avg(e_beta lap [d f_eff / d lap m_w]).
fn bxc_point_analytic(
    p: &FieldPoint,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<Vec3, EngineError> {
    if p.second.is_none() {
        return Err(EngineError::MissingSecondDerivs);
    }
    let has_lap_channel = fid.variables().contains(Var::LapS);
    let mut b = ZERO3;
    for (d, &w) in ang.points.iter().zip(&ang.weights) {
        let proj = project(p, d);
        let c = eval_collinear(fid, &proj, 3)?;
        let chi = ChiValues::from_projected(&proj);
        let d1 = effective_first_derivs(&c, &chi)?;

        // divergence of the gradient channel, chain rule over all variables
        let mut div_g = 0.0;
        for alpha in 0..3 {
            for v in Var::ALL {
                let coupling = d2_eff_entry(&c, &chi, Var::GradS(alpha), v);
                if coupling == 0.0 {
                    continue;
                }
                let dv =
                    grad_var(p, v, alpha, d.e)
                        .ok_or(EngineError::UnsupportedAnalyticDivergence(
                        "gradient channel couples to a variable without stored spatial derivatives",
                    ))?;
                div_g += coupling * dv;
            }
        }

        // Laplacian of the lap channel; valid while the lap-channel row of
        // d2_eff carries no field dependence of its own (no third-derivative
        // couplings involving lap m_w), which holds for the registry.
        let mut lap_h = 0.0;
        if has_lap_channel {
            if c.d3_involves(Var::LapS) {
                return Err(EngineError::UnsupportedAnalyticDivergence(
                    "lap channel has third-derivative couplings",
                ));
            }
            for v in Var::ALL {
                let coupling = d2_eff_entry(&c, &chi, Var::LapS, v);
                if coupling == 0.0 {
                    continue;
                }
                let lv = lap_var(p, v, d.e).ok_or(EngineError::UnsupportedAnalyticDivergence(
                    "lap channel couples to a variable without stored Laplacian",
                ))?;
                lap_h += coupling * lv;
            }
        }

        let scalar = -d1.get(Var::S) + div_g - lap_h;
        for beta in 0..3 {
            b[beta] += w * scalar * d.e[beta];
        }
    }
    Ok(b)
}

/// Three-point Lagrange differentiation weights at node x0 for nodes
/// (xa, xb, xc); `order` is 1 or 2.
fn lagrange3_weights(x0: f64, xs: [f64; 3], order: u8) -> [f64; 3] {
    let [xa, xb, xc] = xs;
    match order {
        1 => [
            (2.0 * x0 - xb - xc) / ((xa - xb) * (xa - xc)),
            (2.0 * x0 - xa - xc) / ((xb - xa) * (xb - xc)),
            (2.0 * x0 - xa - xb) / ((xc - xa) * (xc - xb)),
        ],
        2 => [
            2.0 / ((xa - xb) * (xa - xc)),
            2.0 / ((xb - xa) * (xb - xc)),
            2.0 / ((xc - xa) * (xc - xb)),
        ],
        _ => unreachable!(),
    }
}

/// Finite-difference axis derivative of a per-point scalar on the tensor
/// layout: central 3-point stencils inside, one-sided at the walls.
/// Second-order accurate for first derivatives on smooth data.
fn fd_axis_derivative(layout: &TensorLayout, values: &[f64], axis: usize, order: u8) -> Vec<f64> {
    let n = layout.n_per_axis;
    let xs = &layout.axes[axis];
    let mut out = vec![0.0; values.len()];
    let idx = |i: [usize; 3]| -> usize { layout.index(i[0], i[1], i[2]) };
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let here = [ix, iy, iz];
                let k = here[axis];
                let k0 = k.clamp(1, n - 2);
                let stencil = [k0 - 1, k0, k0 + 1];
                let w = lagrange3_weights(
                    xs[k],
                    [xs[stencil[0]], xs[stencil[1]], xs[stencil[2]]],
                    order,
                );
                let mut acc = 0.0;
                for (j, &kk) in stencil.iter().enumerate() {
                    let mut at = here;
                    at[axis] = kk;
                    acc += w[j] * values[idx(at)];
                }
                out[idx(here)] = acc;
            }
        }
    }
    out
}

fn bxc_finite_difference(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<Vec<Vec3>, EngineError> {
    let layout = field
        .layout
        .as_ref()
        .filter(|l| l.n_per_axis >= 3)
        .ok_or(EngineError::MissingTensorLayout)?;
    let channels = mc_potential_channels(field, fid, ang)?;
    let npts = field.len();
    let mut bxc = vec![ZERO3; npts];
    for beta in 0..3 {
        // - m channel
        for i in 0..npts {
            bxc[i][beta] = -channels.m_channel[i][beta];
        }
        // + divergence of the gradient channel
        for alpha in 0..3 {
            let component: Vec<f64> = channels
                .grad_channel
                .iter()
                .map(|g| g[alpha][beta])
                .collect();
            let div = fd_axis_derivative(layout, &component, alpha, 1);
            for i in 0..npts {
                bxc[i][beta] += div[i];
            }
        }
        // - Laplacian of the lap channel
        let lap_comp: Vec<f64> = channels.lap_channel.iter().map(|l| l[beta]).collect();
        if lap_comp.iter().any(|&x| x != 0.0) {
            for alpha in 0..3 {
                let dd = fd_axis_derivative(layout, &lap_comp, alpha, 2);
                for i in 0..npts {
                    bxc[i][beta] -= dd[i];
                }
            }
        }
    }
    Ok(bxc)
}

/// Exchange-correlation magnetic field B = -dE/dm at every point.
pub fn bxc_with_method(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
    method: DivergenceMethod,
) -> Result<Vec<Vec3>, EngineError> {
    if fid.is_nonlocal() {
        return Err(EngineError::NonLocalNeedsPairRoute(fid));
    }
    let analytic_possible = field.points.iter().all(|p| p.second.is_some());
    match method {
        DivergenceMethod::Analytic => {
            if !analytic_possible {
                return Err(EngineError::MissingSecondDerivs);
            }
            field
                .points
                .par_iter()
                .map(|p| bxc_point_analytic(p, fid, ang))
                .collect()
        }
        DivergenceMethod::FiniteDifference => bxc_finite_difference(field, fid, ang),
        DivergenceMethod::Auto => {
            if analytic_possible {
                bxc_with_method(field, fid, ang, DivergenceMethod::Analytic)
            } else {
                bxc_with_method(field, fid, ang, DivergenceMethod::FiniteDifference)
            }
        }
    }
}

/// Bxc with the default divergence handling (analytic when available).
pub fn bxc(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
) -> Result<Vec<Vec3>, EngineError> {
    bxc_with_method(field, fid, ang, DivergenceMethod::Auto)
}

/// Pointwise torque m x Bxc.
pub fn local_torque(field: &GridField, bxc: &[Vec3]) -> Result<Vec<Vec3>, EngineError> {
    if field.len() != bxc.len() {
        return Err(EngineError::SizeMismatch {
            left: field.len(),
            right: bxc.len(),
        });
    }
    Ok(field
        .points
        .iter()
        .zip(bxc)
        .map(|(p, b)| cross(p.m, *b))
        .collect())
}

/// Spatial integral of the torque field.
pub fn global_torque(field: &GridField, torque: &[Vec3]) -> Vec3 {
    assert_eq!(field.len(), torque.len(), "torque field size mismatch");
    let mut total = ZERO3;
    for (p, t) in field.points.iter().zip(torque) {
        total = crate::linalg::add(total, scale(*t, p.w));
    }
    total
}

/// Assemble everything at once: channels, Bxc, torque, global torque.
pub fn xc_full(
    field: &GridField,
    fid: FunctionalId,
    ang: &AngularGrid,
    method: DivergenceMethod,
) -> Result<XCResult, EngineError> {
    let mut out = mc_potential_channels(field, fid, ang)?;
    out.bxc = bxc_with_method(field, fid, ang, method)?;
    out.torque = local_torque(field, &out.bxc)?;
    out.global_torque = global_torque(field, &out.torque);
    Ok(out)
}

/// Analytic multi-collinear closed forms of the toy functionals:
/// toy1 sum grad_a m_b grad_a m_b; toy2 m . (grad n . grad m);
/// toy3 m . lap m; toy6 m . u; toy4 pair integral of m1 . m2;
/// toy5 pair integral of [2 (m1 . m2)^2 + m1^2 m2^2] / 3.
pub fn closed_form_mc(field: &GridField, fid: FunctionalId) -> Result<f64, EngineError> {
    match fid {
        FunctionalId::Toy1Gga => {
            Ok(field.integrate(|p| p.grad_m.iter().map(|row| dot(*row, *row)).sum()))
        }
        FunctionalId::Toy2Gga => Ok(field.integrate(|p| {
            (0..3)
                .map(|beta| {
                    let dn_dot_dmb: f64 = (0..3)
                        .map(|alpha| p.grad_n[alpha] * p.grad_m[alpha][beta])
                        .sum();
                    p.m[beta] * dn_dot_dmb
                })
                .sum()
        })),
        FunctionalId::Toy3Mgga => Ok(field.integrate(|p| dot(p.m, p.lap_m))),
        FunctionalId::Toy6MggaU => Ok(field.integrate(|p| dot(p.m, p.u))),
        FunctionalId::Toy4Nonlocal => {
            let (dom_a, dom_b) = pair_domains(field);
            let moment = |dom: &[usize]| -> Vec3 {
                let mut m = ZERO3;
                for &i in dom {
                    let p = &field.points[i];
                    m = crate::linalg::add(m, scale(p.m, p.w));
                }
                m
            };
            Ok(dot(moment(&dom_a), moment(&dom_b)))
        }
        FunctionalId::Toy5Nonlocal => {
            let (dom_a, dom_b) = pair_domains(field);
            let second_moment = |dom: &[usize]| -> Mat3 {
                let mut t = ZERO33;
                for &i in dom {
                    let p = &field.points[i];
                    for a in 0..3 {
                        for b in 0..3 {
                            t[a][b] += p.w * p.m[a] * p.m[b];
                        }
                    }
                }
                t
            };
            let ta = second_moment(&dom_a);
            let tb = second_moment(&dom_b);
            let tr_a = crate::linalg::trace(&ta);
            let tr_b = crate::linalg::trace(&tb);
            let mut contracted = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    contracted += ta[a][b] * tb[a][b];
                }
            }
            Ok((tr_a * tr_b + 2.0 * contracted) / 3.0)
        }
        other => Err(EngineError::NoClosedForm(other)),
    }
}

/// Locally collinear reference: f_col evaluated at (n, |m|), with
/// grad |m| = (grad m . m) / |m| and the division suppressed below
/// |m| = 1e-12 (that guarded division is the approach's known soft spot,
/// which the multi-collinear route avoids).
pub fn locally_collinear_energy(field: &GridField, fid: FunctionalId) -> Result<f64, EngineError> {
    const GUARD: f64 = 1e-12;
    match fid {
        FunctionalId::Toy3Mgga => Err(EngineError::LcAmbiguous(fid)),
        FunctionalId::Toy6MggaU => Err(EngineError::LcUndefined(fid)),
        FunctionalId::SlaterLsda
        | FunctionalId::DensityOnly
        | FunctionalId::Toy1Gga
        | FunctionalId::Toy2Gga => {
            let mut energy = 0.0;
            for p in &field.points {
                energy += p.w * eval_collinear(fid, &lc_projected(p, GUARD), 0)?.f;
            }
            Ok(energy)
        }
        FunctionalId::Toy4Nonlocal | FunctionalId::Toy5Nonlocal => {
            let (dom_a, dom_b) = pair_domains(field);
            let collect = |dom: &[usize]| -> Vec<(f64, f64)> {
                dom.iter()
                    .map(|&i| {
                        let p = &field.points[i];
                        (crate::linalg::norm(p.m), p.w)
                    })
                    .collect()
            };
            Ok(eval_nonlocal_collinear_pair(
                fid,
                &collect(&dom_a),
                &collect(&dom_b),
            )?)
        }
    }
}

fn lc_projected(p: &FieldPoint, guard: f64) -> ProjectedPoint {
    let mag = crate::linalg::norm(p.m);
    let grad_mag = if mag < guard {
        ZERO3
    } else {
        [
            dot(p.grad_m[0], p.m) / mag,
            dot(p.grad_m[1], p.m) / mag,
            dot(p.grad_m[2], p.m) / mag,
        ]
    };
    ProjectedPoint {
        n: p.n,
        grad_n: p.grad_n,
        lap_n: p.lap_n,
        tau: p.tau,
        m_w: mag,
        grad_m_w: grad_mag,
        lap_m_w: 0.0,
        u_w: 0.0,
    }
}

/// Independent 1-D oracle for the LSDA spherical average:
/// f_MC(n, m) = integral_0^1 f_eff(n, m t) dt, by Gauss–Legendre quadrature
/// on [0, 1]. Converges to f_col(n, m).
pub fn lsda_t_integral_oracle(
    fid: FunctionalId,
    n: f64,
    m: f64,
    n_t: usize,
) -> Result<f64, EngineError> {
    if !matches!(fid, FunctionalId::SlaterLsda | FunctionalId::DensityOnly) {
        return Err(EngineError::NotLsda(fid));
    }
    let (ts, ws) = gauss_legendre_on(0.0, 1.0, n_t.max(1));
    let mut acc = 0.0;
    for (t, w) in ts.iter().zip(&ws) {
        let mut p = crate::functionals::zero_projected_point();
        p.n = n;
        p.m_w = m * t;
        let c = eval_collinear(fid, &p, 1)?;
        acc += w * effective_integrand(&c, &ChiValues::new(p.m_w, ZERO3, 0.0, 0.0))?;
    }
    Ok(acc)
}
