//! The collinear -> effective transform and its derivative propagation.
//!
//! Averaging the plain collinear integrand over projection directions would
//! not reproduce the collinear limit; the integrand that does is
//!
//! ```text
//! f_eff(kappa, chi) = f_col(kappa, chi) + sum_j chi_j d f_col / d chi_j
//! ```
//!
//! with kappa the time-reversal-even variables and chi the odd ones. Its
//! derivatives follow by differentiating the definition once:
//!
//! ```text
//! d f_eff / d kappa_i = d f_col / d kappa_i + sum_j chi_j d2 f_col / d kappa_i d chi_j
//! d f_eff / d chi_i   = 2 d f_col / d chi_i + sum_j chi_j d2 f_col / d chi_i d chi_j
//! ```
//!
//! and twice (prefactors 1, 2, 3 on the kappa-kappa, kappa-chi and chi-chi
//! blocks plus the chi-contracted third derivatives). A useful corollary:
//! for f_col homogeneous of even degree k in chi, f_eff = (k + 1) f_col.

use crate::fields::ProjectedPoint;
use crate::functionals::{CollinearEval, Var, NVARS};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error(
        "effective transform needs collinear partials of order {needed}, only order {have} present"
    )]
    MissingPartials { needed: u8, have: u8 },
}

/// Values of the six odd variables at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiValues {
    values: [f64; 6],
}

impl ChiValues {
    pub fn zero() -> Self {
        Self { values: [0.0; 6] }
    }

    pub fn new(s: f64, grad_s: [f64; 3], lap_s: f64, u: f64) -> Self {
        Self {
            values: [s, grad_s[0], grad_s[1], grad_s[2], lap_s, u],
        }
    }

    pub fn from_projected(p: &ProjectedPoint) -> Self {
        Self::new(p.m_w, p.grad_m_w, p.lap_m_w, p.u_w)
    }

    /// Value of an odd variable; even variables have no chi value.
    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::S => self.values[0],
            Var::GradS(a) => self.values[1 + a],
            Var::LapS => self.values[4],
            Var::U => self.values[5],
            _ => 0.0,
        }
    }
}

/// Dense map from variable slots to values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarMap(pub [f64; NVARS]);

impl VarMap {
    pub fn get(&self, v: Var) -> f64 {
        self.0[v.index()]
    }
}

/// Dense symmetric map from variable pairs to values.
#[derive(Debug, Clone, PartialEq)]
pub struct VarPairMap(pub [[f64; NVARS]; NVARS]);

impl VarPairMap {
    pub fn get(&self, a: Var, b: Var) -> f64 {
        self.0[a.index()][b.index()]
    }
}

/// f^eff and its partials at one projected point.
#[derive(Debug, Clone)]
pub struct EffectiveEval {
    pub f: f64,
    pub d1: Option<VarMap>,
    pub d2: Option<VarPairMap>,
}

fn require(c: &CollinearEval, needed: u8) -> Result<(), EffectiveError> {
    if c.order() < needed {
        Err(EffectiveError::MissingPartials {
            needed,
            have: c.order(),
        })
    } else {
        Ok(())
    }
}

/// The effective integrand f^eff = f^col + sum_j chi_j df/dchi_j.
/// Needs order-1 collinear partials.
pub fn effective_integrand(c: &CollinearEval, chi: &ChiValues) -> Result<f64, EffectiveError> {
    require(c, 1)?;
    let mut f = c.f;
    for v in Var::ODD {
        f += chi.get(v) * c.d1(v);
    }
    Ok(f)
}

/// All first derivatives of f^eff. Needs order-2 collinear partials.
pub fn effective_first_derivs(
    c: &CollinearEval,
    chi: &ChiValues,
) -> Result<VarMap, EffectiveError> {
    require(c, 2)?;
    let mut out = [0.0; NVARS];
    for v in Var::ALL {
        let prefactor = if v.is_odd() { 2.0 } else { 1.0 };
        let mut d = prefactor * c.d1(v);
        for j in Var::ODD {
            d += chi.get(j) * c.d2(v, j);
        }
        out[v.index()] = d;
    }
    Ok(VarMap(out))
}

/// All second derivatives of f^eff: prefactors 1 / 2 / 3 on the
/// kappa-kappa / kappa-chi / chi-chi blocks plus chi-contracted third
/// derivatives. Needs order-3 collinear partials.
pub fn effective_second_derivs(
    c: &CollinearEval,
    chi: &ChiValues,
) -> Result<VarPairMap, EffectiveError> {
    require(c, 3)?;
    let mut out = [[0.0; NVARS]; NVARS];
    for a in Var::ALL {
        for b in Var::ALL {
            if b.index() < a.index() {
                continue;
            }
            let prefactor = match (a.is_odd(), b.is_odd()) {
                (false, false) => 1.0,
                (true, true) => 3.0,
                _ => 2.0,
            };
            let mut d = prefactor * c.d2(a, b);
            for j in Var::ODD {
                d += chi.get(j) * c.d3(a, b, j);
            }
            out[a.index()][b.index()] = d;
            out[b.index()][a.index()] = d;
        }
    }
    Ok(VarPairMap(out))
}

/// Bundle f^eff with whatever derivative orders were requested.
pub fn effective_eval(
    c: &CollinearEval,
    chi: &ChiValues,
    order: u8,
) -> Result<EffectiveEval, EffectiveError> {
    Ok(EffectiveEval {
        f: effective_integrand(c, chi)?,
        d1: if order >= 1 {
            Some(effective_first_derivs(c, chi)?)
        } else {
            None
        },
        d2: if order >= 2 {
            Some(effective_second_derivs(c, chi)?)
        } else {
            None
        },
    })
}
