//! Conserved functionals of the Kirchhoff-Pokhozhaev flow.
//!
//! Everything here is a pure function of [`SpectralMoments`], so values can
//! be recomputed from logged moment rows without re-running a simulation.
//!
//! `I3` is evaluated from its final closed form, while [`eval_q`] evaluates
//! the two-parameter family `Q(C0, C1)` term by term from the quadratic-form
//! coefficients. The two routes only agree after substituting the closed
//! form of `s''`, which makes `Q(1, 0) == I3` a real check of the algebra.

use crate::dynamics::{Params, SpectralMoments};
use crate::error::FunctionalError;

/// Weights of the invariant family `Q(C0, C1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantParams {
    pub c0: f64,
    pub c1: f64,
}

impl InvariantParams {
    pub const I2: Self = Self { c0: 0.0, c1: 1.0 };
    pub const I3: Self = Self { c0: 1.0, c1: 0.0 };

    pub fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }
}

pub type Terms<const N: usize> = [(&'static str, f64); N];

fn sum_terms(terms: &[(&'static str, f64)]) -> f64 {
    terms.iter().map(|(_, v)| v).sum()
}

fn require_nonzero_q(functional: &'static str, m: &SpectralMoments, params: &Params) -> Result<(), FunctionalError> {
    if params.is_degenerate(m.q) || !m.q.is_finite() {
        return Err(FunctionalError::Domain {
            functional,
            requirement: "q != 0",
            q: m.q,
        });
    }
    Ok(())
}

/// `I1 = ||u_t||^2 + s / (b q)`, the closed form of
/// `||u_t||^2 + int_0^s dσ / (aσ + b)^2`.
pub fn eval_i1(m: &SpectralMoments, params: &Params) -> Result<f64, FunctionalError> {
    if params.b == 0.0 {
        return Err(FunctionalError::Unsupported(
            "I1 is undefined for b = 0: the energy integral diverges at s = 0",
        ));
    }
    if !(m.q > 0.0) || params.is_degenerate(m.q) {
        return Err(FunctionalError::Domain {
            functional: "I1",
            requirement: "q > 0",
            q: m.q,
        });
    }
    Ok(m.norm_v[0] + m.s / (params.b * m.q))
}

pub fn i2_terms(m: &SpectralMoments, params: &Params) -> Result<Terms<3>, FunctionalError> {
    require_nonzero_q("I2", m, params)?;
    Ok([
        ("q_norm_v1", m.q * m.norm_v[1]),
        ("norm_w2_over_q", m.norm_w[2] / m.q),
        ("s1_sq", -0.25 * params.a * m.s1 * m.s1),
    ])
}

/// `I2 = q ||grad u_t||^2 + ||Lap u||^2 / q - (a/4) s'^2`.
pub fn eval_i2(m: &SpectralMoments, params: &Params) -> Result<f64, FunctionalError> {
    Ok(sum_terms(&i2_terms(m, params)?))
}

pub fn i3_terms(m: &SpectralMoments, params: &Params) -> Result<Terms<5>, FunctionalError> {
    require_nonzero_q("I3", m, params)?;
    let a = params.a;
    let q = m.q;
    let s1_sq = m.s1 * m.s1;
    Ok([
        ("q_norm_v2", q * m.norm_v[2]),
        ("norm_w3_over_q", m.norm_w[3] / q),
        ("q1_cross4", -m.q1 * m.cross4),
        ("q1_sq_d2", 0.125 * m.q1 * m.q1 * m.d2()),
        (
            "s_poly",
            -(a / 16.0) * (a * a * s1_sq * s1_sq / 4.0 + q * q * m.s2 * m.s2),
        ),
    ])
}

pub fn eval_i3(m: &SpectralMoments, params: &Params) -> Result<f64, FunctionalError> {
    Ok(sum_terms(&i3_terms(m, params)?))
}

/// Term-by-term evaluation of `Q(C0, C1)` from the quadratic-form
/// coefficients `alpha0 = C0 q`, `beta0 = -C0 q'`, `gamma0 = -(C0/2) q^2 q''`,
/// `alpha1 = (C0/4) q (q'^2/2 + q q'') + C1 q`.
pub fn q_terms(m: &SpectralMoments, params: &Params, inv: &InvariantParams) -> Result<Terms<6>, FunctionalError> {
    require_nonzero_q("Q", m, params)?;
    let (c0, c1) = (inv.c0, inv.c1);
    let a = params.a;
    let q = m.q;
    let s1_sq = m.s1 * m.s1;
    let alpha1 = 0.25 * c0 * q * (0.5 * m.q1 * m.q1 + q * m.q2) + c1 * q;
    Ok([
        ("alpha0_d3", c0 * m.d3()),
        ("beta0_cross4", -c0 * m.q1 * m.cross4),
        ("gamma0_norm_v1", -0.5 * c0 * q * q * m.q2 * m.norm_v[1]),
        ("alpha1_energy", alpha1 * (m.norm_v[1] + m.norm_w[2] / (q * q))),
        (
            "c0_poly",
            -(c0 * a / 16.0) * (a * a * s1_sq * s1_sq / 4.0 - q * q * m.s2 * m.s2),
        ),
        ("c1_poly", -(c1 * a / 4.0) * s1_sq),
    ])
}

pub fn eval_q(m: &SpectralMoments, params: &Params, inv: &InvariantParams) -> Result<f64, FunctionalError> {
    Ok(sum_terms(&q_terms(m, params, inv)?))
}

/// `lambda = q ||u_t||^2 + ||grad u||^2 / q`, only meaningful for `q > 0`.
pub fn eval_lambda(m: &SpectralMoments) -> Result<f64, FunctionalError> {
    if !(m.q > 0.0) {
        return Err(FunctionalError::Domain {
            functional: "lambda",
            requirement: "q > 0",
            q: m.q,
        });
    }
    Ok(m.q * m.norm_v[0] + m.norm_w[1] / m.q)
}

/// All functionals at one instant. `i1` and `lambda` are `None` where they
/// are undefined (`q <= 0`, or `b = 0` for `i1`).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSnapshot {
    pub t: f64,
    pub i1: Option<f64>,
    pub i2: f64,
    pub i3: f64,
    pub lambda: Option<f64>,
    pub q_inv: f64,
    pub terms: Vec<(&'static str, f64)>,
}

pub fn snapshot(
    m: &SpectralMoments,
    params: &Params,
    inv: &InvariantParams,
) -> Result<FunctionalSnapshot, FunctionalError> {
    let i2t = i2_terms(m, params)?;
    let i3t = i3_terms(m, params)?;
    let qt = q_terms(m, params, inv)?;
    let mut terms = Vec::with_capacity(14);
    terms.extend(i2t.iter().map(|&(n, v)| (n, v)));
    terms.extend(i3t.iter().map(|&(n, v)| (n, v)));
    terms.extend(qt.iter().map(|&(n, v)| (n, v)));
    Ok(FunctionalSnapshot {
        t: m.t,
        i1: eval_i1(m, params).ok(),
        i2: sum_terms(&i2t),
        i3: sum_terms(&i3t),
        lambda: eval_lambda(m).ok(),
        q_inv: sum_terms(&qt),
        terms,
    })
}
