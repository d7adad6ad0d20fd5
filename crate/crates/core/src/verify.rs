//! Verdicts over sampled trajectories.
//!
//! Every check consumes a series of [`SpectralMoments`], so the same code runs
//! on a fresh [`Trajectory`] (via [`moment_series`]) and on moments read back
//! from a time-series file.

use crate::dynamics::{compute_moments, Params, SpectralMoments};
use crate::error::{DynamicsError, VerifyError};
use crate::functionals::{eval_i1, eval_i2, eval_i3, eval_q, InvariantParams};
use crate::integrators::Trajectory;
use crate::lattice::ModeLattice;

/// Relative slack on every inequality; absorbs roundoff at equality cases.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// Normalization floor for relative drift.
pub const DRIFT_FLOOR: f64 = 1e-14;

/// Normalization floor for the `Q` identity audit.
pub const AUDIT_FLOOR: f64 = 1e-14;

pub const LEMMA2_GATE_I2: f64 = 2.0;
pub const LEMMA2_GATE_I3: f64 = 0.5;

pub fn moment_series(
    traj: &Trajectory,
    lattice: &ModeLattice,
    params: &Params,
) -> Result<Vec<SpectralMoments>, DynamicsError> {
    traj.states
        .iter()
        .map(|s| compute_moments(s, lattice, params))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub name: String,
    pub initial: f64,
    pub max_abs: f64,
    /// `max_abs / max(|initial|, DRIFT_FLOOR)`
    pub max_rel: f64,
    pub samples: usize,
}

impl DriftReport {
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Self {
        let initial = values.first().copied().unwrap_or(0.0);
        let max_abs = values.iter().map(|v| (v - initial).abs()).fold(0.0, f64::max);
        Self {
            name: name.into(),
            initial,
            max_abs,
            max_rel: max_abs / initial.abs().max(DRIFT_FLOOR),
            samples: values.len(),
        }
    }
}

/// Drift of `I1`, `I2`, `I3` and `Q(C0, C1)`. The `I1` report is omitted
/// when `I1` is undefined at some sample (`b = 0` or `q <= 0`).
pub fn drift(
    series: &[SpectralMoments],
    params: &Params,
    inv: &InvariantParams,
) -> Result<Vec<DriftReport>, VerifyError> {
    if series.is_empty() {
        return Err(VerifyError::EmptyTrajectory);
    }
    let i1: Option<Vec<f64>> = series.iter().map(|m| eval_i1(m, params).ok()).collect();
    let i2 = series
        .iter()
        .map(|m| eval_i2(m, params))
        .collect::<Result<Vec<_>, _>>()?;
    let i3 = series
        .iter()
        .map(|m| eval_i3(m, params))
        .collect::<Result<Vec<_>, _>>()?;
    let q = series
        .iter()
        .map(|m| eval_q(m, params, inv))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(4);
    if let Some(i1) = i1 {
        out.push(DriftReport::from_values("I1", &i1));
    }
    out.push(DriftReport::from_values("I2", &i2));
    out.push(DriftReport::from_values("I3", &i3));
    out.push(DriftReport::from_values(format!("Q({},{})", inv.c0, inv.c1), &q));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaVerdict {
    /// For once-gated checks, the gate at the first sample; for per-sample
    /// gates, whether the gate held at every sample.
    pub hypothesis: bool,
    /// Whether the conclusion held at every gated sample. Vacuously true
    /// when no sample is gated.
    pub conclusion: bool,
    /// Smallest signed slack over gated samples, scaled by the bound
    /// magnitude; negative means a violation. `+inf` when nothing was gated.
    pub worst_margin: f64,
    pub t_worst: f64,
    pub samples: usize,
    pub gated_samples: usize,
}

impl LemmaVerdict {
    fn empty(samples: usize) -> Self {
        Self {
            hypothesis: false,
            conclusion: true,
            worst_margin: f64::INFINITY,
            t_worst: f64::NAN,
            samples,
            gated_samples: 0,
        }
    }

    pub fn applicable(&self) -> bool {
        self.gated_samples > 0
    }

    /// No counterexample among gated samples.
    pub fn passed(&self) -> bool {
        self.conclusion
    }

    fn record(&mut self, t: f64, margin: f64) {
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.t_worst = t;
        }
        if !(margin >= 0.0) {
            self.conclusion = false;
        }
    }
}

/// Relative slack of `lhs <= rhs`, with `INEQUALITY_SLACK` tolerance built in:
/// non-negative exactly when `lhs <= rhs + slack |rhs|`.
fn le_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs().max(f64::MIN_POSITIVE);
    (rhs - lhs) / scale + INEQUALITY_SLACK
}

fn require_small_data_params(params: &Params) -> Result<(), VerifyError> {
    if params.a == 0.0 {
        return Err(VerifyError::Unsupported("requires a != 0"));
    }
    if !(params.b > 0.0) {
        return Err(VerifyError::Unsupported("requires b > 0"));
    }
    Ok(())
}

/// Small-data threshold `1 / (6 |a b|)` on `I1`.
pub fn lemma1_threshold(params: &Params) -> f64 {
    1.0 / (6.0 * (params.a * params.b).abs())
}

/// Gate `I1(0) <= 1/(6|ab|)` checked once; conclusion
/// `b/2 <= q <= 3b/2` and `|a| lambda <= 1/2` at every sample.
pub fn check_lemma1(series: &[SpectralMoments], params: &Params) -> Result<LemmaVerdict, VerifyError> {
    require_small_data_params(params)?;
    let first = series.first().ok_or(VerifyError::EmptyTrajectory)?;
    let mut verdict = LemmaVerdict::empty(series.len());
    verdict.hypothesis = match eval_i1(first, params) {
        Ok(i1) => i1 <= lemma1_threshold(params),
        Err(_) => false,
    };
    if !verdict.hypothesis {
        return Ok(verdict);
    }
    let b = params.b;
    let a_abs = params.a.abs();
    for m in series {
        verdict.gated_samples += 1;
        let lambda = m.q * m.norm_v[0] + m.norm_w[1] / m.q;
        let margin = le_margin(0.5 * b, m.q)
            .min(le_margin(m.q, 1.5 * b))
            .min(le_margin(a_abs * lambda, 0.5));
        verdict.record(m.t, margin);
    }
    Ok(verdict)
}

fn check_sandwich(
    series: &[SpectralMoments],
    params: &Params,
    gate: f64,
    eval: impl Fn(&SpectralMoments) -> Result<(f64, f64), VerifyError>,
) -> Result<LemmaVerdict, VerifyError> {
    if series.is_empty() {
        return Err(VerifyError::EmptyTrajectory);
    }
    let mut verdict = LemmaVerdict::empty(series.len());
    verdict.hypothesis = true;
    for m in series {
        let gated = m.q > 0.0 && params.a.abs() * (m.q * m.norm_v[0] + m.norm_w[1] / m.q) <= gate;
        if !gated {
            verdict.hypothesis = false;
            continue;
        }
        verdict.gated_samples += 1;
        let (invariant, d) = eval(m)?;
        let margin = le_margin(2.0 / 3.0 * invariant, d).min(le_margin(d, 2.0 * invariant));
        verdict.record(m.t, margin);
    }
    Ok(verdict)
}

/// Wherever `q > 0` and `|a| lambda <= 2`: `(2/3) I2 <= D2 <= 2 I2`.
pub fn check_sandwich_i2(series: &[SpectralMoments], params: &Params) -> Result<LemmaVerdict, VerifyError> {
    check_sandwich(series, params, LEMMA2_GATE_I2, |m| Ok((eval_i2(m, params)?, m.d2())))
}

/// Wherever `q > 0` and `|a| lambda <= 1/2`: `(2/3) I3 <= D3 <= 2 I3`.
pub fn check_sandwich_i3(series: &[SpectralMoments], params: &Params) -> Result<LemmaVerdict, VerifyError> {
    check_sandwich(series, params, LEMMA2_GATE_I3, |m| Ok((eval_i3(m, params)?, m.d3())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub name: &'static str,
    pub sup: f64,
    pub bound: f64,
}

impl BoundEntry {
    pub fn holds(&self) -> bool {
        le_margin(self.sup, self.bound) >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Theorem4Report {
    NotApplicable(&'static str),
    Checked {
        /// `b/2 <= q <= 3b/2` at every sample.
        q_in_band: bool,
        entries: Vec<BoundEntry>,
    },
}

impl Theorem4Report {
    pub fn passed(&self) -> bool {
        match self {
            Theorem4Report::NotApplicable(_) => true,
            Theorem4Report::Checked { q_in_band, entries } => *q_in_band && entries.iter().all(BoundEntry::holds),
        }
    }
}

/// `||u_ttt||^2` from the equation: `u_tt = Lap u / q^2`, differentiated once.
pub fn u_ttt_norm_sq(m: &SpectralMoments) -> f64 {
    let q = m.q;
    m.norm_v[2] / q.powi(4) - 4.0 * m.q1 * m.cross4 / q.powi(5) + 4.0 * m.q1 * m.q1 * m.norm_w[2] / q.powi(6)
}

/// Uniform bounds under the small-data hypothesis. Each bound is an explicit
/// function of `b`, `|a|` and the largest sampled value of `I1`, `I2`, `I3`
/// (equal to the initial value up to integrator drift).
pub fn check_theorem4(series: &[SpectralMoments], params: &Params) -> Result<Theorem4Report, VerifyError> {
    if params.a == 0.0 {
        return Ok(Theorem4Report::NotApplicable("requires a != 0"));
    }
    if !(params.b > 0.0) {
        return Ok(Theorem4Report::NotApplicable("requires b > 0"));
    }
    let first = series.first().ok_or(VerifyError::EmptyTrajectory)?;
    match eval_i1(first, params) {
        Ok(i1) if i1 <= lemma1_threshold(params) => {}
        _ => return Ok(Theorem4Report::NotApplicable("I1(0) exceeds 1/(6|ab|)")),
    }

    let b = params.b;
    let a_abs = params.a.abs();
    let mut q_in_band = true;
    let (mut i1, mut i2, mut i3) = (0.0f64, 0.0f64, 0.0f64);
    let mut sup = [0.0f64; 9];
    for m in series {
        q_in_band &= le_margin(0.5 * b, m.q) >= 0.0 && le_margin(m.q, 1.5 * b) >= 0.0;
        // I1 is defined once q stays in the band
        i1 = i1.max(eval_i1(m, params).unwrap_or(f64::INFINITY));
        i2 = i2.max(eval_i2(m, params)?);
        i3 = i3.max(eval_i3(m, params)?);
        let q4 = m.q.powi(4);
        let values = [
            m.norm_v[0],
            m.norm_v[1],
            m.norm_v[2],
            m.norm_w[1],
            m.norm_w[2],
            m.norm_w[3],
            m.norm_w[2] / q4,
            m.norm_w[3] / q4,
            u_ttt_norm_sq(m),
        ];
        for (s, v) in sup.iter_mut().zip(values) {
            *s = s.max(v);
        }
    }
    let b3 = b.powi(3);
    let b5 = b.powi(5);
    let bounds = [
        ("norm_v0", i1),
        ("norm_v1", 4.0 * i2 / b),
        ("norm_v2", 4.0 * i3 / b),
        ("norm_w1", 1.5 * b * b * i1),
        ("norm_w2", 3.0 * b * i2),
        ("norm_w3", 3.0 * b * i3),
        ("u_tt", 48.0 * i2 / b3),
        ("grad_u_tt", 48.0 * i3 / b3),
        ("u_ttt", 2.0 * (64.0 * i3 / b5 + 9216.0 * a_abs * i2 * i2 / b5)),
    ];
    let entries = bounds
        .iter()
        .zip(sup)
        .map(|(&(name, bound), sup)| BoundEntry { name, sup, bound })
        .collect();
    Ok(Theorem4Report::Checked { q_in_band, entries })
}

pub fn relerr(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(AUDIT_FLOOR)
}

/// Largest of `relerr(Q(0,1), I2)` and `relerr(Q(1,0), I3)` over the series.
pub fn audit_q_identities(series: &[SpectralMoments], params: &Params) -> Result<f64, VerifyError> {
    let mut worst = 0.0f64;
    for m in series {
        let e2 = relerr(eval_q(m, params, &InvariantParams::I2)?, eval_i2(m, params)?);
        let e3 = relerr(eval_q(m, params, &InvariantParams::I3)?, eval_i3(m, params)?);
        worst = worst.max(e2).max(e3);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseBound {
    /// `a > 0, b > 0`: `b ||grad u_t||^2 <= I2`.
    GradVelocity,
    /// `a < 0, b > 0, q > 0`: `s'^2 <= 4 I2 / |a|`.
    GradientRate,
}

/// Checks whichever case bound applies to `params`. `None` when neither
/// does; samples with `q <= 0` are skipped for the second bound.
pub fn check_case_bounds(
    series: &[SpectralMoments],
    params: &Params,
) -> Result<Option<(CaseBound, LemmaVerdict)>, VerifyError> {
    if series.is_empty() {
        return Err(VerifyError::EmptyTrajectory);
    }
    let (a, b) = (params.a, params.b);
    if !(b > 0.0) || a == 0.0 {
        return Ok(None);
    }
    let case = if a > 0.0 {
        CaseBound::GradVelocity
    } else {
        CaseBound::GradientRate
    };
    let mut verdict = LemmaVerdict::empty(series.len());
    verdict.hypothesis = true;
    for m in series {
        if !(m.q > 0.0) {
            verdict.hypothesis = false;
            continue;
        }
        let i2 = eval_i2(m, params)?;
        let margin = match case {
            CaseBound::GradVelocity => le_margin(b * m.norm_v[1], i2),
            CaseBound::GradientRate => le_margin(m.s1 * m.s1, 4.0 * i2 / a.abs()),
        };
        verdict.gated_samples += 1;
        verdict.record(m.t, margin);
    }
    Ok(Some((case, verdict)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpectralState;
    use crate::integrators::{integrate, StepControl};
    use crate::lattice::{make_custom_lattice, make_torus_lattice};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn single_mode() -> ModeLattice {
        make_custom_lattice(1, vec![(vec![1.0], 1.0)]).unwrap()
    }

    fn single(w: f64, v: f64) -> SpectralState {
        SpectralState::new(0.0, vec![Complex64::new(w, 0.0)], vec![Complex64::new(v, 0.0)]).unwrap()
    }

    fn series_for(state: &SpectralState, lattice: &ModeLattice, params: &Params, t_end: f64) -> Vec<SpectralMoments> {
        let traj = integrate(state, lattice, params, &StepControl::adaptive(1e-10, 1e-12), t_end, 0.1).unwrap();
        moment_series(&traj, lattice, params).unwrap()
    }

    #[test]
    fn zero_trajectory_has_no_drift() {
        let lat = make_torus_lattice(1, 3).unwrap();
        let p = Params::new(0.5, 1.0).unwrap();
        let series = series_for(&SpectralState::zeros(lat.len(), 0.0), &lat, &p, 1.0);
        let reports = drift(&series, &p, &InvariantParams::new(0.7, -0.3)).unwrap();
        assert_eq!(reports.len(), 4);
        for r in reports {
            assert_eq!(r.max_abs, 0.0);
            assert_eq!(r.max_rel, 0.0);
        }
        assert_eq!(audit_q_identities(&series, &p).unwrap(), 0.0);
        match check_theorem4(&series, &p).unwrap() {
            Theorem4Report::Checked { q_in_band, entries } => {
                assert!(q_in_band);
                assert!(entries.iter().all(|e| e.sup == 0.0 && e.holds()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_mode_conservation() {
        let lat = single_mode();
        let p = Params::new(1.0, 1.0).unwrap();
        let series = series_for(&single(0.3, 0.0), &lat, &p, 10.0);
        let reports = drift(&series, &p, &InvariantParams::I3).unwrap();
        // I1 = I2 = 0.09 / 1.09 at t = 0 for a unit frequency
        assert!((reports[0].initial - 0.09 / 1.09).abs() < 1e-15);
        assert!((reports[1].initial - 0.09 / 1.09).abs() < 1e-15);
        for r in &reports {
            assert!(r.max_rel <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn lemma1_examples() {
        let lat = single_mode();
        let p = Params::new(1.0, 1.0).unwrap();
        let series = series_for(&single(0.3, 0.0), &lat, &p, 5.0);
        let v = check_lemma1(&series, &p).unwrap();
        assert!(v.hypothesis && v.conclusion && v.worst_margin > 0.0);
        assert_eq!(v.gated_samples, series.len());

        let zero = series_for(&single(0.0, 0.0), &lat, &p, 1.0);
        let v = check_lemma1(&zero, &p).unwrap();
        assert!(v.hypothesis && v.conclusion);

        let big = series_for(&single(1.0, 0.0), &lat, &p, 1.0);
        let v = check_lemma1(&big, &p).unwrap();
        assert!(!v.hypothesis && !v.applicable() && v.passed());
        assert!(matches!(
            check_theorem4(&big, &p).unwrap(),
            Theorem4Report::NotApplicable(_)
        ));
    }

    #[test]
    fn lemma1_rejects_unsupported_params() {
        let lat = single_mode();
        let series = series_for(&single(0.1, 0.0), &lat, &Params::new(0.0, 1.0).unwrap(), 0.5);
        assert!(matches!(
            check_lemma1(&series, &Params::new(0.0, 1.0).unwrap()),
            Err(VerifyError::Unsupported(_))
        ));
        assert!(matches!(
            check_lemma1(&series, &Params::new(1.0, -1.0).unwrap()),
            Err(VerifyError::Unsupported(_))
        ));
    }

    #[test]
    fn sandwich_equality_case() {
        // w = 1, v = 0, a = b = 1: lambda = 1/2, I2 = D2 = 1/2
        let lat = single_mode();
        let p = Params::new(1.0, 1.0).unwrap();
        let m = compute_moments(&single(1.0, 0.0), &lat, &p).unwrap();
        assert_eq!(m.lambda, 0.5);
        assert_eq!(eval_i2(&m, &p).unwrap(), 0.5);
        assert_eq!(m.d2(), 0.5);
        let v = check_sandwich_i2(&[m], &p).unwrap();
        assert!(v.hypothesis && v.conclusion);
    }

    #[test]
    fn sandwich_linear_case_is_exact() {
        let lat = make_torus_lattice(1, 3).unwrap();
        let p = Params::new(0.0, 1.3).unwrap();
        let w: Vec<_> = (0..lat.len()).map(|i| Complex64::new(0.1 * i as f64, 0.05)).collect();
        let v: Vec<_> = (0..lat.len()).map(|i| Complex64::new(-0.02, 0.03 * i as f64)).collect();
        let m = compute_moments(&SpectralState::new(0.0, w, v).unwrap(), &lat, &p).unwrap();
        assert_eq!(eval_i2(&m, &p).unwrap(), m.d2());
        assert!((eval_i3(&m, &p).unwrap() - m.d3()).abs() <= 1e-15 * m.d3());
        assert!(check_sandwich_i2(&[m], &p).unwrap().passed());
        assert!(check_sandwich_i3(&[m], &p).unwrap().passed());
    }

    #[test]
    fn sandwich_i3_small_mode() {
        let lat = single_mode();
        let p = Params::new(1.0, 1.0).unwrap();
        let series = series_for(&single(0.3, 0.0), &lat, &p, 5.0);
        let v = check_sandwich_i3(&series, &p).unwrap();
        assert!(v.hypothesis && v.conclusion && v.gated_samples == series.len());
    }

    #[test]
    fn sandwich_gate_skips_large_lambda() {
        // lambda = 0.55 + ... just above the 1/2 gate
        let lat = single_mode();
        let p = Params::new(1.0, 1.0).unwrap();
        let m = compute_moments(&single(1.1, 0.0), &lat, &p).unwrap();
        assert!(m.lambda > 0.5 && m.lambda < 2.0);
        let v = check_sandwich_i3(&[m], &p).unwrap();
        assert!(!v.hypothesis && !v.applicable() && v.passed());
        assert!(check_sandwich_i2(&[m], &p).unwrap().applicable());
    }

    #[test]
    fn case_bounds_select_by_sign() {
        let lat = single_mode();
        let pos = Params::new(0.5, 1.0).unwrap();
        let series = series_for(&single(0.4, 0.2), &lat, &pos, 5.0);
        let (case, v) = check_case_bounds(&series, &pos).unwrap().unwrap();
        assert_eq!(case, CaseBound::GradVelocity);
        assert!(v.passed() && v.gated_samples == series.len());

        let neg = Params::new(-0.5, 1.0).unwrap();
        let series = series_for(&single(0.4, 0.2), &lat, &neg, 5.0);
        let (case, v) = check_case_bounds(&series, &neg).unwrap().unwrap();
        assert_eq!(case, CaseBound::GradientRate);
        assert!(v.passed());

        let lin = Params::new(0.0, 1.0).unwrap();
        assert!(check_case_bounds(&series, &lin).unwrap().is_none());
    }

    #[test]
    fn theorem4_small_data_run() {
        let lat = make_torus_lattice(1, 3).unwrap();
        let p = Params::new(0.5, 1.0).unwrap();
        let w: Vec<_> = lat
            .modes()
            .iter()
            .map(|m| Complex64::new(0.1 * (-m.norm_sq()).exp(), 0.0))
            .collect();
        let v = vec![Complex64::new(0.0, 0.0); lat.len()];
        let series = series_for(&SpectralState::new(0.0, w, v).unwrap(), &lat, &p, 50.0);
        let report = check_theorem4(&series, &p).unwrap();
        assert!(report.passed(), "{report:?}");
        if let Theorem4Report::Checked { entries, .. } = report {
            assert!(entries.iter().all(|e| e.sup.is_finite() && e.sup > 0.0));
        }
    }

    #[test]
    fn relative_drift_uses_floor() {
        let r = DriftReport::from_values("x", &[0.0, 1e-20]);
        assert_eq!(r.max_rel, 1e-20 / DRIFT_FLOOR);
        let r = DriftReport::from_values("x", &[2.0, 2.5, 1.0]);
        assert_eq!((r.max_abs, r.max_rel, r.samples), (1.0, 0.5, 3));
    }

    fn arb_state(len: usize, amp: f64) -> impl Strategy<Value = SpectralState> {
        let c = (-amp..amp, -amp..amp).prop_map(|(re, im)| Complex64::new(re, im));
        (
            proptest::collection::vec(c.clone(), len),
            proptest::collection::vec(c, len),
        )
            .prop_map(|(w, v)| SpectralState::new(0.0, w, v).unwrap())
    }

    fn arb_params() -> impl Strategy<Value = Params> {
        (prop_oneof![-2.0..-0.05, 0.05..2.0], 0.2..3.0f64).prop_map(|(a, b)| Params::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn q_identities_hold_pointwise(state in arb_state(7, 1.0), params in arb_params()) {
            let lat = make_torus_lattice(1, 3).unwrap();
            if let Ok(m) = compute_moments(&state, &lat, &params) {
                prop_assert!(audit_q_identities(&[m], &params).unwrap() <= 1e-12);
            }
        }

        #[test]
        fn sandwiches_hold_under_gates(state in arb_state(7, 0.5), params in arb_params()) {
            let lat = make_torus_lattice(1, 3).unwrap();
            let m = match compute_moments(&state, &lat, &params) {
                Ok(m) if m.q > 0.0 => m,
                _ => return Ok(()),
            };
            let gate = params.a.abs() * m.lambda;
            prop_assume!(gate <= LEMMA2_GATE_I2);
            prop_assert!(check_sandwich_i2(&[m], &params).unwrap().passed());
            let v3 = check_sandwich_i3(&[m], &params).unwrap();
            prop_assert!(v3.passed());
            prop_assert_eq!(v3.applicable(), gate <= LEMMA2_GATE_I3);
        }

        #[test]
        fn case_bounds_hold_pointwise(state in arb_state(7, 1.0), params in arb_params()) {
            let lat = make_torus_lattice(1, 3).unwrap();
            if let Ok(m) = compute_moments(&state, &lat, &params) {
                if let Some((_, v)) = check_case_bounds(&[m], &params).unwrap() {
                    prop_assert!(v.passed(), "{:?}", v);
                }
            }
        }

        #[test]
        fn lemma1_conclusion_holds_at_start(state in arb_state(7, 0.3), params in arb_params()) {
            let lat = make_torus_lattice(1, 3).unwrap();
            let m = match compute_moments(&state, &lat, &params) {
                Ok(m) if m.q > 0.0 => m,
                _ => return Ok(()),
            };
            let v = check_lemma1(&[m], &params).unwrap();
            prop_assume!(v.hypothesis);
            prop_assert!(v.passed(), "{:?}", v);
        }
    }
}
