//! Time stepping for the spectral system.
//!
//! Three schemes are provided: classical RK4, kick-drift-kick velocity
//! Verlet (the force `-|xi|^2 w / q(w)^2` depends on positions only, so the
//! splitting is symplectic), and a Dormand-Prince 5(4) pair with a PI step
//! controller.
//!
//! Every stage evaluation recomputes `q` from the stage positions. A stage
//! whose `q` is within tolerance of zero, or has the opposite sign to `q` at
//! the start of the step, aborts the attempt: fixed-step methods report a
//! degenerate coefficient at once (with a bisected crossing time), the
//! adaptive method shrinks the step and only gives up once it falls below
//! `h_min`.

use num_complex::Complex64;

use crate::dynamics::{gradient_norm_sq, Params, SpectralState};
use crate::error::{DynamicsError, StepError};
use crate::lattice::ModeLattice;

/// A system `w' = v`, `v' = acc(t, w)` whose acceleration carries a scalar
/// coefficient `q` that must stay away from zero.
#[allow(clippy::len_without_is_empty)]
pub trait SecondOrderSystem {
    /// Number of complex position components.
    fn len(&self) -> usize;

    fn q(&self, t: f64, w: &[Complex64]) -> f64;

    fn is_degenerate(&self, q: f64) -> bool;

    /// Writes the acceleration into `out` and returns the `q` it used. When
    /// `q` is degenerate `out` is left untouched.
    fn acceleration(&self, t: f64, w: &[Complex64], out: &mut [Complex64]) -> f64;
}

/// The Galerkin-truncated Kirchhoff-Pokhozhaev system on a lattice.
#[derive(Debug, Clone, Copy)]
pub struct KirchhoffSystem<'a> {
    pub lattice: &'a ModeLattice,
    pub params: Params,
}

impl SecondOrderSystem for KirchhoffSystem<'_> {
    fn len(&self) -> usize {
        self.lattice.len()
    }

    fn q(&self, _t: f64, w: &[Complex64]) -> f64 {
        self.params.q_of(gradient_norm_sq(w, self.lattice))
    }

    fn is_degenerate(&self, q: f64) -> bool {
        self.params.is_degenerate(q)
    }

    fn acceleration(&self, t: f64, w: &[Complex64], out: &mut [Complex64]) -> f64 {
        let q = self.q(t, w);
        if self.is_degenerate(q) || !q.is_finite() {
            return q;
        }
        let inv_q2 = 1.0 / (q * q);
        for ((o, z), k2) in out.iter_mut().zip(w).zip(self.lattice.xi_sq()) {
            *o = z * (-k2 * inv_q2);
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rk4,
    Verlet,
    Adaptive45,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Verlet => "verlet",
            Method::Adaptive45 => "adaptive45",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "rk4" => Some(Method::Rk4),
            "verlet" => Some(Method::Verlet),
            "adaptive45" => Some(Method::Adaptive45),
            _ => None,
        }
    }
}

/// Step selection. `h` is the fixed step for `rk4`/`verlet` and the initial
/// trial step for `adaptive45`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub method: Method,
    pub h: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl StepControl {
    pub fn fixed(method: Method, h: f64) -> Self {
        Self {
            method,
            h,
            rtol: 1e-8,
            atol: 1e-10,
            h_min: h.min(1e-12),
            h_max: h.max(1.0),
        }
    }

    pub fn rk4(h: f64) -> Self {
        Self::fixed(Method::Rk4, h)
    }

    pub fn verlet(h: f64) -> Self {
        Self::fixed(Method::Verlet, h)
    }

    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        Self {
            method: Method::Adaptive45,
            h: 1e-3,
            rtol,
            atol,
            h_min: 1e-12,
            h_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), StepError> {
        let bad = |m: &str| Err(StepError::InvalidControl(m.to_string()));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("h must be positive and finite");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h && self.h <= self.h_max) {
            return bad("require 0 < h_min <= h <= h_max");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        Ok(())
    }
}

/// Diagnostics recorded while integrating.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryEvent {
    /// `q` vanished; `t` is the bisected crossing estimate.
    QCrossing { t: f64, q: f64 },
    /// An adaptive trial step was discarded.
    StepRejected { t: f64, h: f64, reason: RejectReason },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectReason {
    /// Weighted RMS error estimate (> 1).
    ErrorEstimate(f64),
    /// A stage had `q` near zero or of the wrong sign.
    DegenerateStage,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    QCrossing,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub events: Vec<TrajectoryEvent>,
    pub termination: Termination,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&SpectralState> {
        self.states.last()
    }

    pub fn crossing(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e {
            TrajectoryEvent::QCrossing { t, .. } => Some(*t),
            _ => None,
        })
    }
}

// Dormand-Prince 5(4)
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Relative time horizon within which a stalled adaptive run whose `q` is
/// heading to zero is reported as a crossing rather than a step underflow.
pub const SINGULAR_HORIZON: f64 = 1e-6;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
enum StageFailure {
    Degenerate { q: f64 },
    NonFinite,
}

/// Stepper with reusable scratch space. The state vector is stored as
/// `[w_0 .. w_{n-1}, v_0 .. v_{n-1}]`.
pub struct Stepper<S> {
    system: S,
    control: StepControl,
    n: usize,
    k: [Vec<Complex64>; 7],
    ytmp: Vec<Complex64>,
    yout: Vec<Complex64>,
    // adaptive controller state
    h_next: f64,
    err_prev: f64,
    fsal_valid: bool,
    pub stats: StepStats,
    events: Vec<TrajectoryEvent>,
}

impl<S: SecondOrderSystem> Stepper<S> {
    pub fn new(system: S, control: StepControl) -> Self {
        let n = system.len();
        let z = vec![Complex64::new(0.0, 0.0); 2 * n];
        Self {
            system,
            control,
            n,
            k: std::array::from_fn(|_| z.clone()),
            ytmp: z.clone(),
            yout: z,
            h_next: control.h.min(control.h_max),
            err_prev: 1e-4,
            fsal_valid: false,
            stats: StepStats::default(),
            events: Vec::new(),
        }
    }

    fn q_at(&self, t: f64, y: &[Complex64]) -> f64 {
        self.system.q(t, &y[..self.n])
    }

    fn q_ok(&self, q: f64, q_sign: f64) -> bool {
        q.is_finite() && q.signum() == q_sign && !self.system.is_degenerate(q)
    }

    /// Evaluates `f(t, y)` into `out`, checking `q` against the sign at the
    /// start of the step.
    fn eval(
        system: &S,
        n: usize,
        q_sign: f64,
        t: f64,
        y: &[Complex64],
        out: &mut [Complex64],
        stats: &mut StepStats,
    ) -> Result<(), StageFailure> {
        stats.rhs_evals += 1;
        let (w, v) = y.split_at(n);
        let (dw, dv) = out.split_at_mut(n);
        dw.copy_from_slice(v);
        let q = system.acceleration(t, w, dv);
        if !q.is_finite() {
            return Err(StageFailure::NonFinite);
        }
        if system.is_degenerate(q) || q.signum() != q_sign {
            return Err(StageFailure::Degenerate { q });
        }
        Ok(())
    }

    /// One raw RK4 step of signed size `h` from `y` into `self.yout`.
    fn rk4_raw(&mut self, t: f64, y: &[Complex64], h: f64, q_sign: f64) -> Result<(), StageFailure> {
        let (sys, n) = (&self.system, self.n);
        let [k1, k2, k3, k4, ..] = &mut self.k;
        Self::eval(sys, n, q_sign, t, y, k1, &mut self.stats)?;
        for i in 0..2 * n {
            self.ytmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        Self::eval(sys, n, q_sign, t + 0.5 * h, &self.ytmp, k2, &mut self.stats)?;
        for i in 0..2 * n {
            self.ytmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        Self::eval(sys, n, q_sign, t + 0.5 * h, &self.ytmp, k3, &mut self.stats)?;
        for i in 0..2 * n {
            self.ytmp[i] = y[i] + k3[i] * h;
        }
        Self::eval(sys, n, q_sign, t + h, &self.ytmp, k4, &mut self.stats)?;
        let h6 = h / 6.0;
        for i in 0..2 * n {
            self.yout[i] = y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h6;
        }
        Ok(())
    }

    /// Kick-drift-kick with signed step `h`.
    fn verlet_raw(&mut self, t: f64, y: &[Complex64], h: f64, q_sign: f64) -> Result<(), StageFailure> {
        let (sys, n) = (&self.system, self.n);
        let [acc0, acc1, ..] = &mut self.k;
        // acc slices hold [v | a(w)]; only the second half is used
        Self::eval(sys, n, q_sign, t, y, acc0, &mut self.stats)?;
        let half = 0.5 * h;
        for i in 0..n {
            let vh = y[n + i] + acc0[n + i] * half;
            self.yout[n + i] = vh;
            self.yout[i] = y[i] + vh * h;
        }
        Self::eval(sys, n, q_sign, t + h, &self.yout, acc1, &mut self.stats)?;
        for i in 0..n {
            self.yout[n + i] += acc1[n + i] * half;
        }
        Ok(())
    }

    /// Dormand-Prince step into `self.yout`, returning the weighted RMS
    /// error estimate. `k[0]` already holds `f(t, y)` when `fsal_valid`.
    fn dopri_raw(&mut self, t: f64, y: &[Complex64], h: f64, q_sign: f64) -> Result<f64, StageFailure> {
        let (sys, n) = (&self.system, self.n);
        let m = 2 * n;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        if !self.fsal_valid {
            Self::eval(sys, n, q_sign, t, y, k1, &mut self.stats)?;
            self.fsal_valid = true;
        }
        let yt = &mut self.ytmp;
        for i in 0..m {
            yt[i] = y[i] + k1[i] * (h * A21);
        }
        Self::eval(sys, n, q_sign, t + C2 * h, yt, k2, &mut self.stats)?;
        for i in 0..m {
            yt[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        Self::eval(sys, n, q_sign, t + C3 * h, yt, k3, &mut self.stats)?;
        for i in 0..m {
            yt[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        Self::eval(sys, n, q_sign, t + C4 * h, yt, k4, &mut self.stats)?;
        for i in 0..m {
            yt[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        Self::eval(sys, n, q_sign, t + C5 * h, yt, k5, &mut self.stats)?;
        for i in 0..m {
            yt[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        Self::eval(sys, n, q_sign, t + h, yt, k6, &mut self.stats)?;
        let yout = &mut self.yout;
        for i in 0..m {
            yout[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        Self::eval(sys, n, q_sign, t + h, yout, k7, &mut self.stats)?;
        let (rtol, atol) = (self.control.rtol, self.control.atol);
        let mut acc = 0.0;
        for i in 0..m {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc_re = atol + rtol * y[i].re.abs().max(yout[i].re.abs());
            let sc_im = atol + rtol * y[i].im.abs().max(yout[i].im.abs());
            acc += (e.re / sc_re).powi(2) + (e.im / sc_im).powi(2);
        }
        let err = (acc / (2 * m).max(1) as f64).sqrt();
        if !err.is_finite() || yout.iter().any(|z| !z.is_finite()) {
            return Err(StageFailure::NonFinite);
        }
        Ok(err)
    }

    fn fixed_raw(&mut self, t: f64, y: &[Complex64], h: f64, q_sign: f64) -> Result<(), StageFailure> {
        match self.control.method {
            Method::Verlet => self.verlet_raw(t, y, h, q_sign),
            _ => self.rk4_raw(t, y, h, q_sign),
        }
    }

    /// Largest fraction of `h` for which a raw step stays clear of the
    /// degenerate set; used as the crossing-time estimate.
    fn bisect_crossing(&mut self, y: &[Complex64], t: f64, h: f64, q_sign: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            self.fsal_valid = false;
            let ok = match self.control.method {
                Method::Adaptive45 => self.dopri_raw(t, y, mid * h, q_sign).is_ok(),
                _ => self.fixed_raw(t, y, mid * h, q_sign).is_ok(),
            } && self.q_ok(self.q_at(t + mid * h, &self.yout), q_sign);
            if ok {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.fsal_valid = false;
        t + 0.5 * (lo + hi) * h
    }

    fn degenerate(&mut self, y: &[Complex64], t: f64, h: f64, q_sign: f64, q: f64) -> StepError {
        let crossing = self.bisect_crossing(y, t, h, q_sign);
        StepError::Dynamics(DynamicsError::Degenerate {
            t,
            q,
            crossing: Some(crossing),
        })
    }

    /// Distinguishes a stall caused by `q -> 0` (the acceleration grows like
    /// `1/q^2`, so the step size collapses before any stage sees `q` change
    /// sign) from ordinary stiffness. Returns `q` and the linearly
    /// extrapolated zero time when `q` is heading to zero within
    /// `SINGULAR_HORIZON * max(1, |t|)`.
    fn imminent_zero(&self, y: &[Complex64], t: f64) -> Option<(f64, f64)> {
        let n = self.n;
        let eps = 1e-7 * (1.0 + t.abs());
        let shifted = |sign: f64| -> Vec<Complex64> { (0..n).map(|i| y[i] + y[n + i] * (sign * eps)).collect() };
        let q = self.system.q(t, &y[..n]);
        // central difference; exact for q quadratic in w or affine in t
        let dq = (self.system.q(t + eps, &shifted(1.0)) - self.system.q(t - eps, &shifted(-1.0))) / (2.0 * eps);
        let tau = -q / dq;
        (tau > 0.0 && tau <= SINGULAR_HORIZON * t.abs().max(1.0)).then_some((q, t + tau))
    }

    fn check_start(&self, y: &[Complex64], t: f64) -> Result<f64, StepError> {
        let q = self.q_at(t, y);
        if self.system.is_degenerate(q) || !q.is_finite() {
            return Err(DynamicsError::Degenerate {
                t,
                q,
                crossing: Some(t),
            }
            .into());
        }
        Ok(q.signum())
    }

    /// Fixed step of signed size `h`; result written back into `y`.
    pub fn fixed_step(&mut self, y: &mut [Complex64], t: f64, h: f64) -> Result<(), StepError> {
        let q_sign = self.check_start(y, t)?;
        match self.fixed_raw(t, y, h, q_sign) {
            Ok(()) => {}
            Err(StageFailure::Degenerate { q }) => {
                let snapshot = y.to_vec();
                return Err(self.degenerate(&snapshot, t, h, q_sign, q));
            }
            Err(StageFailure::NonFinite) => return Err(DynamicsError::NonFinite { t: t + h }.into()),
        }
        if self.yout.iter().any(|z| !z.is_finite()) {
            return Err(DynamicsError::NonFinite { t: t + h }.into());
        }
        let q_end = self.q_at(t + h, &self.yout);
        if !self.q_ok(q_end, q_sign) {
            let snapshot = y.to_vec();
            return Err(self.degenerate(&snapshot, t, h, q_sign, q_end));
        }
        y.copy_from_slice(&self.yout);
        self.stats.accepted += 1;
        Ok(())
    }

    /// One accepted adaptive step of at most `h_cap` (> 0). Returns the step
    /// actually taken.
    pub fn adaptive_step(&mut self, y: &mut [Complex64], t: f64, h_cap: f64) -> Result<f64, StepError> {
        let q_sign = self.check_start(y, t)?;
        let mut h = self.h_next.min(h_cap).min(self.control.h_max);
        let mut last_degenerate: Option<(f64, f64)> = None;
        let mut rejected_once = false;
        loop {
            if h < self.control.h_min {
                let snapshot = y.to_vec();
                return Err(match last_degenerate {
                    Some((hq, q)) => self.degenerate(&snapshot, t, hq, q_sign, q),
                    None => match self.imminent_zero(&snapshot, t) {
                        Some((q, t_zero)) => DynamicsError::Degenerate {
                            t,
                            q,
                            crossing: Some(t_zero),
                        }
                        .into(),
                        None => StepError::StepUnderflow { t, h },
                    },
                });
            }
            let reason = match self.dopri_raw(t, y, h, q_sign) {
                Ok(err) if err <= 1.0 => {
                    let fac = (SAFETY * err.max(1e-10).powf(-PI_ALPHA) * self.err_prev.powf(PI_BETA))
                        .clamp(FAC_MIN, if rejected_once { 1.0 } else { FAC_MAX });
                    // a step clipped to land on a sample time keeps the
                    // controller's preferred size
                    if !(h == h_cap && h < self.h_next) {
                        self.h_next = (h * fac).min(self.control.h_max);
                    }
                    self.err_prev = err.max(1e-4);
                    y.copy_from_slice(&self.yout);
                    // FSAL: k7 becomes k1 of the next step
                    self.k.swap(0, 6);
                    self.stats.accepted += 1;
                    return Ok(h);
                }
                Ok(err) => RejectReason::ErrorEstimate(err),
                Err(StageFailure::Degenerate { q }) => {
                    last_degenerate = Some((h, q));
                    RejectReason::DegenerateStage
                }
                Err(StageFailure::NonFinite) => RejectReason::NonFinite,
            };
            self.events.push(TrajectoryEvent::StepRejected { t, h, reason });
            self.stats.rejected += 1;
            rejected_once = true;
            h *= match reason {
                RejectReason::ErrorEstimate(err) => (SAFETY * err.powf(-PI_ALPHA)).clamp(FAC_MIN, 1.0),
                _ => 0.25,
            };
            self.h_next = h;
        }
    }

    fn take_events(&mut self) -> Vec<TrajectoryEvent> {
        std::mem::take(&mut self.events)
    }
}

fn pack(state: &SpectralState) -> Vec<Complex64> {
    let mut y = Vec::with_capacity(2 * state.len());
    y.extend_from_slice(&state.w);
    y.extend_from_slice(&state.v);
    y
}

fn unpack(y: &[Complex64], t: f64) -> SpectralState {
    let n = y.len() / 2;
    SpectralState {
        t,
        w: y[..n].to_vec(),
        v: y[n..].to_vec(),
    }
}

/// Advances `state` by one step. Fixed-step methods advance by exactly
/// `control.h`; the adaptive method starts from `control.h` and shrinks it
/// until the error estimate is accepted.
pub fn step(
    state: &SpectralState,
    lattice: &ModeLattice,
    params: &Params,
    control: &StepControl,
) -> Result<SpectralState, StepError> {
    control.validate()?;
    step_signed(state, lattice, params, control, control.h)
}

/// Like [`step`] but with an explicit signed step, so fixed-step schemes can
/// be run backwards in time.
pub fn step_signed(
    state: &SpectralState,
    lattice: &ModeLattice,
    params: &Params,
    control: &StepControl,
    h: f64,
) -> Result<SpectralState, StepError> {
    state.check_len(lattice)?;
    let system = KirchhoffSystem {
        lattice,
        params: *params,
    };
    let mut stepper = Stepper::new(system, *control);
    let mut y = pack(state);
    match control.method {
        Method::Rk4 | Method::Verlet => {
            stepper.fixed_step(&mut y, state.t, h)?;
            Ok(unpack(&y, state.t + h))
        }
        Method::Adaptive45 => {
            if h <= 0.0 {
                return Err(StepError::InvalidControl(
                    "adaptive steps must move forward in time".into(),
                ));
            }
            let taken = stepper.adaptive_step(&mut y, state.t, h)?;
            Ok(unpack(&y, state.t + taken))
        }
    }
}

/// Sample times `t0 + k * every` strictly before `t_end`, then `t_end`.
fn sample_times(t0: f64, t_end: f64, every: f64) -> Vec<f64> {
    let eps = 1e-12 * t_end.abs().max(1.0);
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let t = t0 + k as f64 * every;
        if t >= t_end - eps {
            break;
        }
        out.push(t);
        k += 1;
    }
    if t_end > t0 {
        out.push(t_end);
    }
    out
}

/// Integrates from `state.t` to `t_end`, recording samples at multiples of
/// `sample_every` and at `t_end`. A vanishing `q` ends the run early with a
/// [`TrajectoryEvent::QCrossing`]; the samples up to that point are kept.
pub fn integrate(
    state: &SpectralState,
    lattice: &ModeLattice,
    params: &Params,
    control: &StepControl,
    t_end: f64,
    sample_every: f64,
) -> Result<Trajectory, StepError> {
    state.check_len(lattice)?;
    let system = KirchhoffSystem {
        lattice,
        params: *params,
    };
    integrate_system(system, state, control, t_end, sample_every)
}

/// [`integrate`] for any [`SecondOrderSystem`].
pub fn integrate_system<S: SecondOrderSystem>(
    system: S,
    state: &SpectralState,
    control: &StepControl,
    t_end: f64,
    sample_every: f64,
) -> Result<Trajectory, StepError> {
    control.validate()?;
    if state.len() != system.len() {
        return Err(DynamicsError::LengthMismatch {
            expected: system.len(),
            found: state.len(),
        }
        .into());
    }
    if !(t_end >= state.t) {
        return Err(StepError::InvalidControl(format!(
            "t_end = {t_end} precedes start time {}",
            state.t
        )));
    }
    if !(sample_every > 0.0 && sample_every.is_finite()) {
        return Err(StepError::InvalidControl("sample_every must be positive".into()));
    }
    if !state.is_finite() {
        return Err(DynamicsError::NonFinite { t: state.t }.into());
    }

    let mut stepper = Stepper::new(system, *control);
    let mut y = pack(state);
    let mut t = state.t;
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![state.clone()],
        events: Vec::new(),
        termination: Termination::Completed,
        stats: StepStats::default(),
    };

    let result = (|| -> Result<(), StepError> {
        for target in sample_times(state.t, t_end, sample_every) {
            match control.method {
                Method::Rk4 | Method::Verlet => {
                    let span = target - t;
                    let n = ((span / control.h) - 1e-9).ceil().max(1.0) as u64;
                    let h = span / n as f64;
                    for i in 0..n {
                        stepper.fixed_step(&mut y, t + i as f64 * h, h)?;
                    }
                }
                Method::Adaptive45 => {
                    let tol = 1e-13 * target.abs().max(1.0);
                    let mut tc = t;
                    while target - tc > tol {
                        let taken = stepper.adaptive_step(&mut y, tc, target - tc)?;
                        tc = if target - (tc + taken) <= tol {
                            target
                        } else {
                            tc + taken
                        };
                    }
                }
            }
            t = target;
            traj.times.push(t);
            traj.states.push(unpack(&y, t));
        }
        Ok(())
    })();

    traj.events.extend(stepper.take_events());
    traj.stats = stepper.stats;
    match result {
        Ok(()) => Ok(traj),
        Err(StepError::Dynamics(DynamicsError::Degenerate { t: te, q, crossing })) => {
            traj.events.push(TrajectoryEvent::QCrossing {
                t: crossing.unwrap_or(te),
                q,
            });
            traj.termination = Termination::QCrossing;
            Ok(traj)
        }
        Err(e) => Err(e),
    }
}
