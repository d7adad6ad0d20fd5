//! Spectral form of the Kirchhoff-Pokhozhaev equation.
//!
//! Each mode obeys `w_tt = -|xi|^2 w / q^2` where the single shared
//! coefficient `q = a * s + b` couples all modes through the gradient norm
//! `s = sum_k mu_k |xi_k|^2 |w_k|^2`.

use num_complex::Complex64;

use crate::error::DynamicsError;
use crate::lattice::ModeLattice;

/// Equation coefficients `a`, `b` plus the guard used to decide that `q`
/// has vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub q_tol: f64,
}

impl Params {
    pub fn new(a: f64, b: f64) -> Result<Self, DynamicsError> {
        if a == 0.0 && b == 0.0 {
            return Err(DynamicsError::TrivialParams);
        }
        Ok(Self {
            a,
            b,
            q_tol: Self::default_q_tol(b),
        })
    }

    pub fn with_q_tol(mut self, q_tol: f64) -> Self {
        self.q_tol = q_tol;
        self
    }

    /// `1e-12 * max(1, |b|)`.
    pub fn default_q_tol(b: f64) -> f64 {
        1e-12 * b.abs().max(1.0)
    }

    pub fn q_of(&self, s: f64) -> f64 {
        self.a * s + self.b
    }

    pub fn is_degenerate(&self, q: f64) -> bool {
        !(q.abs() > self.q_tol)
    }

    /// The equation is unchanged under `(a, b) -> (-a, -b)`.
    pub fn flipped(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            q_tol: self.q_tol,
        }
    }
}

/// Fourier coefficients of `u` and `u_t` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub w: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl SpectralState {
    pub fn new(t: f64, w: Vec<Complex64>, v: Vec<Complex64>) -> Result<Self, DynamicsError> {
        if w.len() != v.len() {
            return Err(DynamicsError::LengthMismatch {
                expected: w.len(),
                found: v.len(),
            });
        }
        let state = Self { t, w, v };
        if !state.is_finite() {
            return Err(DynamicsError::NonFinite { t });
        }
        Ok(state)
    }

    pub fn zeros(len: usize, t: f64) -> Self {
        Self {
            t,
            w: vec![Complex64::new(0.0, 0.0); len],
            v: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.w.iter().chain(&self.v).all(|z| z.is_finite())
    }

    /// Largest component-wise deviation over real and imaginary parts of
    /// both `w` and `v`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .chain(self.v.iter().zip(&other.v))
            .map(|(x, y)| (x.re - y.re).abs().max((x.im - y.im).abs()))
            .fold(0.0, f64::max)
    }

    /// Multiplies both `w` and `v` by a real factor.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            t: self.t,
            w: self.w.iter().map(|z| z * c).collect(),
            v: self.v.iter().map(|z| z * c).collect(),
        }
    }

    pub(crate) fn check_len(&self, lattice: &ModeLattice) -> Result<(), DynamicsError> {
        if self.w.len() != lattice.len() || self.v.len() != lattice.len() {
            return Err(DynamicsError::LengthMismatch {
                expected: lattice.len(),
                found: self.w.len().min(self.v.len()),
            });
        }
        Ok(())
    }
}

/// Time derivative of a [`SpectralState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub dw: Vec<Complex64>,
    pub dv: Vec<Complex64>,
}

/// Every scalar reduction of a state used by the functionals.
///
/// `norm_w[m] = sum mu |xi|^(2m) |w|^2` and likewise for `norm_v`;
/// `cross4 = sum mu |xi|^4 Re(conj(w) v)`. The second derivatives `s2` and
/// `q2` use the equation to eliminate `w_tt`, so they depend on the
/// instantaneous state only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMoments {
    pub t: f64,
    pub s: f64,
    pub s1: f64,
    pub s2: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub lambda: f64,
    pub norm_w: [f64; 4],
    pub norm_v: [f64; 3],
    pub cross4: f64,
}

impl SpectralMoments {
    /// `q ||grad u_t||^2 + ||Lap u||^2 / q`.
    pub fn d2(&self) -> f64 {
        self.q * self.norm_v[1] + self.norm_w[2] / self.q
    }

    /// `q ||Lap u_t||^2 + ||grad Lap u||^2 / q`.
    pub fn d3(&self) -> f64 {
        self.q * self.norm_v[2] + self.norm_w[3] / self.q
    }
}

/// Raw weighted sums, before `q` enters.
#[derive(Debug, Clone, Copy, Default)]
struct RawSums {
    norm_w: [f64; 4],
    norm_v: [f64; 3],
    cross2: f64,
    cross4: f64,
}

fn raw_sums(state: &SpectralState, lattice: &ModeLattice) -> RawSums {
    let mut r = RawSums::default();
    for ((k2, mu), (w, v)) in lattice
        .xi_sq()
        .iter()
        .zip(lattice.weights())
        .zip(state.w.iter().zip(&state.v))
    {
        let (k2, mu) = (*k2, *mu);
        let w2 = w.norm_sqr();
        let v2 = v.norm_sqr();
        let re = w.re * v.re + w.im * v.im;
        let k4 = k2 * k2;
        r.norm_w[0] += mu * w2;
        r.norm_w[1] += mu * k2 * w2;
        r.norm_w[2] += mu * k4 * w2;
        r.norm_w[3] += mu * k4 * k2 * w2;
        r.norm_v[0] += mu * v2;
        r.norm_v[1] += mu * k2 * v2;
        r.norm_v[2] += mu * k4 * v2;
        r.cross2 += mu * k2 * re;
        r.cross4 += mu * k4 * re;
    }
    r
}

/// `s = ||grad u||^2` for the positions `w`.
pub fn gradient_norm_sq(w: &[Complex64], lattice: &ModeLattice) -> f64 {
    lattice
        .xi_sq()
        .iter()
        .zip(lattice.weights())
        .zip(w)
        .fold(0.0, |acc, ((k2, mu), z)| acc + mu * k2 * z.norm_sqr())
}

pub fn compute_moments(
    state: &SpectralState,
    lattice: &ModeLattice,
    params: &Params,
) -> Result<SpectralMoments, DynamicsError> {
    state.check_len(lattice)?;
    if !state.is_finite() {
        return Err(DynamicsError::NonFinite { t: state.t });
    }
    let r = raw_sums(state, lattice);
    let s = r.norm_w[1];
    let q = params.q_of(s);
    if params.is_degenerate(q) {
        return Err(DynamicsError::Degenerate {
            t: state.t,
            q,
            crossing: None,
        });
    }
    let s1 = 2.0 * r.cross2;
    let s2 = 2.0 * r.norm_v[1] - 2.0 * r.norm_w[2] / (q * q);
    Ok(SpectralMoments {
        t: state.t,
        s,
        s1,
        s2,
        q,
        q1: params.a * s1,
        q2: params.a * s2,
        lambda: q * r.norm_v[0] + r.norm_w[1] / q,
        norm_w: r.norm_w,
        norm_v: r.norm_v,
        cross4: r.cross4,
    })
}

/// Writes `dv/dt = -|xi|^2 w / q^2` into `out` and returns `q`.
pub(crate) fn acceleration_into(
    w: &[Complex64],
    lattice: &ModeLattice,
    params: &Params,
    t: f64,
    out: &mut [Complex64],
) -> Result<f64, DynamicsError> {
    let q = params.q_of(gradient_norm_sq(w, lattice));
    if params.is_degenerate(q) || !q.is_finite() {
        return Err(DynamicsError::Degenerate { t, q, crossing: None });
    }
    let inv_q2 = 1.0 / (q * q);
    for ((o, z), k2) in out.iter_mut().zip(w).zip(lattice.xi_sq()) {
        *o = z * (-k2 * inv_q2);
    }
    Ok(q)
}

pub fn rhs(state: &SpectralState, lattice: &ModeLattice, params: &Params) -> Result<StateDerivative, DynamicsError> {
    state.check_len(lattice)?;
    let mut dv = vec![Complex64::new(0.0, 0.0); state.len()];
    acceleration_into(&state.w, lattice, params, state.t, &mut dv)?;
    Ok(StateDerivative {
        dw: state.v.clone(),
        dv,
    })
}

/// `q` evaluated without the degeneracy guard.
pub fn q_value(state: &SpectralState, lattice: &ModeLattice, params: &Params) -> f64 {
    params.q_of(gradient_norm_sq(&state.w, lattice))
}

/// Detects `q` vanishing or changing sign between two states on the same
/// lattice. Returns a crossing time found by bisection on the cubic Hermite
/// interpolant of `w` (using `v` as the endpoint slopes).
pub fn q_sign_event(
    before: &SpectralState,
    after: &SpectralState,
    lattice: &ModeLattice,
    params: &Params,
) -> Option<f64> {
    let q0 = q_value(before, lattice, params);
    let q1 = q_value(after, lattice, params);
    let small0 = params.is_degenerate(q0);
    let small1 = params.is_degenerate(q1);
    let flipped = q0.is_finite() && q1.is_finite() && q0.signum() != q1.signum();
    if !(small0 || small1 || flipped || !q1.is_finite()) {
        return None;
    }
    if small0 {
        return Some(before.t);
    }
    let dt = after.t - before.t;
    let q_at = |theta: f64| -> f64 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let s = lattice
            .xi_sq()
            .iter()
            .zip(lattice.weights())
            .enumerate()
            .fold(0.0, |acc, (k, (k2, mu))| {
                let z = before.w[k] * h00 + before.v[k] * (h10 * dt) + after.w[k] * h01 + after.v[k] * (h11 * dt);
                acc + mu * k2 * z.norm_sqr()
            });
        params.q_of(s)
    };
    let sign0 = q0.signum();
    let end = q_at(1.0);
    if !(end.is_finite() && end.signum() != sign0) {
        // no bracket on the interpolant; report the end where q is small
        return Some(after.t);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let qm = q_at(mid);
        if qm.signum() == sign0 && !params.is_degenerate(qm) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(before.t + 0.5 * (lo + hi) * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_custom_lattice, make_torus_lattice};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_mode() -> ModeLattice {
        make_custom_lattice(1, vec![(vec![1.0], 1.0)]).unwrap()
    }

    fn single(w: Complex64, v: Complex64) -> SpectralState {
        SpectralState::new(0.0, vec![w], vec![v]).unwrap()
    }

    #[test]
    fn zero_state_moments() {
        let lat = make_torus_lattice(1, 2).unwrap();
        let p = Params::new(1.0, 1.0).unwrap();
        let m = compute_moments(&SpectralState::zeros(lat.len(), 0.0), &lat, &p).unwrap();
        assert_eq!((m.s, m.q, m.s1, m.s2, m.lambda), (0.0, 1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn single_mode_at_rest() {
        let p = Params::new(1.0, 1.0).unwrap();
        let m = compute_moments(&single(c(1.0, 0.0), c(0.0, 0.0)), &unit_mode(), &p).unwrap();
        assert_eq!(m.s, 1.0);
        assert_eq!(m.q, 2.0);
        assert_eq!(m.s1, 0.0);
        assert_eq!(m.s2, -0.5);
        assert_eq!(m.lambda, 0.5);
        assert_eq!(m.q2, -0.5);
    }

    #[test]
    fn single_mode_imaginary_velocity() {
        let p = Params::new(1.0, 1.0).unwrap();
        let m = compute_moments(&single(c(1.0, 0.0), c(0.0, 1.0)), &unit_mode(), &p).unwrap();
        assert_eq!(m.s1, 0.0);
        assert_eq!(m.cross4, 0.0);
        assert_eq!(m.norm_v[1], 1.0);
    }

    #[test]
    fn degenerate_q_is_rejected() {
        let p = Params::new(1.0, 0.0).unwrap();
        let lat = unit_mode();
        let err = compute_moments(&SpectralState::zeros(1, 2.5), &lat, &p).unwrap_err();
        assert_eq!(
            err,
            DynamicsError::Degenerate {
                t: 2.5,
                q: 0.0,
                crossing: None
            }
        );
        assert!(rhs(&SpectralState::zeros(1, 0.0), &lat, &p).is_err());
    }

    #[test]
    fn trivial_params_rejected() {
        assert_eq!(Params::new(0.0, 0.0), Err(DynamicsError::TrivialParams));
        assert_eq!(Params::new(0.0, 3.0).unwrap().q_tol, 3e-12);
        assert_eq!(Params::new(1.0, 0.5).unwrap().q_tol, 1e-12);
    }

    #[test]
    fn non_finite_state_rejected() {
        assert!(SpectralState::new(0.0, vec![c(f64::NAN, 0.0)], vec![c(0.0, 0.0)]).is_err());
        assert!(SpectralState::new(0.0, vec![c(0.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn rhs_examples() {
        let lat = make_torus_lattice(1, 2).unwrap();
        let p = Params::new(1.0, 1.0).unwrap();
        let d = rhs(&SpectralState::zeros(lat.len(), 0.0), &lat, &p).unwrap();
        assert!(d.dv.iter().chain(&d.dw).all(|z| *z == c(0.0, 0.0)));

        let two = make_custom_lattice(1, vec![(vec![2.0], 1.0)]).unwrap();
        let linear = Params::new(0.0, 1.0).unwrap();
        let d = rhs(&single(c(1.0, 0.0), c(0.0, 0.0)), &two, &linear).unwrap();
        assert_eq!(d.dv[0], c(-4.0, 0.0));

        let d = rhs(&single(c(1.0, 0.0), c(0.0, 0.0)), &unit_mode(), &p).unwrap();
        assert_eq!(d.dv[0], c(-0.25, 0.0));
    }

    #[test]
    fn zero_frequency_mode_drifts_freely() {
        let lat = make_torus_lattice(1, 1).unwrap();
        let p = Params::new(1.0, 1.0).unwrap();
        let state = SpectralState::new(
            0.0,
            vec![c(0.1, 0.0), c(5.0, 1.0), c(0.2, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let d = rhs(&state, &lat, &p).unwrap();
        assert_eq!(d.dv[1], c(0.0, 0.0));
        let m = compute_moments(&state, &lat, &p).unwrap();
        assert_eq!(m.norm_v[0], 1.0);
        assert!((m.s - 0.05).abs() < 1e-15);
    }

    #[test]
    fn scaling_keeps_q() {
        let lat = make_torus_lattice(1, 2).unwrap();
        let state = SpectralState::new(
            0.0,
            vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, 0.0), c(-0.2, 0.1), c(0.05, 0.0)],
            vec![c(0.0, 0.1), c(0.1, 0.0), c(0.0, 0.0), c(0.0, -0.3), c(0.2, 0.0)],
        )
        .unwrap();
        let p = Params::new(0.7, 1.3).unwrap();
        let cscale = 2.5;
        let scaled_p = Params::new(p.a / (cscale * cscale), p.b).unwrap();
        let m0 = compute_moments(&state, &lat, &p).unwrap();
        let m1 = compute_moments(&state.scaled(cscale), &lat, &scaled_p).unwrap();
        assert!((m0.q - m1.q).abs() < 1e-14);
        let d0 = rhs(&state, &lat, &p).unwrap();
        let d1 = rhs(&state.scaled(cscale), &lat, &scaled_p).unwrap();
        for (x, y) in d0.dv.iter().zip(&d1.dv) {
            assert!((x * cscale - y).norm() < 1e-14);
        }
    }

    #[test]
    fn q_sign_event_cases() {
        let lat = unit_mode();
        let p = Params::new(-1.0, 1.0).unwrap();
        // q = 1 - |w|^2
        let at = |t: f64, w: f64, v: f64| SpectralState::new(t, vec![c(w, 0.0)], vec![c(v, 0.0)]).unwrap();
        let none = q_sign_event(&at(0.0, 0.0, 0.0), &at(0.1, 0.1f64.sqrt(), 0.0), &lat, &p);
        assert_eq!(none, None); // q: 1.0 -> 0.9

        // q: 0.2 -> -0.1 with w moving linearly 0.8^.5 -> 1.1^.5
        let w0 = 0.8f64.sqrt();
        let w1 = 1.1f64.sqrt();
        let slope = (w1 - w0) / 0.5;
        let hit = q_sign_event(&at(1.0, w0, slope), &at(1.5, w1, slope), &lat, &p).unwrap();
        assert!(hit > 1.0 && hit < 1.5);
        // linear interpolant: |w| = 1 at t = 1 + (1 - w0)/slope
        let exact = 1.0 + (1.0 - w0) / slope;
        assert!((hit - exact).abs() < 1e-10);
    }
}
