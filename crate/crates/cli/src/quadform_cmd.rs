//! `verify-quadform`: coefficient residuals and the sampled derivative
//! identity over a battery of prescribed profiles.

use kirchhoff_core::quadform::{alpha1_rate_residual, residuals_s1_s2, verify_der27, Der27Options};
use kirchhoff_core::{AnalyticProfile, Complex64, InvariantParams};
use serde::{Deserialize, Serialize};

use crate::output::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    Affine {
        offset: f64,
        slope: f64,
    },
    /// Ascending powers of `t`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Trig {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ProfileKind,
    pub span: [f64; 2],
}

impl ProfileSpec {
    pub fn profile(&self) -> AnalyticProfile {
        match &self.kind {
            ProfileKind::Constant { value } => AnalyticProfile::Constant(*value),
            ProfileKind::Affine { offset, slope } => AnalyticProfile::Affine {
                offset: *offset,
                slope: *slope,
            },
            ProfileKind::Polynomial { coeffs } => AnalyticProfile::Polynomial(coeffs.clone()),
            ProfileKind::Trig {
                offset,
                amplitude,
                frequency,
                phase,
            } => AnalyticProfile::TrigPlusConstant {
                offset: *offset,
                amplitude: *amplitude,
                frequency: *frequency,
                phase: *phase,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadformConfig {
    pub profiles: Vec<ProfileSpec>,
    pub xi: Vec<f64>,
    /// `[C0, C1]` pairs.
    pub invariants: Vec<[f64; 2]>,
    /// Sample times per profile for the coefficient residuals.
    pub residual_samples: usize,
    pub delta: f64,
    pub coefficient_tol: f64,
    pub identity_tol: f64,
}

/// `q = c`, `q = t + 2`, `q = 2 + sin t` and `q = 1 + t^2/10` on `[0, 5]`.
pub fn standard_profiles() -> Vec<ProfileSpec> {
    let span = [0.0, 5.0];
    vec![
        ProfileSpec {
            name: "constant".into(),
            kind: ProfileKind::Constant { value: 1.5 },
            span,
        },
        ProfileSpec {
            name: "affine".into(),
            kind: ProfileKind::Affine {
                offset: 2.0,
                slope: 1.0,
            },
            span,
        },
        ProfileSpec {
            name: "trig".into(),
            kind: ProfileKind::Trig {
                offset: 2.0,
                amplitude: 1.0,
                frequency: 1.0,
                phase: 0.0,
            },
            span,
        },
        ProfileSpec {
            name: "quadratic".into(),
            kind: ProfileKind::Polynomial {
                coeffs: vec![1.0, 0.0, 0.1],
            },
            span,
        },
    ]
}

impl Default for QuadformConfig {
    fn default() -> Self {
        Self {
            profiles: standard_profiles(),
            xi: vec![1.0, 2.0, 5.0],
            invariants: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-2.0, 3.0]],
            residual_samples: 100,
            delta: 1e-3,
            coefficient_tol: 1e-12,
            identity_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadformRow {
    pub profile: String,
    pub xi: f64,
    pub c0: f64,
    pub c1: f64,
    /// `(first system, second system, alpha1 rate, rate identity)` maxima,
    /// or the reason the row could not be evaluated.
    pub outcome: Result<[f64; 4], String>,
}

impl QuadformRow {
    pub fn passed(&self, cfg: &QuadformConfig) -> Option<bool> {
        self.outcome.as_ref().ok().map(|r| {
            r[0] <= cfg.coefficient_tol
                && r[1] <= cfg.coefficient_tol
                && r[2] <= cfg.coefficient_tol
                && r[3] <= cfg.identity_tol
        })
    }
}

/// Largest residuals of both coefficient systems and of the `alpha1` rate
/// identity over `samples` equispaced times.
pub fn coefficient_residuals(
    profile: &AnalyticProfile,
    span: [f64; 2],
    inv: &InvariantParams,
    samples: usize,
) -> [f64; 3] {
    let mut worst = [0.0f64; 3];
    for i in 0..samples {
        let t = span[0] + (span[1] - span[0]) * i as f64 / (samples.max(2) - 1) as f64;
        let (s1, s2) = residuals_s1_s2(profile, t, inv);
        let s1_max = s1.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let s2_max = s2.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        worst[0] = worst[0].max(s1_max);
        worst[1] = worst[1].max(s2_max);
        worst[2] = worst[2].max(alpha1_rate_residual(profile, t, inv));
    }
    worst
}

pub fn verify_quadform_cmd(cfg: &QuadformConfig) -> Vec<QuadformRow> {
    let mut rows = Vec::new();
    let opts = Der27Options {
        delta: cfg.delta,
        ..Default::default()
    };
    for spec in &cfg.profiles {
        let profile = spec.profile();
        let valid = profile.validate_on(spec.span[0], spec.span[1]);
        for &xi in &cfg.xi {
            for &[c0, c1] in &cfg.invariants {
                let inv = InvariantParams::new(c0, c1);
                let outcome = match &valid {
                    Err(e) => Err(e.to_string()),
                    Ok(()) => {
                        let [r1, r2, r3] = coefficient_residuals(&profile, spec.span, &inv, cfg.residual_samples);
                        let unit = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                        verify_der27(&profile, xi, unit, (spec.span[0], spec.span[1]), &inv, &opts)
                            .map(|r| [r1, r2, r3, r.max_residual])
                            .map_err(|e| e.to_string())
                    }
                };
                rows.push(QuadformRow {
                    profile: spec.name.clone(),
                    xi,
                    c0,
                    c1,
                    outcome,
                });
            }
        }
    }
    rows
}

pub const QUADFORM_HEADER: &str =
    "profile,xi,c0,c1,s1_residual,s2_residual,alpha1_rate_residual,identity_residual,status,error";

pub fn render_quadform(rows: &[QuadformRow], cfg: &QuadformConfig) -> String {
    let mut out = String::from(QUADFORM_HEADER);
    out.push('\n');
    for r in rows {
        let head = format!("{},{},{},{}", r.profile, fmt_f64(r.xi), fmt_f64(r.c0), fmt_f64(r.c1));
        match &r.outcome {
            Ok(v) => {
                let status = if r.passed(cfg) == Some(true) { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "{head},{},{},{},{},{status},\n",
                    fmt_f64(v[0]),
                    fmt_f64(v[1]),
                    fmt_f64(v[2]),
                    fmt_f64(v[3])
                ));
            }
            Err(e) => out.push_str(&format!("{head},,,,,ERROR,\"{}\"\n", e.replace('"', "'"))),
        }
    }
    out
}
