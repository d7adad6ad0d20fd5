//! Experiment and sweep configuration.
//!
//! Configurations are JSON. Every field has a default, so `{}` is a valid
//! experiment. Command-line overrides are applied as dotted-path assignments
//! on the parsed document before it is deserialized, which gives the
//! precedence flags > file > defaults.

use std::path::Path;

use kirchhoff_core::{
    make_custom_lattice, make_torus_lattice, InvariantParams, LatticeError, Method, ModeLattice, Params, StepControl,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ConfigError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeSpec {
    /// All integer frequencies in `[-max_index, max_index]^dim`.
    Torus {
        dim: usize,
        max_index: u32,
    },
    Custom {
        dim: usize,
        modes: Vec<ModeSpec>,
    },
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec::Torus { dim: 1, max_index: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub xi: Vec<f64>,
    #[serde(default = "one")]
    pub weight: f64,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<ModeLattice, LatticeError> {
        match self {
            LatticeSpec::Torus { dim, max_index } => make_torus_lattice(*dim, *max_index),
            LatticeSpec::Custom { dim, modes } => {
                make_custom_lattice(*dim, modes.iter().map(|m| (m.xi.clone(), m.weight)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSpec {
    pub a: f64,
    pub b: f64,
    /// Defaults to `1e-12 * max(1, |b|)`.
    pub q_tol: Option<f64>,
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 1.0,
            q_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// One excited mode with real displacement and velocity.
    SingleMode {
        mode: Vec<f64>,
        amplitude: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// `w = amplitude * exp(-|xi|^2 / (2 width^2))`, `v = 0`.
    GaussianDecay {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// Seeded random data rescaled so that `I1` equals `target_i1`.
    RandomSmall { target_i1: f64 },
    /// Explicit `[re, im]` pairs in lattice order.
    Modes { w: Vec<[f64; 2]>, v: Vec<[f64; 2]> },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::SingleMode {
            mode: vec![1.0],
            amplitude: 0.3,
            velocity: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    Rk4,
    Verlet,
    Adaptive45,
}

impl From<MethodSpec> for Method {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Rk4 => Method::Rk4,
            MethodSpec::Verlet => Method::Verlet,
            MethodSpec::Adaptive45 => Method::Adaptive45,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSpec {
    pub method: MethodSpec,
    /// Fixed step size, or the initial step of the adaptive method.
    pub h: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub t_end: f64,
    pub sample_every: f64,
}

impl Default for ControlSpec {
    fn default() -> Self {
        Self {
            method: MethodSpec::Adaptive45,
            h: 1e-3,
            rtol: 1e-10,
            atol: 1e-12,
            h_min: None,
            h_max: None,
            t_end: 10.0,
            sample_every: 0.1,
        }
    }
}

impl ControlSpec {
    pub fn step_control(&self) -> StepControl {
        let mut c = match self.method {
            MethodSpec::Adaptive45 => {
                let mut c = StepControl::adaptive(self.rtol, self.atol);
                c.h = self.h;
                c
            }
            m => StepControl::fixed(m.into(), self.h),
        };
        if let Some(h_min) = self.h_min {
            c.h_min = h_min;
        }
        if let Some(h_max) = self.h_max {
            c.h_max = h_max;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantSpec {
    pub c0: f64,
    pub c1: f64,
}

impl Default for InvariantSpec {
    fn default() -> Self {
        Self { c0: 1.0, c1: 0.0 }
    }
}

impl From<&InvariantSpec> for InvariantParams {
    fn from(s: &InvariantSpec) -> Self {
        InvariantParams::new(s.c0, s.c1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Drift,
    Lemma1,
    Sandwich2,
    Sandwich3,
    Theorem4,
    AuditQ,
    CaseBounds,
}

impl Check {
    pub const DEFAULT: [Check; 6] = [
        Check::Drift,
        Check::Lemma1,
        Check::Sandwich2,
        Check::Sandwich3,
        Check::Theorem4,
        Check::AuditQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Drift => "drift",
            Check::Lemma1 => "lemma1",
            Check::Sandwich2 => "sandwich2",
            Check::Sandwich3 => "sandwich3",
            Check::Theorem4 => "theorem4",
            Check::AuditQ => "audit_q",
            Check::CaseBounds => "case_bounds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub params: ParamsSpec,
    pub initial: InitialSpec,
    pub control: ControlSpec,
    pub invariant: InvariantSpec,
    pub checks: Vec<Check>,
    /// Largest relative drift the `drift` verdict accepts.
    pub drift_tol: f64,
    /// Seed for randomized initial data.
    pub seed: u64,
    pub output: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeSpec::default(),
            params: ParamsSpec::default(),
            initial: InitialSpec::default(),
            control: ControlSpec::default(),
            invariant: InvariantSpec::default(),
            checks: Check::DEFAULT.to_vec(),
            drift_tol: 1e-6,
            seed: 0,
            output: "out".into(),
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

fn require(cond: bool, field: &str, message: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(field, message))
    }
}

impl ExperimentConfig {
    /// Fills every optional field with its effective value and checks
    /// cross-field constraints. The result is what the manifest records.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        let p = &mut self.params;
        require(p.a.is_finite() && p.b.is_finite(), "params", "a and b must be finite")?;
        require(p.a != 0.0 || p.b != 0.0, "params", "a and b must not both be zero")?;
        let q_tol = *p.q_tol.get_or_insert(Params::default_q_tol(p.b));
        require(q_tol > 0.0, "params.q_tol", "must be positive")?;

        let c = &mut self.control;
        require(
            c.t_end.is_finite() && c.t_end >= 0.0,
            "control.t_end",
            "must be finite and non-negative",
        )?;
        require(
            c.sample_every > 0.0 && c.sample_every.is_finite(),
            "control.sample_every",
            "must be positive",
        )?;
        let step = c.step_control();
        c.h_min = Some(step.h_min);
        c.h_max = Some(step.h_max);
        step.validate().map_err(|e| invalid("control", e.to_string()))?;

        require(self.drift_tol >= 0.0, "drift_tol", "must be non-negative")?;
        require(!self.output.is_empty(), "output", "must not be empty")?;
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.checks {
            require(seen.insert(*c), "checks", "contains duplicates")?;
        }

        let lattice = self.lattice.build().map_err(|e| invalid("lattice", e.to_string()))?;
        match &self.initial {
            InitialSpec::SingleMode {
                mode,
                amplitude,
                velocity,
            } => {
                require(
                    lattice.find(mode).is_some(),
                    "initial.mode",
                    "frequency is not in the lattice",
                )?;
                require(
                    amplitude.is_finite() && velocity.is_finite(),
                    "initial",
                    "values must be finite",
                )?;
            }
            InitialSpec::GaussianDecay { amplitude, width } => {
                require(amplitude.is_finite(), "initial.amplitude", "must be finite")?;
                require(*width > 0.0 && width.is_finite(), "initial.width", "must be positive")?;
            }
            InitialSpec::RandomSmall { target_i1 } => {
                require(
                    *target_i1 >= 0.0 && target_i1.is_finite(),
                    "initial.target_i1",
                    "must be non-negative",
                )?;
                require(self.params.b > 0.0, "initial", "random_small requires b > 0")?;
            }
            InitialSpec::Modes { w, v } => {
                require(w.len() == lattice.len(), "initial.w", "length must match the lattice")?;
                require(v.len() == lattice.len(), "initial.v", "length must match the lattice")?;
            }
        }
        Ok(self)
    }

    pub fn params(&self) -> Params {
        let p = Params::new(self.params.a, self.params.b).expect("resolved params are non-trivial");
        match self.params.q_tol {
            Some(q_tol) => p.with_q_tol(q_tol),
            None => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub h: Vec<f64>,
    pub rtol: Vec<f64>,
}

/// One grid point; `None` leaves the base value in place.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridPoint {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub amplitude: Option<f64>,
    pub h: Option<f64>,
    pub rtol: Option<f64>,
}

impl SweepAxes {
    /// Cartesian product in lexicographic order over `a, b, amplitude, h,
    /// rtol`, the last axis varying fastest. Empty axes are not swept.
    pub fn grid(&self) -> Vec<GridPoint> {
        fn axis(values: &[f64]) -> Vec<Option<f64>> {
            if values.is_empty() {
                vec![None]
            } else {
                values.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &a in &axis(&self.a) {
            for &b in &axis(&self.b) {
                for &amplitude in &axis(&self.amplitude) {
                    for &h in &axis(&self.h) {
                        for &rtol in &axis(&self.rtol) {
                            out.push(GridPoint {
                                a,
                                b,
                                amplitude,
                                h,
                                rtol,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub axes: SweepAxes,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: ExperimentConfig::default(),
            axes: SweepAxes::default(),
            workers: 1,
        }
    }
}

impl GridPoint {
    /// The base configuration with this point's values substituted.
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = base.clone();
        if let Some(a) = self.a {
            cfg.params.a = a;
        }
        if let Some(b) = self.b {
            cfg.params.b = b;
            // the default guard follows b
            if base.params.q_tol == Some(Params::default_q_tol(base.params.b)) {
                cfg.params.q_tol = None;
            }
        }
        if let Some(amp) = self.amplitude {
            match &mut cfg.initial {
                InitialSpec::SingleMode { amplitude, .. } | InitialSpec::GaussianDecay { amplitude, .. } => {
                    *amplitude = amp
                }
                InitialSpec::RandomSmall { .. } | InitialSpec::Modes { .. } => {
                    return Err(invalid(
                        "axes.amplitude",
                        "applies only to single_mode and gaussian_decay initial data",
                    ))
                }
            }
        }
        if let Some(h) = self.h {
            // bounds derived from the base step follow the new one
            let derived = ControlSpec {
                h_min: None,
                h_max: None,
                ..base.control.clone()
            }
            .step_control();
            if base.control.h_min == Some(derived.h_min) {
                cfg.control.h_min = None;
            }
            if base.control.h_max == Some(derived.h_max) {
                cfg.control.h_max = None;
            }
            cfg.control.h = h;
        }
        if let Some(rtol) = self.rtol {
            cfg.control.rtol = rtol;
        }
        cfg.resolve()
    }
}

/// Sets `path` (dot-separated object keys) in `doc`, creating intermediate
/// objects. The value is parsed as JSON when possible and taken as a string
/// otherwise, so `--set initial.kind=random_small` needs no quoting.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override {
        assignment: assignment.into(),
        message: "expected key=value".into(),
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Override {
            assignment: assignment.into(),
            message: "empty key in path".into(),
        });
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        if !node.is_object() {
            return Err(ConfigError::Override {
                assignment: assignment.into(),
                message: format!("`{key}` is not inside an object"),
            });
        }
        node = node
            .as_object_mut()
            .expect("checked above")
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(ConfigError::Override {
            assignment: assignment.into(),
            message: "parent is not an object".into(),
        }),
    }
}

/// Parses `text` (or `{}` when absent) into `T`, applying overrides first.
/// Syntax errors carry line and column; type errors carry the field path,
/// plus line and column when no override was applied.
pub fn parse_with_overrides<T: DeserializeOwned>(text: Option<&str>, overrides: &[String]) -> Result<T, ConfigError> {
    let text = text.unwrap_or("{}");
    if overrides.is_empty() {
        let mut de = serde_json::Deserializer::from_str(text);
        let value = serde_path_to_error::deserialize(&mut de).map_err(|e| field_error(&e))?;
        de.end().map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        return Ok(value);
    }
    let mut doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_path_to_error::deserialize(doc).map_err(|e| field_error(&e))
}

fn field_error(e: &serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let inner = e.inner();
    if inner.is_syntax() || inner.is_eof() {
        return ConfigError::Syntax {
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        };
    }
    let path = e.path().to_string();
    ConfigError::Field {
        field: if path == "." { "(root)".into() } else { path },
        line: (inner.line() > 0).then(|| inner.line()),
        message: inner.to_string(),
    }
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> Result<T, ConfigError> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
            path: p.display().to_string(),
            message: e.to_string(),
        })?),
        None => None,
    };
    parse_with_overrides(text.as_deref(), overrides)
}

pub fn load_experiment(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    load::<ExperimentConfig>(path, overrides)?.resolve()
}

pub fn load_sweep(path: Option<&Path>, overrides: &[String]) -> Result<SweepConfig, ConfigError> {
    let mut sweep: SweepConfig = load(path, overrides)?;
    sweep.base = sweep.base.resolve()?;
    require(sweep.workers >= 1, "workers", "must be at least 1")?;
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg: ExperimentConfig = parse_with_overrides(Some("{}"), &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.params.q_tol, Some(1e-12));
        assert_eq!(resolved.control.h_min, Some(1e-12));
    }

    #[test]
    fn overrides_take_precedence() {
        let text = r#"{"params": {"a": 1.0}, "control": {"t_end": 2}}"#;
        let cfg: ExperimentConfig = parse_with_overrides(
            Some(text),
            &[
                "params.a=0.25".into(),
                "initial.kind=random_small".into(),
                "initial.target_i1=0.1".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.params.a, 0.25);
        assert_eq!(cfg.control.t_end, 2.0);
        assert_eq!(cfg.initial, InitialSpec::RandomSmall { target_i1: 0.1 });
    }

    #[test]
    fn type_errors_name_the_field() {
        let text = "{\n  \"control\": {\n    \"rtol\": \"tight\"\n  }\n}";
        match parse_with_overrides::<ExperimentConfig>(Some(text), &[]) {
            Err(ConfigError::Field { field, line, .. }) => {
                assert_eq!(field, "control.rtol");
                assert_eq!(line, Some(3));
            }
            other => panic!("{other:?}"),
        }
        match parse_with_overrides::<ExperimentConfig>(Some("{\"params\": {\"c\": 1}}"), &[]) {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "params.c"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_with_overrides::<ExperimentConfig>(Some("{\n  \"params\": {,}\n}"), &[]) {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolve_rejects_missing_mode() {
        let cfg = ExperimentConfig {
            initial: InitialSpec::SingleMode {
                mode: vec![9.0],
                amplitude: 0.1,
                velocity: 0.0,
            },
            ..Default::default()
        };
        match cfg.resolve() {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "initial.mode"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_small_requires_positive_b() {
        let mut cfg = ExperimentConfig::default();
        cfg.params.b = -1.0;
        cfg.initial = InitialSpec::RandomSmall { target_i1: 0.1 };
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn grid_is_lexicographic() {
        let axes = SweepAxes {
            a: vec![0.25, 0.5],
            amplitude: vec![0.1, 0.2],
            ..Default::default()
        };
        let grid = axes.grid();
        let pairs: Vec<_> = grid.iter().map(|p| (p.a.unwrap(), p.amplitude.unwrap())).collect();
        assert_eq!(pairs, vec![(0.25, 0.1), (0.25, 0.2), (0.5, 0.1), (0.5, 0.2)]);
        assert_eq!(SweepAxes::default().grid(), vec![GridPoint::default()]);
    }

    #[test]
    fn amplitude_axis_rejects_random_data() {
        let base = ExperimentConfig {
            initial: InitialSpec::RandomSmall { target_i1: 0.1 },
            ..Default::default()
        };
        let point = GridPoint {
            amplitude: Some(0.2),
            ..Default::default()
        };
        assert!(point.apply(&base.resolve().unwrap()).is_err());
    }

    #[test]
    fn override_rejects_malformed_assignments() {
        let mut doc = serde_json::json!({"a": 1});
        assert!(apply_override(&mut doc, "novalue").is_err());
        assert!(apply_override(&mut doc, "a.b=1").is_err());
        assert!(apply_override(&mut doc, "x..y=1").is_err());
        apply_override(&mut doc, "x.y=[1,2]").unwrap();
        assert_eq!(doc["x"]["y"], serde_json::json!([1, 2]));
    }
}
