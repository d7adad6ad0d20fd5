use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("dimension {dim} outside supported range 1..={max}")]
    UnsupportedDim { dim: usize, max: usize },
    #[error("max_index {max_index} outside supported range 1..={max}")]
    UnsupportedIndex { max_index: u32, max: u32 },
    #[error("lattice must contain at least one mode")]
    Empty,
    #[error("mode {index}: expected {expected} frequency components, found {found}")]
    DimMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("mode {index}: frequency is not finite")]
    NonFinite { index: usize },
    #[error("mode {index}: weight {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("modes {first} and {second} share the same frequency")]
    DuplicateFrequency { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("a and b must not both be zero")]
    TrivialParams,
    #[error("state has {found} modes but the lattice has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite state entry at t = {t}")]
    NonFinite { t: f64 },
    /// `q = a s + b` vanished (within tolerance); `crossing` carries a
    /// bisected estimate of when it happened, if one is available.
    #[error("degenerate coefficient q = {q:e} at t = {t}")]
    Degenerate { t: f64, q: f64, crossing: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("adaptive step underflow at t = {t}: h = {h:e} below h_min")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid step control: {0}")]
    InvalidControl(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionalError {
    #[error("{functional} requires {requirement}, got q = {q}")]
    Domain {
        functional: &'static str,
        requirement: &'static str,
        q: f64,
    },
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unsupported parameters: {0}")]
    Unsupported(&'static str),
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadformError {
    #[error("profile q vanishes or changes sign near t = {t} (q = {q:e})")]
    ProfileVanishes { t: f64, q: f64 },
    #[error("invalid span [{start}, {end}]")]
    InvalidSpan { start: f64, end: f64 },
    #[error("xi norm must be positive, got {0}")]
    InvalidXi(f64),
    #[error(transparent)]
    Step(#[from] StepError),
}
