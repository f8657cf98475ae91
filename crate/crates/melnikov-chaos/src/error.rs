use serde::Serialize;
use thiserror::Error;

use crate::vec2::V2;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind")]
pub enum Error {
    // system-model
    #[error("no saddle at the origin on the {side} side: eigenvalues {eigenvalues:?}")]
    NotASaddle { side: String, eigenvalues: String },
    #[error("{which} is orthogonal to the switching gradient (|∇G·v| = {value:e})")]
    F1Violated { which: String, value: f64 },
    #[error("probe {probe:?} lies within {distance:e} of the homoclinic loop")]
    AmbiguousMembership { probe: V2, distance: f64 },

    // flow
    #[error("sliding at t = {t}, point {point:?} (∇G·F⁺ = {plus:e}, ∇G·F⁻ = {minus:e})")]
    SlidingEncountered { t: f64, point: V2, plus: f64, minus: f64 },
    #[error("tangential arrival at the switching curve at t = {t}, point {point:?} (transversality {transversality:e})")]
    TangencyUnresolved { t: f64, point: V2, transversality: f64 },
    #[error("trajectory left the domain at t = {t}, point {point:?}")]
    LeftDomain { t: f64, point: V2 },
    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("section not reached before t = {t}")]
    SectionMissed { t: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),

    // homoclinic-melnikov
    #[error("no homoclinic orbit: stable/unstable mismatch {mismatch:e}")]
    NoHomoclinic { mismatch: f64 },
    #[error("homoclinic violates the region pattern: {0}")]
    WrongRegionPattern(String),
    #[error("trace weight overflow at t = {t}")]
    DivergentWeight { t: f64 },
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureNotConverged { tol: f64, estimate: f64 },
    #[error("no sign change of the Melnikov function on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("alternating extrema cannot be spaced by {min_spacing}")]
    SpacingViolation { min_spacing: f64 },

    // geometry
    #[error("point {point:?} is not on the section (|G| = {residual:e})")]
    OffSection { point: V2, residual: f64 },
    #[error("requested distance {d} exceeds the section half-width {half_width}")]
    OutOfSection { d: f64, half_width: f64 },
    #[error("classifier labels do not split the section at tau = {tau}")]
    NoBracket { tau: f64 },
    #[error("calibration point has |M| = {value:e}, below threshold")]
    CalibrationDegenerate { value: f64 },

    // poincare
    #[error("trajectory from d = {d:e} left the homoclinic tube: {reason}")]
    EscapedTube { d: f64, reason: String },

    // chaos-constructor
    #[error("time gap {gap} is below the required {required} (needs |ln eps| <= {max_log})")]
    GapTooSmall { gap: f64, required: f64, max_log: f64 },
    #[error("not enough Melnikov zeros: need {needed}, found {found}")]
    NotEnoughZeros { needed: usize, found: usize },
    #[error("symbol sequence has no 1s: the schedule is empty")]
    EmptySchedule,
    #[error("level {level}: {reason}")]
    BracketLost { level: usize, reason: String },

    // bernoulli
    #[error("readback of window {window} is ambiguous (sup |x| = {value:e})")]
    ReadbackAmbiguous { window: usize, value: f64 },

    // cli
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Module in which the error originated.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            NotASaddle { .. } | F1Violated { .. } | AmbiguousMembership { .. } => "system-model",
            SlidingEncountered { .. }
            | TangencyUnresolved { .. }
            | LeftDomain { .. }
            | StepLimit { .. }
            | StepSizeUnderflow { .. }
            | SectionMissed { .. }
            | Precondition(_) => "flow",
            NoHomoclinic { .. }
            | WrongRegionPattern(_)
            | DivergentWeight { .. }
            | QuadratureNotConverged { .. }
            | NoSignChange { .. }
            | SpacingViolation { .. } => "homoclinic-melnikov",
            OffSection { .. } | OutOfSection { .. } | NoBracket { .. } | CalibrationDegenerate { .. } => {
                "geometry"
            }
            EscapedTube { .. } => "poincare",
            GapTooSmall { .. } | NotEnoughZeros { .. } | EmptySchedule | BracketLost { .. } => {
                "chaos-constructor"
            }
            ReadbackAmbiguous { .. } => "bernoulli",
            Config(_) | Io(_) => "cli",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
