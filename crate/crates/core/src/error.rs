use thiserror::Error;

/// Errors raised by the wave and simulation routines.
#[derive(Debug, Clone, Error, PartialEq)]
#[non_exhaustive]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bisection bracket [{lo}, {hi}] does not change fate: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },
    #[error("adaptive integrator step size underflow at tau-arclength {at}")]
    StepFailure { at: f64 },
    #[error("anchor value {x_ref} outside trajectory range [{lo:e}, {hi}]")]
    Anchor { x_ref: f64, lo: f64, hi: f64 },
    #[error("only {found} samples in the fit window, need {needed}")]
    Window { found: usize, needed: usize },
    #[error("peak offset delta={delta} is below the admissible threshold at c={c}")]
    DeltaTooSmall { c: f64, delta: f64 },
    #[error("speed c={c} is below the critical speed {c_star}")]
    SpeedTooLow { c: f64, c_star: f64 },
    #[error("profile tail does not reach phi < {needed}; smallest value {reached}")]
    TailTooShort { needed: f64, reached: f64 },
    #[error("time step {dt} exceeds stable bound {stable}")]
    Cfl { dt: f64, stable: f64 },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("solution left [0,1]: value {value} at cell {cell}")]
    Bounds { value: f64, cell: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
