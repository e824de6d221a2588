use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature insufficient: mass deficit {deficit:e} exceeds {tolerance:e}")]
    QuadratureInsufficient { deficit: f64, tolerance: f64 },

    #[error("CFL violation: dt = {dt} exceeds dx / v_max = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("solver diverged at step {step}")]
    Divergence { step: usize },

    #[error("cylinder {0} leaves the safe region of the grid")]
    OutsideSafeRegion(String),

    #[error("malformed grid container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
