use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration diverged at step {step} (tau = {tau})")]
    Diverged { step: usize, tau: f64 },

    #[error("overlap fidelity undefined: envelope {0} has zero energy")]
    UndefinedFidelity(usize),

    #[error("no cached optimum for memory point d = {d}, g = {g}")]
    MissingOptimum { d: f64, g: f64 },

    #[error("criterion returned a non-finite value at sample {0}")]
    PoisonedSample(usize),

    #[error("total variance {0:e} is too small for Sobol' indices to be defined")]
    DegenerateVariance(f64),

    #[error("unsupported parameterization: {0}")]
    UnsupportedParameterization(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
