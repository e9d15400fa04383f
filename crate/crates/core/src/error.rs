use thiserror::Error;

use crate::model::Violation;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("cumulant order {order} out of range (p_max = {max})")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("partition size {p} outside the supported range 1..={max}")]
    SizeLimit { p: usize, max: usize },

    #[error("odd moment order {0} is not supported; only even orders are expanded")]
    OddOrder(usize),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("invalid cumulant vector: {0}")]
    InvalidCumulants(String),

    #[error("invalid Lévy specification: {0}")]
    InvalidLevy(String),

    #[error("path generation failed: {0}")]
    Generation(String),

    #[error("integration window {window} is shorter than the horizon {horizon}")]
    Window { window: f64, horizon: f64 },

    #[error("sampling mismatch: path has no sample at t = {time:e} (interpolation is not permitted)")]
    SamplingMismatch { time: f64 },

    #[error("no Vanishes/Diverges transition across the kappa grid: {trace}")]
    BracketFailure { trace: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
