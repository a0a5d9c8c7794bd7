use thiserror::Error;

/// Errors produced by the field calculus, the solvers and the diagnostics.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("field contains non-finite samples ({0})")]
    NonFiniteField(String),

    #[error("vector potential gauge error: component {component} has mean {mean:e}, expected 0")]
    Gauge { component: usize, mean: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("mollifier width {eps} not resolvable; admissible interval is [{min}, {max}]")]
    Resolution { eps: f64, min: f64, max: f64 },

    #[error("kernel support radius {radius} exceeds half box {half_box}; periodic wraparound")]
    Wraparound { radius: f64, half_box: f64 },

    #[error("time step {dt} exceeds stability bound {bound}; pass an explicit override to proceed")]
    TimeStep { dt: f64, bound: f64 },

    #[error("solution blew up (non-finite samples) at t = {t}")]
    BlowUp { t: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("no anomalous-dissipation formula for law {0}; this balance law has density and global reports only")]
    NoAnomalousFormula(String),

    #[error("runs are not comparable: {0}")]
    Comparison(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("config {path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
