use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The trial function has no positive nonlinear mass, so no scaling of it
    /// lies on the Nehari manifold.
    #[error("Nehari projection infeasible: ∫Q|u|^p = {weighted_power:e} ≤ 0")]
    NehariInfeasible { weighted_power: f64 },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    CgStalled { iterations: usize, residual: f64 },

    #[error("solver did not converge within {iterations} outer iterations")]
    NotConverged { iterations: usize },

    #[error("no start converged ({attempts} attempted)")]
    AllStartsFailed { attempts: usize },

    #[error("no lattice translate of the cell window fits inside the box")]
    WindowOutsideBox,

    #[error("invalid cell window: {0}")]
    InvalidWindow(String),

    #[error("denominator vanishes: {0}")]
    ZeroDenominator(&'static str),

    #[error("dimension {0} unsupported for the limit problem (need N ≥ 3)")]
    DimensionUnsupported(usize),

    #[error("field file format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// `location` is `line <k>` or the offending `--override` entry.
    #[error("config {location}: {message}")]
    Parse { location: String, message: String },

    #[error("config validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
