use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector norm {0} is not 1 within 1e-9")]
    NotUnit(f64),

    #[error("support value {h_min:.3e} below floor {floor:.3e}: origin too close to the boundary")]
    OriginNotInterior { h_min: f64, floor: f64 },

    #[error("measure has a negative part but a convex-body result was requested")]
    SignedMeasure,

    #[error("convolved support violates sublinearity by {excess:.3e} (threshold {threshold:.3e})")]
    NotSublinear { excess: f64, threshold: f64 },

    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("normalization failure: {0}")]
    Normalization(String),

    #[error("integrand mass outside the grid box exceeds the bound: {0}")]
    Tail(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
