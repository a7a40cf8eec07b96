use crate::information::InfoMeasureKind;

/// Errors surfaced by the library.
///
/// Most operations here are total functions of their inputs and cannot fail;
/// the exceptions are configuration validation, quadrature that misses its
/// accuracy target, and summaries requested for a measure whose every
/// replication was excluded.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature failed to reach relative tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureTolerance { tol: f64, estimate: f64 },

    #[error("no usable replications for measure {0:?}: all were flagged degenerate")]
    EmptyMeasure(InfoMeasureKind),
}

pub type Result<T> = std::result::Result<T, Error>;
