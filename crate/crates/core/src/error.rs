use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("block for element {element}: {reason}")]
    Block { element: usize, reason: String },

    #[error("linear algebra: {0}")]
    LinearAlgebra(String),

    #[error("krylov: {0}")]
    Krylov(String),

    #[error("pressure solve of stage {stage} stopped after {} iterations at relative residual {:.3e}", .report.iterations, .report.final_relative_residual())]
    NotConverged { stage: usize, report: Box<crate::krylov::KrylovReport> },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, got })
    }
}
