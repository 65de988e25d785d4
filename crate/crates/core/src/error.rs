use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{function}: argument {value} is out of range ({detail})")]
    OutOfRange {
        function: &'static str,
        value: f64,
        detail: String,
    },

    #[error("accuracy target not met in {function}: {detail}")]
    Accuracy {
        function: &'static str,
        detail: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator {0} is singular or ill-conditioned")]
    Singular(&'static str),

    #[error("grid with {cells} cells is too coarse (need at least {min})")]
    GridTooCoarse { cells: usize, min: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fixed-point iteration did not converge in {iterations} sweeps (last update {last_update:e})")]
    Contraction { iterations: usize, last_update: f64 },

    #[error("a-priori bound unavailable: {0}")]
    BoundUnavailable(String),

    #[error("control dimension {0} is not supported (only 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("point lies outside the convex hull of the control atoms")]
    OutsideHull,

    #[error("hypothesis {clause} violated: {detail}")]
    Hypothesis {
        clause: &'static str,
        detail: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
