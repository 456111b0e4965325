use thiserror::Error;

use crate::geometry::lp::LpStatus;
use crate::profile::CellArray;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid group space: {0}")]
    InvalidSpace(String),

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty cell (group `{group}`, disc value `{disc}`)")]
    EmptyCell { group: String, disc: String },

    #[error("polytope has no vertices")]
    EmptyPolytope,

    /// The convex hull of the vertices does not meet the fair subspace.
    /// `separator` lies in the orthogonal complement of the fair subspace and
    /// has inner product >= 1 with every vertex.
    #[error("convex hull does not intersect the fair subspace")]
    Infeasible { separator: Box<CellArray> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse {
                line,
                msg: format!("{other:?}"),
            },
        }
    }
}
