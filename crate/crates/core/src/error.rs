use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("duplicate edge {tail} -> {head}")]
    DuplicateEdge { tail: String, head: String },

    #[error("OD pair ({origin}, {destination}) is not connected by any directed path")]
    UnreachableOd { origin: String, destination: String },

    #[error("OD pair {od} has no path within the enumeration limits")]
    NoPaths { od: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid flow vector: {0}")]
    InvalidFlow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate convex hull: {0}")]
    DegenerateHull(String),

    /// The stacked scenario system has no feasible point.
    #[error("scenario constraint system is infeasible")]
    Infeasible,

    #[error("cost model failed the monotonicity check (min pairing {min_pairing:e})")]
    NotMonotone { min_pairing: f64 },

    #[error("no start converged to an equilibrium")]
    NoConvergedPoints,

    #[error("equilibrium cloud is empty")]
    EmptyCloud,
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
