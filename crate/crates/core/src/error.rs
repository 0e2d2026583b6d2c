use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("boundaries of nodes {0} and {1} overlap")]
    OverlappingBoundaries(usize, usize),

    #[error("cannot shrink obstacle {obstacle}: {reason}")]
    CannotShrink { obstacle: usize, reason: String },

    #[error("no route from node {from} to node {target}: {reason}")]
    Unroutable {
        from: usize,
        target: usize,
        reason: String,
    },

    #[error("multi-path routing refused: {0} terminals exceeds the limit of {1}")]
    TooManyTerminals(usize, usize),

    #[error("path terminal property violated at node {0}")]
    PathTerminalProperty(usize),

    #[error("instance is not a tree: {0}")]
    NotATree(String),

    #[error("instance too large for exhaustive search ({0} orderings)")]
    InstanceTooLarge(f64),

    #[error("biarc fit failed: {0}")]
    FitFailure(String),

    #[error("capacity ledger: {0}")]
    Ledger(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unroutable { .. } => 3,
            Error::Invariant(_) | Error::Ledger(_) => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
