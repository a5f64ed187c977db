use thiserror::Error;

/// Errors surfaced by construction and verification operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("partition must have at least one part")]
    EmptyPartition,
    #[error("partition parts must be positive (got {0})")]
    NonPositivePart(i64),
    #[error("partition parts must be weakly increasing (…,{0},{1},… )")]
    NotWeaklyIncreasing(usize, usize),
    #[error("box index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("generator index {0} is not in the centralizer basis")]
    IndexNotInBasis(String),
    #[error("pyramid mu has {mu_boxes} boxes but lambda has {rows} rows")]
    MuSizeMismatch { mu_boxes: usize, rows: usize },
    #[error("elements belong to different (lambda, mu) contexts")]
    ContextMismatch,
    #[error("element is not supported on the non-positive part p")]
    NotInP,
    #[error("operation undefined on the zero element")]
    ZeroElement,
    #[error("mu does not have the required shape: {0}")]
    BadMu(String),
    #[error("state is not in the reduced complex (only J[p] and Phi* generators allowed)")]
    NotInReducedComplex,
    #[error("candidate `{candidate}` is not closed; residue {residue}")]
    NotClosed { candidate: String, residue: String },
    #[error("parse error at byte {at}: {msg}")]
    ParseError { at: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
