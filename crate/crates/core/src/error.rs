//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Shapes or lengths of the inputs do not conform.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A problem or certificate file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A state vector is not normalized and auto-normalization is off.
    #[error("normalization error: {0}")]
    Normalization(String),

    /// A mixed-state component has zero norm and cannot be normalized.
    #[error("zero-norm component: mixed input {input}, component {component}")]
    ZeroComponent { input: usize, component: usize },

    /// An operand that must be nonzero is numerically zero.
    #[error("zero matrix: {0}")]
    ZeroMatrix(String),

    /// A brute-force search exceeds its size bound.
    #[error("multiset of size {size} exceeds brute-force bound {bound}")]
    SizeLimit { size: usize, bound: usize },

    /// An operation's precondition does not hold for this input.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A Kraus family fails the trace-preservation requirement.
    #[error("invalid channel: {0}")]
    ChannelInvalid(String),

    /// A numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative solver hit its iteration budget.
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
