//! Error type shared by all modules.

/// Errors produced by tensor construction, decomposition, and inference.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An operand's extent does not match the tensor along the given mode.
    #[error("mode-{mode} length mismatch: tensor extent {extent}, operand extent {operand}")]
    ModeMismatch {
        mode: usize,
        extent: usize,
        operand: usize,
    },

    /// Mode index outside the tensor order.
    #[error("invalid mode {mode} for an order-{order} tensor (modes are 1-based)")]
    InvalidMode { mode: usize, order: usize },

    /// General shape mismatch between two operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Requested rank exceeds what the input supports.
    #[error("rank {requested} out of range (maximum {max})")]
    Rank { requested: usize, max: usize },

    /// A non-finite value was found where finite data is required.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// A frontal slice violates symmetry beyond the rejection tolerance.
    #[error(
        "slice {slice} asymmetric at ({i},{j}): |X[i,j]-X[j,i]| = {violation:.3e} exceeds {tol:.1e}"
    )]
    Asymmetric {
        slice: usize,
        i: usize,
        j: usize,
        violation: f64,
        tol: f64,
    },

    /// Index outside a container.
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    /// Not enough usable observations for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A direction cannot be defined (e.g. constant trait after centering).
    #[error("direction undefined: {0}")]
    UndefinedDirection(String),

    /// A linear system is singular and no fallback applies.
    #[error("singular system: {0}")]
    Singular(String),

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
