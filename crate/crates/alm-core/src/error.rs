use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum AlmError {
    /// A precondition on the inputs was violated (dimension mismatch,
    /// infeasible point where feasibility is required, empty sample set, ...).
    #[error("input error: {0}")]
    Input(String),

    /// The operation is not defined for the given variant or configuration
    /// (e.g. a second-subderivative oracle outside its supported class).
    #[error("capability error: {0}")]
    Capability(String),

    /// An iterative kernel failed to reach its certificate (iteration cap,
    /// KKT residual out of tolerance).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A file or serialized payload could not be parsed.
    #[error("data error: {0}")]
    Data(String),
}

impl AlmError {
    pub fn input(msg: impl Into<String>) -> Self {
        AlmError::Input(msg.into())
    }
    pub fn capability(msg: impl Into<String>) -> Self {
        AlmError::Capability(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        AlmError::Numerical(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        AlmError::Data(msg.into())
    }
}
