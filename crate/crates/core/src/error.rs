use thiserror::Error;

/// Errors raised by the estimators and the machinery underneath them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("kernel order {k} is not supported (must be in 2..={max})")]
    UnsupportedOrder { k: usize, max: usize },

    #[error("trimming leaves an empty window ({len} values, eps0={eps0}, gamma={gamma})")]
    DegenerateTrim { len: usize, eps0: f64, gamma: f64 },

    #[error("input is not sorted ascending at position {0}")]
    Unsorted(usize),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("C({n},{k}) overflows 64 bits; use Monte Carlo mode")]
    Overflow { n: u64, k: u64 },

    #[error("exact enumeration needs {needed} combinations but the budget is {budget}; use Monte Carlo mode")]
    Capacity { needed: u64, budget: u64 },

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

impl MomentError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        MomentError::Argument(msg.into())
    }

    /// True for failures that a caller can fix by switching to Monte Carlo mode.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            MomentError::Overflow { .. } | MomentError::Capacity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, MomentError>;
