use alloc::string::String;

/// Errors raised by the approximation pipeline.
///
/// Every message names the offending parameter so callers (and the CLI) can
/// forward it unchanged.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Structurally invalid arguments (empty sets, mismatched grids, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A construction would exceed its configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// No parameter budget exists for the requested accuracy.
    #[error("budget infeasible: {0}")]
    BudgetInfeasible(String),
    /// An operation was called on data violating its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! bail {
    ($variant:ident, $($fmt:tt)+) => {
        return Err($crate::Error::$variant(alloc::format!($($fmt)+)))
    };
}
pub(crate) use bail;
