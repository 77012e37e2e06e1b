use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid grid, solver or diagnostic configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A parameter lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A requested time, cylinder or test-function support escapes the recorded slab.
    #[error("range error: {0}")]
    Range(String),
    /// The input does not satisfy the hypothesis the check is stated for.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The requested evaluation window is not supported by the check.
    #[error("unsupported window: {0}")]
    UnsupportedWindow(String),
    /// The state became non-finite or exceeded the sup-norm ceiling.
    #[error("blow-up suspected after t = {last_finite_time}")]
    BlowUpSuspected {
        /// Time of the last state that was finite and below the ceiling.
        last_finite_time: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(alloc::format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! range_err {
    ($($arg:tt)*) => { $crate::error::Error::Range(alloc::format!($($arg)*)) };
}
macro_rules! precondition_err {
    ($($arg:tt)*) => { $crate::error::Error::Precondition(alloc::format!($($arg)*)) };
}
macro_rules! unsupported_err {
    ($($arg:tt)*) => { $crate::error::Error::UnsupportedWindow(alloc::format!($($arg)*)) };
}
pub(crate) use {config_err, domain_err, precondition_err, range_err, unsupported_err};
