use alloc::string::String;

/// Failure categories surfaced by the model.
///
/// The variants line up with how the front end reports failures: malformed
/// quantum numbers and configuration problems are user errors, integrator
/// breakdowns are numerical failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(alloc::format!($($arg)*)) };
}

pub(crate) use config_err;
pub(crate) use domain_err;
