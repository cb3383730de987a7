use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model or circuit was requested with parameters outside what is supported.
    #[error("configuration error: {0}")]
    Config(String),

    /// A call violated an operation's preconditions (bad index, arity, kind).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("feature {feature} has a degenerate range (min = max = {value})")]
    DegenerateRange { feature: usize, value: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("objective returned a non-finite value {value} at weights {weights:?}")]
    NonFinite { value: f64, weights: Vec<f64> },
}

macro_rules! usage {
    ($($arg:tt)*) => {
        $crate::Error::Usage(alloc::format!($($arg)*))
    };
}

macro_rules! config {
    ($($arg:tt)*) => {
        $crate::Error::Config(alloc::format!($($arg)*))
    };
}

pub(crate) use {config, usage};
