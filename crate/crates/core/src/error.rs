use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// The variants fall into three families that the command-line front end maps
/// onto distinct exit codes: usage errors (bad parameters), resource refusals
/// (a configured cap would be exceeded), and arithmetic errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("characteristic mismatch: {left} vs {right}")]
    CharacteristicMismatch { left: u32, right: u32 },

    #[error("division by zero in F_{0}")]
    DivisionByZero(u32),

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{what} needs {required}, which exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for errors caused by invalid parameters rather than resource limits.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_)
                | Error::Usage(_)
                | Error::ContextMismatch(_)
                | Error::CharacteristicMismatch { .. }
        )
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
