use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants map onto the process exit codes used by the command line:
/// usage and domain errors are validation failures, resource errors mean an
/// enumeration cap was hit, infeasible errors mean the requested parameters
/// admit no valid bound or configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource cap exceeded: {what} needs {needed} but the cap is {cap}; {advice}")]
    Resource {
        what: String,
        needed: u128,
        cap: u128,
        advice: String,
    },

    #[error("infeasible parameters: {message}{}", min_n.map(|n| format!(" (smallest feasible n = {n})")).unwrap_or_default())]
    Infeasible { message: String, min_n: Option<u64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, needed: u128, cap: u128, advice: &str) -> Self {
        Error::Resource {
            what: what.into(),
            needed,
            cap,
            advice: advice.to_string(),
        }
    }

    pub(crate) fn infeasible(msg: impl Into<String>, min_n: Option<u64>) -> Self {
        Error::Infeasible {
            message: msg.into(),
            min_n,
        }
    }

    /// Process exit code for this error: 2 usage/validation, 3 resource cap,
    /// 4 infeasible parameters.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Domain(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::Resource { .. } => 3,
            Error::Infeasible { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
