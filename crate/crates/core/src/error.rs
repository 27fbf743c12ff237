use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("renewal law has infinite mean inter-arrival time (series did not converge by horizon {horizon})")]
    InfiniteMean { horizon: usize },

    #[error("radius model has unbounded support; use the generating-function path instead")]
    UnboundedRadius,

    #[error("FKG bound requires a nondecreasing q sequence (q[{index}] > q[{next}])")]
    NotMonotone { index: usize, next: usize },

    #[error("internal consistency check failed: {what} (|{lhs} - {rhs}| > {tol})")]
    Inconsistent {
        what: &'static str,
        lhs: f64,
        rhs: f64,
        tol: f64,
    },

    #[error("enumeration of {requested} weighted terms exceeds the cap of {cap}")]
    EnumerationCap { requested: u128, cap: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
