use core::fmt;

/// Errors raised by the contract library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    Domain(&'static str),
    /// A license function violates its shape invariants.
    InvalidLicense(&'static str),
    /// A model, mixture or contract violates its invariants.
    InvalidInput(&'static str),
    /// Posterior share requested with zero total approval probability.
    UndefinedPosterior,
    /// The requested null budget cannot be spent by any update.
    InfeasibleBudget { budget: f64, max: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidLicense(what) => write!(f, "invalid license function: {what}"),
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::UndefinedPosterior => {
                write!(f, "posterior undefined: total approval probability is zero")
            }
            Error::InfeasibleBudget { budget, max } => {
                write!(f, "infeasible budget {budget}: the largest attainable null expectation is {max}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
