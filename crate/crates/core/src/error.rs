use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter violates the domain of its family.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// A call was made with arguments outside its contract.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    /// Moment inversion is impossible for the given sample.
    #[error("estimation error: {0}")]
    Estimation(&'static str),

    /// The probability table did not reach the requested mass within the hard cap.
    #[error("pmf table did not converge within {cap} terms")]
    PmfCap { cap: usize },

    /// `p_0` is below the smallest positive double.
    #[error("pmf underflow: p_0 is not representable for these parameters")]
    PmfUnderflow,

    #[error("empty sample")]
    EmptySample,

    /// A textual descriptor (alternative, family, statistic) could not be parsed.
    #[error("{0}")]
    Parse(String),
}
