use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A value that should satisfy an invariant (e.g. a normalized state) does not.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("not enough degrees of freedom: n = {n}, dof = {dof}")]
    DegreesOfFreedom { n: usize, dof: f64 },

    #[error("no observation has positive kernel weight at x = {x}")]
    EmptyNeighborhood { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
