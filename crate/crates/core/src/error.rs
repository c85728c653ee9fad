use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parameters outside the sphere-like domain: {0}")]
    NotInDomain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("singularity: {0}")]
    Singular(String),
    #[error("event not reached before t = {0}")]
    NoEvent(f64),
    #[error("frame degeneracy: {0}")]
    Frame(String),
    #[error("root bracket: {0}")]
    Bracket(String),
    #[error("path resolution: {0}")]
    Resolution(String),
    #[error("not symplectic: det = {0}")]
    NotSymplectic(f64),
    #[error("truncation unstable: {0}")]
    Truncation(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("not found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
