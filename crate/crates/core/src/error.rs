use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular frequency: {0}")]
    SingularFrequency(String),
    #[error("singular lattice at index {index}: {detail}")]
    SingularLattice { index: usize, detail: String },
    #[error("accuracy target missed: {detail} (achieved {achieved:e}, requested {requested:e})")]
    Accuracy {
        detail: String,
        achieved: f64,
        requested: f64,
    },
    #[error("pole hit at {0}")]
    PoleHit(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
