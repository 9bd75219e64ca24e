use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("speed {0} is not below 1")]
    Superluminal(f64),

    #[error("support violation: {0}")]
    Support(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("momentum cutoff too small: tail estimate {tail:e} exceeds tolerance {tol:e}")]
    CutoffTooSmall { tail: f64, tol: f64 },

    #[error("coincident points need a declared momentum cutoff")]
    Coincident,

    #[error("truncated dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("polynomial is not bounded below: {0}")]
    UnboundedPolynomial(String),

    #[error("outside analyticity strip: {0}")]
    Strip(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

pub(crate) fn ensure_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}
