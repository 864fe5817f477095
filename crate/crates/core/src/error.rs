use thiserror::Error;

use crate::integrate::{Interpretation, Trajectory};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("model `{model}` has interpretation {found:?}, operation requires {expected:?}")]
    WrongInterpretation {
        model: String,
        expected: Interpretation,
        found: Interpretation,
    },

    #[error("model `{0}` has no analytic diffusion Jacobian")]
    MissingJacobian(String),

    #[error("scalar field has no analytic Hessian")]
    MissingHessian,

    #[error("non-finite state at step {step} (t = {time})")]
    NonFinite {
        step: usize,
        time: f64,
        partial: Box<Trajectory>,
    },

    #[error("path {index} aborted: {source}")]
    PathAborted {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sample point {index} is off the manifold (|F| = {value:e})")]
    OffManifold { index: usize, value: f64 },

    #[error("unknown catalog model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameters for `{model}`: {reason}")]
    InvalidParams { model: String, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
