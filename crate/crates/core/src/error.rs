use crate::expr::{DiffError, EvalError, ParseError};
use crate::grid::GridError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what} at x = {x}, t = {t}")]
    Singular { what: String, x: f64, t: f64 },
    #[error("fixed-point iteration did not converge at t = {t}: {iterations} iterations, last update {delta:e}")]
    NoConvergence { t: f64, iterations: usize, delta: f64 },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
