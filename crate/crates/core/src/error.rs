// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel is singular on the diagonal (t = s = {t})")]
    Singularity { t: f64 },

    /// Floating point trouble: failed factorization, non-convergent quadrature, etc.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("circulant embedding has eigenvalue {value:e} at index {index} (below tolerance {tolerance:e})")]
    Embedding {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("coefficient `{what}` is not finite at t = {t}, x = {x}")]
    Evaluation { what: &'static str, t: f64, x: f64 },

    /// A scheme step produced a non-finite state.
    #[error("non-finite state at step {step} (t = {t}, x = {x})")]
    NonFinite { step: usize, t: f64, x: f64 },

    #[error("plan error: {0}")]
    Plan(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("time {u} is not a node of the grid or of the supplied refinement")]
    UnsupportedPoint { u: f64 },

    #[error("bound not applicable: {0}")]
    BoundInapplicable(String),

    #[error("{aborted} of {total} paths aborted (first: path {first_path}: {first_error})")]
    RunFailure {
        aborted: usize,
        total: usize,
        first_path: usize,
        first_error: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
