use thiserror::Error;

use crate::chebfun::PiecewiseFun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside [-1, 1]")]
    Domain { x: f64 },

    /// Adaptive construction hit the degree cap. The partially resolved
    /// function is carried so the caller can decide whether to proceed.
    #[error("function not resolved on piece(s) {pieces:?} within degree cap {cap}")]
    Unresolved {
        partial: Box<PiecewiseFun>,
        pieces: Vec<usize>,
        cap: usize,
    },

    #[error("sampler returned a non-finite value at x = {x}")]
    NonFiniteSample { x: f64 },

    #[error("invalid breakpoints: {0}")]
    Breakpoints(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("ancillary breakdown: no trial function gave a usable eta (tried {})", tried.join(", "))]
    AncillaryBreakdown { tried: Vec<String> },

    #[error(
        "operator not positive definite at iteration {iteration} (B[Rp,Rp] = {value:e}); use minres or gmres"
    )]
    NotPositiveDefinite { iteration: usize, value: f64 },
}
