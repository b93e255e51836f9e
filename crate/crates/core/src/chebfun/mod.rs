//! Adaptive Chebyshev function algebra on `[-1, 1]`.
//!
//! Functions are [`PiecewiseFun`] values: a fixed partition of `[-1, 1]` with a
//! [`ChebSeries`] on every piece. A single piece is the smooth case. All
//! operations are pure and re-chop their output at [`DEFAULT_TOL`].
//!
//! | operation            | method                                  |
//! |----------------------|-----------------------------------------|
//! | `int_{-1}^x p`       | [`PiecewiseFun::indefinite_integral`]   |
//! | `int_x^1 p`          | [`PiecewiseFun::adjoint_integral`]      |
//! | `p'`                 | [`PiecewiseFun::differentiate`]         |
//! | `p q`                | [`PiecewiseFun::multiply`]              |
//! | `int_{-1}^1 p q`     | [`PiecewiseFun::inner_product`]         |
//! | `p - mean(p)`        | [`PiecewiseFun::mean`]                  |

mod construct;
mod piecewise;
mod series;
pub mod transform;

pub use construct::{chebfun, construct_adaptive};
pub use piecewise::{union_breaks, PiecewiseFun};
pub use series::ChebSeries;
pub use transform::{cheb_points, coeffs_to_values, values_to_coeffs};

/// Relative chopping tolerance used by construction and every operation.
pub const DEFAULT_TOL: f64 = 1e-15;

/// Largest degree a single piece may reach during adaptive construction.
pub const MAX_DEGREE: usize = 1 << 16;
