//! Operator Krylov solvers for two-point boundary value problems
//!
//! ```text
//! -(a u')' + b u' + c u = f  on (-1, 1),   u(-1) = u(1) = 0
//! ```
//!
//! The solvers never discretize the differential operator. Every iterate is
//! a function, held as an adaptively resolved (piecewise) Chebyshev expansion,
//! and the Krylov methods act on functions through the composed operator
//!
//! ```text
//! T = Pi* R* L R Pi,    (R v)(x) = int_{-1}^x v,   Pi v = v - mean(v)
//! ```
//!
//! where `R` is the indefinite-integral preconditioner and `Pi` projects onto
//! zero-mean functions, so that `u = R v` satisfies both boundary conditions.
//!
//! Modules:
//! - [`chebfun`]: the function algebra (construction, calculus, products, quadrature).
//! - [`operator`]: the problem data, `L`, the bilinear form, `R`, `R*`, projections, `T`.
//! - [`krylov`]: unpreconditioned CG, preconditioned CG, MINRES and restarted GMRES.
//! - [`exprparse`]: a small expression language for coefficient functions.

pub mod chebfun;
mod error;
pub mod exprparse;
pub mod krylov;
pub mod operator;

pub use chebfun::{construct_adaptive, ChebSeries, PiecewiseFun};
pub use error::{Error, Result};
pub use krylov::{KrylovOptions, KrylovReport, Stopping};
pub use operator::{BvpProblem, OperatorContext};
