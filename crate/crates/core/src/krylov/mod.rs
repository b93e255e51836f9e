//! Krylov iterations on functions.
//!
//! All drivers share [`KrylovOptions`] and produce a [`KrylovReport`]. The
//! preconditioned methods ([`pcg`], [`minres`], [`gmres`]) iterate on `v` with
//! `u = R (v + v2)`, where `v2` is the ancillary correction that puts the
//! right-hand side into the range of `T`.

mod arnoldi;
mod cg;
mod minres;
mod pcg;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use arnoldi::{gmres, ArnoldiFactorization, ArnoldiStep};
pub use cg::cg_unpreconditioned;
pub use minres::minres;
pub use pcg::pcg;

use crate::chebfun::PiecewiseFun;
use crate::error::{Error, Result};
use crate::operator::OperatorContext;

/// Relative chopping applied to iterates, residuals and search directions
/// after every update.
pub const ITERATE_CHOP_TOL: f64 = 1e-14;

/// How the residual is compared with `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stopping {
    /// `||r_k|| <= tol * ||r_0||`.
    #[default]
    Relative,
    /// `||r_k|| <= tol`.
    Absolute,
    /// `||r_k|| <= tol * ||v_k||`, the residual normalized by the iterate.
    SolutionNormalized,
}

impl Stopping {
    /// Whether residual `r` with iterate norm `v_norm` meets the criterion.
    /// A zero residual always does.
    pub fn met(self, tol: f64, r0: f64, r: f64, v_norm: f64) -> bool {
        r == 0.0
            || r <= match self {
                Stopping::Relative => tol * r0,
                Stopping::Absolute => tol,
                Stopping::SolutionNormalized => tol * v_norm,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cg,
    Pcg,
    Minres,
    Gmres,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cg => "cg",
            Method::Pcg => "pcg",
            Method::Minres => "minres",
            Method::Gmres => "gmres",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cg" => Ok(Method::Cg),
            "pcg" => Ok(Method::Pcg),
            "minres" => Ok(Method::Minres),
            "gmres" => Ok(Method::Gmres),
            other => Err(format!("unknown method `{other}` (expected cg, pcg, minres or gmres)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
    /// Exact solution, if known, for energy-error reporting.
    pub exact_solution: Option<PiecewiseFun>,
    pub stopping: Stopping,
    /// Keep every residual, search direction and iterate `u_k` in the report.
    pub record_vectors: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            restart: None,
            exact_solution: None,
            stopping: Stopping::Relative,
            record_vectors: false,
        }
    }
}

impl KrylovOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_restart(mut self, restart: usize) -> Self {
        self.restart = Some(restart);
        self
    }

    pub fn with_exact(mut self, u: PiecewiseFun) -> Self {
        self.exact_solution = Some(u);
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_vectors = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Contract(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Contract("max_iter must be at least 1".into()));
        }
        if self.restart == Some(0) {
            return Err(Error::Contract("restart must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything a solve produced. Per-iteration histories have
/// `iterations + 1` entries; entry 0 is the initial state.
#[derive(Debug, Clone)]
pub struct KrylovReport {
    pub method: Method,
    /// Final approximation to the BVP solution.
    pub u: PiecewiseFun,
    /// Final Krylov iterate (`u = R (v + v2)` for preconditioned methods;
    /// `v = u` for unpreconditioned CG).
    pub v: PiecewiseFun,
    /// `||r_k||` for CG/PCG, `||R* g - T v_k||` for MINRES/GMRES.
    pub residual_history: Vec<f64>,
    /// `||u - u_k||_L / ||u||_L`, when an exact solution was supplied.
    pub energy_error_history: Option<Vec<f64>>,
    /// `||v_k||` (L2), for residual normalizations that divide by it.
    pub solution_norm_history: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Total seconds, including right-hand side preparation.
    pub wall_time: f64,
    /// Cumulative seconds at each history entry.
    pub elapsed: Vec<f64>,
    /// Residual functions `r_k` (only with `record_vectors`).
    pub residuals: Vec<PiecewiseFun>,
    /// Search directions `p_k` (only with `record_vectors`, CG/PCG).
    pub directions: Vec<PiecewiseFun>,
    /// Iterates `u_k` (only with `record_vectors`).
    pub iterates: Vec<PiecewiseFun>,
    /// Iteration counts at which GMRES restarted.
    pub restarts: Vec<usize>,
    /// `||f - Pi_V0 f||` for unpreconditioned CG.
    pub rhs_projection_residual: Option<f64>,
}

impl KrylovReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }

    /// Iterations until `residual_history[k] <= eps * residual_history[0]`.
    pub fn iterations_to_relative(&self, eps: f64) -> Option<usize> {
        let r0 = self.residual_history[0];
        self.residual_history.iter().position(|&r| r <= eps * r0)
    }
}

/// Relative energy error against a known solution.
struct EnergyTracker<'a> {
    ctx: &'a OperatorContext,
    exact: &'a PiecewiseFun,
    norm: f64,
}

impl<'a> EnergyTracker<'a> {
    fn new(ctx: &'a OperatorContext, exact: Option<&'a PiecewiseFun>) -> Option<Self> {
        let exact = exact?;
        let e2 = ctx.bilinear_unchecked(exact, exact);
        let norm = if e2 > 0.0 { e2.sqrt() } else { 1.0 };
        Some(Self { ctx, exact, norm })
    }

    fn relative_error(&self, u: &PiecewiseFun) -> f64 {
        let e = self.exact - u;
        self.ctx.bilinear_unchecked(&e, &e).max(0.0).sqrt() / self.norm
    }
}

/// Accumulates the per-iteration history shared by all drivers.
struct Recorder<'a> {
    start: Instant,
    tracker: Option<EnergyTracker<'a>>,
    keep: bool,
    residual_history: Vec<f64>,
    energy: Vec<f64>,
    solution_norms: Vec<f64>,
    elapsed: Vec<f64>,
    residuals: Vec<PiecewiseFun>,
    directions: Vec<PiecewiseFun>,
    iterates: Vec<PiecewiseFun>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(ctx: &'a OperatorContext, opts: &'a KrylovOptions, start: Instant) -> Self {
        Self {
            start,
            tracker: EnergyTracker::new(ctx, opts.exact_solution.as_ref()),
            keep: opts.record_vectors,
            residual_history: Vec::new(),
            energy: Vec::new(),
            solution_norms: Vec::new(),
            elapsed: Vec::new(),
            residuals: Vec::new(),
            directions: Vec::new(),
            iterates: Vec::new(),
            alphas: Vec::new(),
            betas: Vec::new(),
        }
    }

    /// Whether the caller must build `u_k` at every step.
    fn wants_iterates(&self) -> bool {
        self.keep || self.tracker.is_some()
    }

    fn record(&mut self, residual: f64, v_norm: f64, u: Option<&PiecewiseFun>, r: Option<&PiecewiseFun>) {
        self.residual_history.push(residual);
        self.solution_norms.push(v_norm);
        self.elapsed.push(self.start.elapsed().as_secs_f64());
        if let (Some(t), Some(u)) = (&self.tracker, u) {
            self.energy.push(t.relative_error(u));
        }
        if self.keep {
            if let Some(u) = u {
                self.iterates.push(u.clone());
            }
            if let Some(r) = r {
                self.residuals.push(r.clone());
            }
        }
    }

    fn direction(&mut self, p: &PiecewiseFun) {
        if self.keep {
            self.directions.push(p.clone());
        }
    }

    fn finish(
        self,
        method: Method,
        u: PiecewiseFun,
        v: PiecewiseFun,
        converged: bool,
        restarts: Vec<usize>,
        rhs_projection_residual: Option<f64>,
    ) -> KrylovReport {
        let iterations = self.residual_history.len() - 1;
        KrylovReport {
            method,
            u,
            v,
            iterations,
            converged,
            energy_error_history: self.tracker.map(|_| self.energy),
            residual_history: self.residual_history,
            solution_norm_history: self.solution_norms,
            alphas: self.alphas,
            betas: self.betas,
            wall_time: self.start.elapsed().as_secs_f64(),
            elapsed: self.elapsed,
            residuals: self.residuals,
            directions: self.directions,
            iterates: self.iterates,
            restarts,
            rhs_projection_residual,
        }
    }
}

/// Dispatches on [`Method`]; `v0_degree` is used by unpreconditioned CG only.
pub fn solve(ctx: &OperatorContext, method: Method, v0_degree: usize, opts: &KrylovOptions) -> Result<KrylovReport> {
    match method {
        Method::Cg => cg_unpreconditioned(ctx, v0_degree, opts),
        Method::Pcg => pcg(ctx, opts),
        Method::Minres => minres(ctx, opts),
        Method::Gmres => gmres(ctx, opts),
    }
}

/// `kappa`-based CG bound `2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^k`.
pub fn cg_error_bound(kappa: f64, k: usize) -> f64 {
    let s = kappa.sqrt();
    2.0 * ((s - 1.0) / (s + 1.0)).powi(k as i32)
}

/// Iterations the CG bound needs to guarantee relative energy error `eps`:
/// `ceil(log(2/eps) / (log(sqrt(kappa)+1) - log(sqrt(kappa)-1)))`. Returns 1
/// for `kappa = 1`.
pub fn cg_iteration_bound(kappa: f64, eps: f64) -> usize {
    let s = kappa.sqrt();
    if s <= 1.0 {
        return 1;
    }
    ((2.0 / eps).ln() / ((s + 1.0).ln() - (s - 1.0).ln())).ceil() as usize
}

fn require_self_adjoint(ctx: &OperatorContext, method: &str) -> Result<()> {
    if !ctx.problem().is_self_adjoint() {
        return Err(Error::Contract(format!(
            "{method} needs a self-adjoint problem (b = 0); use gmres"
        )));
    }
    Ok(())
}

fn require_coercive(ctx: &OperatorContext, method: &str) -> Result<()> {
    require_self_adjoint(ctx, method)?;
    if !ctx.problem().is_coercive() {
        return Err(Error::Contract(format!(
            "{method} needs a coercive problem (a > 0, c >= 0); use minres or gmres"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_formulas() {
        assert_eq!(cg_error_bound(1.0, 0), 2.0);
        assert_eq!(cg_error_bound(1.0, 3), 0.0);
        let r = (3f64.sqrt() - 1.0) / (3f64.sqrt() + 1.0);
        assert!((cg_error_bound(3.0, 2) - 2.0 * r * r).abs() < 1e-16);
        // 2 r^k <= 1e-8 first at k = ceil(log(2e8) / -log r).
        let k = cg_iteration_bound(3.0, 1e-8);
        assert!(cg_error_bound(3.0, k) <= 1e-8);
        assert!(cg_error_bound(3.0, k - 1) > 1e-8);
        assert_eq!(cg_iteration_bound(1.0, 1e-8), 1);
    }

    #[test]
    fn options_validation() {
        assert!(KrylovOptions::default().validate().is_ok());
        assert!(KrylovOptions::default().with_tol(0.0).validate().is_err());
        assert!(KrylovOptions::default().with_max_iter(0).validate().is_err());
        assert!(KrylovOptions::default().with_restart(0).validate().is_err());
    }

    #[test]
    fn method_round_trip() {
        for m in [Method::Cg, Method::Pcg, Method::Minres, Method::Gmres] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("bicg".parse::<Method>().is_err());
    }
}
