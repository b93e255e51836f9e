//! `opkrylov`: solve two-point boundary value problems from a problem file.
//!
//! ```text
//! opkrylov solve problem.txt --out results/
//! opkrylov check-bound problem.txt
//! ```
//!
//! Exit status is 0 on success, 2 when the solver stops without
//! converging, and 1 on any input or solver error.

mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use opkrylov::krylov::{self, cg_error_bound, Method};
use opkrylov::OperatorContext;

use problem::{Overrides, ProblemFile};

#[derive(Parser)]
#[command(name = "opkrylov", version, about = "Operator Krylov solvers for -(a u')' + b u' + c u = f, u(+-1) = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver and write history.csv, solution.csv and summary.txt.
    Solve {
        problem: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Solver: cg, pcg, minres or gmres.
        #[arg(long)]
        method: Option<Method>,
        /// GMRES restart length.
        #[arg(long)]
        restart: Option<usize>,
    },
    /// Run pcg and check the energy error against the CG bound at every step.
    CheckBound {
        problem: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

#[derive(Args)]
struct OverrideArgs {
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration limit.
    #[arg(long)]
    max_iter: Option<usize>,
}

/// Condition bound when the problem admits one.
fn kappa(ctx: &OperatorContext) -> Option<f64> {
    let p = ctx.problem();
    (p.is_self_adjoint() && p.is_coercive())
        .then(|| ctx.condition_bound().ok())
        .flatten()
}

fn solve(problem: &ProblemFile, out: &std::path::Path) -> Result<bool> {
    let (ctx, exact) = problem.build()?;
    let opts = problem.options(exact);
    let rep = krylov::solve(&ctx, problem.method, problem.v0_degree(), &opts)?;
    output::write_all(out, &rep, kappa(&ctx), problem.sample_count)?;
    println!(
        "{}: {} after {} iterations, residual {:e}",
        rep.method,
        if rep.converged { "converged" } else { "not converged" },
        rep.iterations,
        rep.final_residual()
    );
    Ok(rep.converged)
}

/// Slack added to the bound, for rounding in the energy error itself.
const BOUND_SLACK: f64 = 1e-8;

fn check_bound(problem: &ProblemFile) -> Result<bool> {
    let (ctx, exact) = problem.build()?;
    let Some(exact) = exact else {
        bail!("check-bound needs `exact_solution` in the problem file");
    };
    if !ctx.problem().is_self_adjoint() || !ctx.problem().is_coercive() {
        bail!("check-bound needs a self-adjoint coercive problem (b = 0, a > 0, c >= 0)");
    }
    let kappa = ctx.condition_bound()?;
    let rep = krylov::pcg(&ctx, &problem.options(Some(exact)))?;
    let errors = rep.energy_error_history.expect("exact solution was supplied");
    println!("kappa bound = {kappa}");
    let mut ok = true;
    for (k, e) in errors.iter().enumerate() {
        // For kappa = 1 the formula gives 2 * 0^k: exact after one step.
        let bound = cg_error_bound(kappa, k) + BOUND_SLACK;
        let pass = *e <= bound;
        ok &= pass;
        println!("k = {k:3}  error = {e:.3e}  bound = {bound:.3e}  {}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{}", if ok { "all iterations PASS" } else { "bound violated" });
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { problem, out, overrides, method, restart } => {
            let o = Overrides { tol: overrides.tol, max_iter: overrides.max_iter, restart, method };
            let p = ProblemFile::load(&problem)?.apply(&o)?;
            solve(&p, &out)
        }
        Command::CheckBound { problem, overrides } => {
            let o = Overrides {
                tol: overrides.tol,
                max_iter: overrides.max_iter,
                method: Some(Method::Pcg),
                restart: None,
            };
            let mut p = ProblemFile::load(&problem)?;
            // The bound is a statement about pcg; method options do not apply.
            p.restart = None;
            p.v0_degree = None;
            check_bound(&p.apply(&o)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
