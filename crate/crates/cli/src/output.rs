use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use opkrylov::KrylovReport;

/// Shortest form is not enough for golden files; 17 significant digits
/// round-trip every `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn history_csv(rep: &KrylovReport) -> String {
    let mut s = String::from("iter,residual_norm,energy_error,cumulative_seconds\n");
    for (k, r) in rep.residual_history.iter().enumerate() {
        let e = rep
            .energy_error_history
            .as_ref()
            .map(|h| num(h[k]))
            .unwrap_or_default();
        let _ = writeln!(s, "{k},{},{e},{}", num(*r), num(rep.elapsed[k]));
    }
    s
}

pub fn solution_csv(rep: &KrylovReport, samples: usize) -> String {
    let mut s = String::from("x,u\n");
    for i in 0..samples {
        let x = if i + 1 == samples { 1.0 } else { -1.0 + 2.0 * i as f64 / (samples - 1) as f64 };
        let _ = writeln!(s, "{},{}", num(x), num(rep.u.eval(x)));
    }
    s
}

pub fn summary(rep: &KrylovReport, kappa: Option<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method = {}", rep.method);
    let _ = writeln!(s, "converged = {}", rep.converged);
    let _ = writeln!(s, "iterations = {}", rep.iterations);
    match kappa {
        Some(k) => {
            let _ = writeln!(s, "kappa_bound = {k}");
        }
        None => s.push_str("kappa_bound = n/a\n"),
    }
    let _ = writeln!(s, "final_residual = {}", num(rep.final_residual()));
    if let Some(e) = rep.energy_error_history.as_ref().and_then(|h| h.last()) {
        let _ = writeln!(s, "final_energy_error = {}", num(*e));
    }
    if let Some(p) = rep.rhs_projection_residual {
        let _ = writeln!(s, "rhs_projection_residual = {}", num(p));
    }
    if !rep.restarts.is_empty() {
        let _ = writeln!(s, "restarts = {}", rep.restarts.len());
    }
    let _ = writeln!(s, "wall_time = {:.6}", rep.wall_time);
    s
}

pub fn write_all(dir: &Path, rep: &KrylovReport, kappa: Option<f64>, samples: usize) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (name, body) in [
        ("history.csv", history_csv(rep)),
        ("solution.csv", solution_csv(rep, samples)),
        ("summary.txt", summary(rep, kappa)),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
