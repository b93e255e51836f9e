use std::time::Instant;

use super::{KrylovOptions, KrylovReport, Method, Recorder, ITERATE_CHOP_TOL};
use crate::chebfun::PiecewiseFun;
use crate::error::{Error, Result};
use crate::operator::{apply_r, projection_w0, OperatorContext};

/// Relative size of the new Hessenberg entry, compared with `||T q_k||`,
/// below which the Krylov space is treated as invariant.
const LUCKY_BREAKDOWN_TOL: f64 = 1e-13;

/// Outcome of one Arnoldi step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArnoldiStep {
    /// A new orthonormal basis function was appended.
    Extended,
    /// `T q_k` already lies in the span of the basis; no function was added.
    LuckyBreakdown,
}

/// Arnoldi factorization `T Q_k = Q_{k+1} H_k` built with modified
/// Gram–Schmidt on functions.
#[derive(Debug, Clone)]
pub struct ArnoldiFactorization {
    /// Orthonormal basis `q_0, q_1, ...`.
    pub basis: Vec<PiecewiseFun>,
    /// Column `j` holds `h_{0..=j+1, j}`.
    pub hessenberg: Vec<Vec<f64>>,
    /// Norm of the start function.
    pub beta0: f64,
}

impl ArnoldiFactorization {
    pub fn new(start: &PiecewiseFun) -> Result<Self> {
        let beta0 = start.norm_l2();
        if !(beta0 > 0.0) {
            return Err(Error::Contract("Arnoldi start function must be nonzero".into()));
        }
        Ok(Self {
            basis: vec![start.scale(1.0 / beta0)],
            hessenberg: Vec::new(),
            beta0,
        })
    }

    /// Number of Hessenberg columns (completed steps).
    pub fn columns(&self) -> usize {
        self.hessenberg.len()
    }

    /// Applies `T` to the last basis function and orthogonalizes it.
    pub fn step(&mut self, ctx: &OperatorContext) -> Result<ArnoldiStep> {
        let q = self.basis.last().expect("basis is never empty");
        let mut w = ctx.apply_t(q)?;
        let scale = w.norm_l2();
        let mut col = vec![0.0; self.basis.len()];
        // Two passes: a single modified Gram–Schmidt sweep loses
        // orthogonality in proportion to the Krylov matrix condition number.
        for _ in 0..2 {
            for (b, c) in self.basis.iter().zip(col.iter_mut()) {
                let h = b.inner_product(&w);
                w = PiecewiseFun::axpy(-h, b, &w);
                *c += h;
            }
        }
        let w = w.chop(ITERATE_CHOP_TOL);
        let h = w.norm_l2();
        col.push(h);
        self.hessenberg.push(col);
        if h <= LUCKY_BREAKDOWN_TOL * scale {
            return Ok(ArnoldiStep::LuckyBreakdown);
        }
        self.basis.push(w.scale(1.0 / h));
        Ok(ArnoldiStep::Extended)
    }

    /// Dense `(k+1) x k` Hessenberg matrix, row-major.
    pub fn hessenberg_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.columns();
        let mut m = vec![vec![0.0; k]; k + 1];
        for (j, col) in self.hessenberg.iter().enumerate() {
            for (i, &h) in col.iter().enumerate() {
                m[i][j] = h;
            }
        }
        m
    }
}

/// Solves the upper-triangular system stored column-wise in `r`.
fn back_substitute(r: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let k = r.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= r[j][i] * y[j];
        }
        y[i] = s / r[i][i];
    }
    y
}

fn combine(v: &PiecewiseFun, basis: &[PiecewiseFun], y: &[f64]) -> PiecewiseFun {
    y.iter()
        .zip(basis)
        .fold(v.clone(), |acc, (&c, q)| PiecewiseFun::axpy(c, q, &acc))
        .chop(ITERATE_CHOP_TOL)
}

/// Restarted GMRES on `T v = r0` in `W0`; works for non-self-adjoint `L`.
///
/// Residual norms come from the Givens-rotated least-squares problem. At a
/// restart the residual is recomputed explicitly as `Pi (r0 - T v)`.
pub fn gmres(ctx: &OperatorContext, opts: &KrylovOptions) -> Result<KrylovReport> {
    opts.validate()?;
    let start = Instant::now();
    let prep = ctx.prepare_rhs()?;
    let v2 = prep.v2;
    let u_of = |v: &PiecewiseFun| apply_r(&(v + &v2));
    let r0 = prep.r0;
    let beta_orig = r0.norm_l2();
    let done = |r: f64, v_norm: f64| opts.stopping.met(opts.tol, beta_orig, r, v_norm);
    let m = opts.restart.unwrap_or(usize::MAX);

    let mut rec = Recorder::new(ctx, opts, start);
    let mut v = PiecewiseFun::zero();
    let u0 = rec.wants_iterates().then(|| u_of(&v));
    rec.record(beta_orig, 0.0, u0.as_ref(), Some(&r0));

    let mut converged = done(beta_orig, 0.0);
    let mut total = 0;
    let mut restarts = Vec::new();
    while !converged && total < opts.max_iter {
        let r = if total == 0 {
            r0.clone()
        } else {
            restarts.push(total);
            let r = projection_w0(&(&r0 - &ctx.apply_t(&v)?)).chop(ITERATE_CHOP_TOL);
            if done(r.norm_l2(), v.norm_l2()) {
                converged = true;
                break;
            }
            r
        };
        let mut fact = ArnoldiFactorization::new(&r)?;
        let mut rotations: Vec<(f64, f64)> = Vec::new();
        let mut rmat: Vec<Vec<f64>> = Vec::new();
        let mut g = vec![fact.beta0];
        let v_norm2 = v.inner_product(&v);
        let mut v_dots = vec![fact.basis[0].inner_product(&v)];
        loop {
            let step = fact.step(ctx)?;
            let j = fact.columns() - 1;
            let mut col = fact.hessenberg[j].clone();
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let t = c * col[i] + s * col[i + 1];
                col[i + 1] = -s * col[i] + c * col[i + 1];
                col[i] = t;
            }
            let h = col[j].hypot(col[j + 1]);
            let (c, s) = if h == 0.0 { (1.0, 0.0) } else { (col[j] / h, col[j + 1] / h) };
            col[j] = h;
            col.truncate(j + 1);
            rotations.push((c, s));
            rmat.push(col);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            total += 1;

            let rho = g[j + 1].abs();
            let y = back_substitute(&rmat, &g);
            if step == ArnoldiStep::Extended {
                v_dots.push(fact.basis[j + 1].inner_product(&v));
            }
            let cross: f64 = y.iter().zip(&v_dots).map(|(a, b)| a * b).sum();
            let ynorm2: f64 = y.iter().map(|a| a * a).sum();
            let vk_norm = (v_norm2 + 2.0 * cross + ynorm2).max(0.0).sqrt();
            let uk = rec
                .wants_iterates()
                .then(|| u_of(&combine(&v, &fact.basis, &y)));
            rec.record(rho, vk_norm, uk.as_ref(), None);

            converged = step == ArnoldiStep::LuckyBreakdown || done(rho, vk_norm);
            if converged || total >= opts.max_iter || fact.columns() >= m {
                v = combine(&v, &fact.basis, &y);
                break;
            }
        }
    }

    let u = u_of(&v);
    Ok(rec.finish(Method::Gmres, u, v, converged, restarts, None))
}
