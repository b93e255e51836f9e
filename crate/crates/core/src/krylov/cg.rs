use std::time::Instant;

use super::{require_coercive, KrylovOptions, KrylovReport, Method, Recorder, ITERATE_CHOP_TOL};
use crate::chebfun::PiecewiseFun;
use crate::error::{Error, Result};
use crate::operator::OperatorContext;

/// Conjugate gradients for `Pi_V0 L u = Pi_V0 f` in the space `V0` of
/// polynomials of degree `n` vanishing at `+-1`, with no preconditioner.
///
/// This is the baseline the preconditioned methods are compared against:
/// its convergence degrades as `n` grows because `L` is unbounded. In exact
/// arithmetic it terminates after `dim V0 = n - 1` steps, so the iteration
/// count is capped there and reaching it counts as convergence.
pub fn cg_unpreconditioned(ctx: &OperatorContext, n: usize, opts: &KrylovOptions) -> Result<KrylovReport> {
    opts.validate()?;
    require_coercive(ctx, "cg")?;
    let start = Instant::now();
    let dim = ctx.v0_basis(n)?.len();
    let f = ctx.problem().f();
    let f_proj = ctx.projection_v0(f, n)?;
    let proj_residual = (f - &f_proj).norm_l2();
    let apply = |p: &PiecewiseFun| ctx.projection_v0(&ctx.apply_l(p), n);

    let mut rec = Recorder::new(ctx, opts, start);
    let mut r = f_proj;
    let mut u = PiecewiseFun::zero();
    let mut dir = r.clone();
    let mut rr = r.inner_product(&r);
    let r0_norm = rr.sqrt();
    let done = |r: f64, v_norm: f64| opts.stopping.met(opts.tol, r0_norm, r, v_norm);

    rec.record(r0_norm, 0.0, Some(&u), Some(&r));
    rec.direction(&dir);

    let mut converged = done(r0_norm, 0.0);
    let mut k = 0;
    while !converged && k < opts.max_iter.min(dim) {
        let ap = apply(&dir)?;
        let energy = ctx.bilinear_unchecked(&dir, &dir);
        if !(energy > 0.0) {
            return Err(Error::NotPositiveDefinite { iteration: k, value: energy });
        }
        let alpha = rr / energy;
        u = PiecewiseFun::axpy(alpha, &dir, &u).chop(ITERATE_CHOP_TOL);
        r = PiecewiseFun::axpy(-alpha, &ap, &r).chop(ITERATE_CHOP_TOL);
        let rr_new = r.inner_product(&r);
        let beta = rr_new / rr;
        dir = PiecewiseFun::axpy(beta, &dir, &r).chop(ITERATE_CHOP_TOL);
        rr = rr_new;
        k += 1;

        rec.alphas.push(alpha);
        rec.betas.push(beta);
        let u_norm = u.norm_l2();
        rec.record(rr.sqrt(), u_norm, Some(&u), Some(&r));
        rec.direction(&dir);
        converged = done(rr.sqrt(), u_norm) || k == dim;
    }

    let v = u.clone();
    Ok(rec.finish(Method::Cg, u, v, converged, Vec::new(), Some(proj_residual)))
}
