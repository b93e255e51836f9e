use std::time::Instant;

use super::{require_self_adjoint, KrylovOptions, KrylovReport, Method, Recorder, ITERATE_CHOP_TOL};
use crate::chebfun::PiecewiseFun;
use crate::error::Result;
use crate::operator::{apply_r, OperatorContext};

/// MINRES (Paige–Saunders) on `T v = r0` in `W0` for self-adjoint but
/// possibly indefinite `L`.
///
/// Uses the Lanczos three-term recurrence and two Givens rotations of
/// history, so memory does not grow with the iteration count. The recorded
/// residual is the short-recurrence estimate `|eta_k|`.
pub fn minres(ctx: &OperatorContext, opts: &KrylovOptions) -> Result<KrylovReport> {
    opts.validate()?;
    require_self_adjoint(ctx, "minres")?;
    let start = Instant::now();
    let prep = ctx.prepare_rhs()?;
    let v2 = prep.v2;
    let u_of = |v: &PiecewiseFun| apply_r(&(v + &v2));
    let b = prep.r0;
    let beta1 = b.norm_l2();
    let done = |r: f64, v_norm: f64| opts.stopping.met(opts.tol, beta1, r, v_norm);

    let mut rec = Recorder::new(ctx, opts, start);
    let mut v = PiecewiseFun::zero();
    let u0 = rec.wants_iterates().then(|| u_of(&v));
    rec.record(beta1, 0.0, u0.as_ref(), Some(&b));

    let mut converged = done(beta1, 0.0);
    if converged {
        let u = u_of(&v);
        return Ok(rec.finish(Method::Minres, u, v, true, Vec::new(), None));
    }

    let mut q_prev = PiecewiseFun::zero();
    let mut q = b.scale(1.0 / beta1);
    let mut beta_k = 0.0;
    let (mut c1, mut s1, mut c2, mut s2) = (1.0, 0.0, 1.0, 0.0);
    let mut d1 = PiecewiseFun::zero();
    let mut d2 = PiecewiseFun::zero();
    let mut eta = beta1;
    let mut k = 0;
    while !converged && k < opts.max_iter {
        let mut z = ctx.apply_t(&q)?;
        if beta_k != 0.0 {
            z = PiecewiseFun::axpy(-beta_k, &q_prev, &z);
        }
        let alpha = q.inner_product(&z);
        z = PiecewiseFun::axpy(-alpha, &q, &z);
        let beta_next = z.norm_l2();

        // Apply the two previous rotations to the new tridiagonal column.
        let eps = s2 * beta_k;
        let delta0 = c2 * beta_k;
        let delta = c1 * delta0 + s1 * alpha;
        let gamma_bar = -s1 * delta0 + c1 * alpha;
        let gamma = gamma_bar.hypot(beta_next);
        if gamma == 0.0 {
            break;
        }
        let (c, s) = (gamma_bar / gamma, beta_next / gamma);

        let mut d = PiecewiseFun::axpy(-delta, &d1, &q);
        if eps != 0.0 {
            d = PiecewiseFun::axpy(-eps, &d2, &d);
        }
        let d = d.scale(1.0 / gamma);
        v = PiecewiseFun::axpy(c * eta, &d, &v).chop(ITERATE_CHOP_TOL);
        eta *= -s;
        k += 1;

        rec.alphas.push(alpha);
        rec.betas.push(beta_next);
        let uk = rec.wants_iterates().then(|| u_of(&v));
        let v_norm = v.norm_l2();
        rec.record(eta.abs(), v_norm, uk.as_ref(), None);

        d2 = d1;
        d1 = d;
        (c2, s2, c1, s1) = (c1, s1, c, s);
        converged = done(eta.abs(), v_norm);
        // An invariant Krylov space means the last step solved the system.
        if beta_next <= 1e-13 * alpha.abs().max(beta_k) {
            converged = true;
            break;
        }
        q_prev = q;
        q = z.scale(1.0 / beta_next);
        beta_k = beta_next;
    }

    let u = u_of(&v);
    Ok(rec.finish(Method::Minres, u, v, converged, Vec::new(), None))
}
