use std::time::Instant;

use super::{require_coercive, KrylovOptions, KrylovReport, Method, Recorder, ITERATE_CHOP_TOL};
use crate::chebfun::PiecewiseFun;
use crate::error::{Error, Result};
use crate::operator::{apply_r, OperatorContext};

/// Preconditioned conjugate gradients on `T v = r0` in `W0`.
///
/// The step length uses the energy of the preimage, `B[R p, R p]`, which
/// equals `<T p, p>` for zero-mean `p` but is computed without the outer
/// integrations. A non-positive energy aborts with
/// [`Error::NotPositiveDefinite`].
pub fn pcg(ctx: &OperatorContext, opts: &KrylovOptions) -> Result<KrylovReport> {
    opts.validate()?;
    require_coercive(ctx, "pcg")?;
    let start = Instant::now();
    let prep = ctx.prepare_rhs()?;
    let v2 = prep.v2;
    let u_of = |v: &PiecewiseFun| apply_r(&(v + &v2));

    let mut rec = Recorder::new(ctx, opts, start);
    let mut r = prep.r0;
    let mut v = PiecewiseFun::zero();
    let mut dir = r.clone();
    let mut rr = r.inner_product(&r);
    let r0_norm = rr.sqrt();
    let done = |r: f64, v_norm: f64| opts.stopping.met(opts.tol, r0_norm, r, v_norm);

    let u0 = rec.wants_iterates().then(|| u_of(&v));
    rec.record(r0_norm, 0.0, u0.as_ref(), Some(&r));
    rec.direction(&dir);

    let mut converged = done(r0_norm, 0.0);
    let mut k = 0;
    while !converged && k < opts.max_iter {
        let tp = ctx.apply_t(&dir)?;
        let energy = ctx.energy_of_preimage(&dir);
        if !(energy > 0.0) {
            return Err(Error::NotPositiveDefinite { iteration: k, value: energy });
        }
        let alpha = rr / energy;
        v = PiecewiseFun::axpy(alpha, &dir, &v).chop(ITERATE_CHOP_TOL);
        r = PiecewiseFun::axpy(-alpha, &tp, &r).chop(ITERATE_CHOP_TOL);
        let rr_new = r.inner_product(&r);
        let beta = rr_new / rr;
        dir = PiecewiseFun::axpy(beta, &dir, &r).chop(ITERATE_CHOP_TOL);
        rr = rr_new;
        k += 1;

        rec.alphas.push(alpha);
        rec.betas.push(beta);
        let uk = rec.wants_iterates().then(|| u_of(&v));
        let v_norm = v.norm_l2();
        rec.record(rr.sqrt(), v_norm, uk.as_ref(), Some(&r));
        rec.direction(&dir);
        converged = done(rr.sqrt(), v_norm);
    }

    let u = u_of(&v);
    Ok(rec.finish(Method::Pcg, u, v, converged, Vec::new(), None))
}
