//! The boundary value problem, its differential operator and bilinear form,
//! the integral preconditioner `R`, the projections onto `W0` (zero-mean
//! functions) and `V0` (polynomials vanishing at `+-1`), and the composed
//! operator `T = Pi R* L R Pi` on which the preconditioned iterations run.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::chebfun::{chebfun, PiecewiseFun, DEFAULT_TOL, MAX_DEGREE};
use crate::error::{Error, Result};

/// `||R||_op` for the indefinite integral on `L2(-1, 1)`.
pub const R_OP_NORM: f64 = 4.0 / PI;

/// Chebyshev points per piece used when estimating sup/inf of coefficients.
const SAMPLE_POINTS: usize = 2048;

/// Tolerance for "vanishes at +-1" preconditions.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// `|b|` below this everywhere makes the problem self-adjoint.
const SELF_ADJOINT_TOL: f64 = 1e-13;

/// Relative rounding allowance when checking `c >= 0` by sampling.
const NONNEGATIVE_SLACK: f64 = 1e-13;

/// `-(a u')' + b u' + c u = f` on `(-1, 1)` with `u(+-1) = 0`.
#[derive(Debug, Clone)]
pub struct BvpProblem {
    a: PiecewiseFun,
    b: PiecewiseFun,
    c: PiecewiseFun,
    f: PiecewiseFun,
    self_adjoint: bool,
    coercive: bool,
}

impl BvpProblem {
    /// Builds a problem. `self_adjoint` is detected from `b`; `coercive`
    /// (`a > 0`, `c >= 0`) is inferred by sampling and can be overridden with
    /// [`Self::with_coercive`].
    pub fn new(a: PiecewiseFun, b: PiecewiseFun, c: PiecewiseFun, f: PiecewiseFun) -> Self {
        let self_adjoint = b.sampled_max_abs(SAMPLE_POINTS) < SELF_ADJOINT_TOL;
        let ((amin, _), _) = a.sampled_extrema(SAMPLE_POINTS);
        let ((cmin, _), (cmax, _)) = c.sampled_extrema(SAMPLE_POINTS);
        // Nonnegative coefficients such as |cos| sample as -1e-17 at their zeros.
        let coercive = amin > 0.0 && cmin >= -NONNEGATIVE_SLACK * cmax.abs().max(1.0);
        Self {
            a,
            b,
            c,
            f,
            self_adjoint,
            coercive,
        }
    }

    /// `-u'' = f`.
    pub fn laplacian(f: PiecewiseFun) -> Self {
        Self::new(
            PiecewiseFun::constant(1.0),
            PiecewiseFun::zero(),
            PiecewiseFun::zero(),
            f,
        )
    }

    pub fn with_coercive(mut self, coercive: bool) -> Self {
        self.coercive = coercive;
        self
    }

    /// Same operator, new right-hand side.
    pub fn with_rhs(&self, f: PiecewiseFun) -> Self {
        Self { f, ..self.clone() }
    }

    pub fn a(&self) -> &PiecewiseFun {
        &self.a
    }
    pub fn b(&self) -> &PiecewiseFun {
        &self.b
    }
    pub fn c(&self) -> &PiecewiseFun {
        &self.c
    }
    pub fn f(&self) -> &PiecewiseFun {
        &self.f
    }
    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }
    pub fn is_coercive(&self) -> bool {
        self.coercive
    }
}

/// `(R p)(x) = int_{-1}^x p`.
pub fn apply_r(p: &PiecewiseFun) -> PiecewiseFun {
    p.indefinite_integral()
}

/// `(R* p)(x) = int_x^1 p`.
pub fn apply_r_star(p: &PiecewiseFun) -> PiecewiseFun {
    p.adjoint_integral()
}

/// Orthogonal projection onto zero-mean functions: `p - mean(p)`.
pub fn projection_w0(p: &PiecewiseFun) -> PiecewiseFun {
    p.add_constant(-p.mean())
}

/// Output of [`OperatorContext::solve_ancillary`].
#[derive(Debug, Clone)]
pub struct AncillarySolution {
    /// Zero-mean correction with `[R R* L R v2](1) = [R R* f](1)`.
    pub v2: PiecewiseFun,
    /// `[R R* L R w](1)` for the chosen trial function (0 when no correction
    /// was needed).
    pub eta: f64,
    /// `[R R* f](1) = int (s + 1) f(s) ds`.
    pub rho: f64,
    /// Name of the trial function used, if any.
    pub trial: Option<&'static str>,
}

/// Right-hand side ready for the preconditioned iterations.
#[derive(Debug, Clone)]
pub struct PreparedRhs {
    /// `Pi R* g`, the Krylov start function.
    pub r0: PiecewiseFun,
    pub v2: PiecewiseFun,
    /// `f - L R v2`.
    pub g: PiecewiseFun,
    pub ancillary: AncillarySolution,
}

/// Trial functions for the ancillary problem, all with zero mean.
const TRIAL_FUNCTIONS: [&str; 4] = ["x", "x^2 - 1/3", "x^3 - 3x/5", "sin(pi x)"];

fn trial_function(i: usize) -> PiecewiseFun {
    match i {
        0 => PiecewiseFun::identity(),
        // T_2 = 2x^2 - 1, so x^2 - 1/3 = T_2/2 + 1/6.
        1 => PiecewiseFun::from_coeffs(vec![1.0 / 6.0, 0.0, 0.5]),
        // x^3 = (3 T_1 + T_3)/4.
        2 => PiecewiseFun::from_coeffs(vec![0.0, 0.75 - 0.6, 0.0, 0.25]),
        _ => chebfun(|x| (PI * x).sin()).expect("sin(pi x) resolves"),
    }
}

/// A problem together with the tolerances and caches its operators need.
#[derive(Debug)]
pub struct OperatorContext {
    problem: BvpProblem,
    tol: f64,
    v0_cache: Mutex<HashMap<usize, Arc<Vec<PiecewiseFun>>>>,
}

impl Clone for OperatorContext {
    fn clone(&self) -> Self {
        let cache = self.v0_cache.lock().map(|c| c.clone()).unwrap_or_default();
        Self {
            problem: self.problem.clone(),
            tol: self.tol,
            v0_cache: Mutex::new(cache),
        }
    }
}

impl OperatorContext {
    pub fn new(problem: BvpProblem) -> Self {
        Self {
            problem,
            tol: DEFAULT_TOL,
            v0_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_tol(problem: BvpProblem, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self {
            tol,
            ..Self::new(problem)
        })
    }

    pub fn problem(&self) -> &BvpProblem {
        &self.problem
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `L u = -(a u')' + b u' + c u`, with derivatives taken piecewise.
    pub fn apply_l(&self, u: &PiecewiseFun) -> PiecewiseFun {
        let p = &self.problem;
        let du = u.differentiate();
        let mut out = -&p.a.multiply(&du).differentiate();
        if !p.b.is_zero() {
            out = &out + &p.b.multiply(&du);
        }
        if !p.c.is_zero() {
            out = &out + &p.c.multiply(u);
        }
        out
    }

    fn check_boundary(name: &str, u: &PiecewiseFun) -> Result<()> {
        let (l, r) = (u.eval(-1.0), u.eval(1.0));
        if l.abs() > BOUNDARY_TOL || r.abs() > BOUNDARY_TOL {
            return Err(Error::Contract(format!(
                "{name} must vanish at +-1 (got u(-1) = {l:e}, u(1) = {r:e})"
            )));
        }
        Ok(())
    }

    /// `B[phi, psi] = int a phi' psi' + b phi' psi + c phi psi` for `phi`, `psi`
    /// vanishing at `+-1`.
    pub fn bilinear_form(&self, phi: &PiecewiseFun, psi: &PiecewiseFun) -> Result<f64> {
        Self::check_boundary("phi", phi)?;
        Self::check_boundary("psi", psi)?;
        Ok(self.bilinear_unchecked(phi, psi))
    }

    pub(crate) fn bilinear_unchecked(&self, phi: &PiecewiseFun, psi: &PiecewiseFun) -> f64 {
        let p = &self.problem;
        let dphi = phi.differentiate();
        let dpsi = psi.differentiate();
        let mut s = p.a.multiply(&dphi).inner_product(&dpsi);
        if !p.b.is_zero() {
            s += p.b.multiply(&dphi).inner_product(psi);
        }
        if !p.c.is_zero() {
            s += p.c.multiply(phi).inner_product(psi);
        }
        s
    }

    /// `B[R p, R p]`, using `(R p)' = p` exactly.
    pub fn energy_of_preimage(&self, p: &PiecewiseFun) -> f64 {
        let pr = &self.problem;
        let rp = apply_r(p);
        let mut s = pr.a.multiply(p).inner_product(p);
        if !pr.b.is_zero() {
            s += pr.b.multiply(p).inner_product(&rp);
        }
        if !pr.c.is_zero() {
            s += pr.c.multiply(&rp).inner_product(&rp);
        }
        s
    }

    /// `R* L R v`, evaluated in weak form:
    ///
    /// ```text
    /// R* L R v = a v - (a v)(1) + R*(b v + c R v)
    /// ```
    ///
    /// which is `int_x^1` of `L R v` with the flux term integrated exactly,
    /// so no derivative (and no jump of `a v` at a breakpoint) is lost.
    pub fn rstar_l_r(&self, v: &PiecewiseFun) -> PiecewiseFun {
        let p = &self.problem;
        let av = p.a.multiply(v);
        let flux = av.add_constant(-av.eval(1.0));
        let mut lower: Option<PiecewiseFun> = None;
        if !p.b.is_zero() {
            lower = Some(p.b.multiply(v));
        }
        if !p.c.is_zero() {
            let crv = p.c.multiply(&apply_r(v));
            lower = Some(match lower {
                Some(l) => &l + &crv,
                None => crv,
            });
        }
        match lower {
            Some(l) => &flux + &apply_r_star(&l),
            None => flux,
        }
    }

    /// `T p = Pi R* L R Pi p`.
    pub fn apply_t(&self, p: &PiecewiseFun) -> Result<PiecewiseFun> {
        let w = projection_w0(p);
        let out = projection_w0(&self.rstar_l_r(&w)).chop(self.tol);
        ensure_resolved(out)
    }

    /// Orthonormal basis of `V0 = {v in P_n : v(+-1) = 0}`, built once per `n`
    /// by Gram–Schmidt on `(1 - x^2) T_k`, `k = 0..=n-2`.
    pub fn v0_basis(&self, n: usize) -> Result<Arc<Vec<PiecewiseFun>>> {
        if n < 2 {
            return Err(Error::Contract(format!(
                "V0 degree must be at least 2, got {n}"
            )));
        }
        let mut cache = self.v0_cache.lock().expect("v0 cache poisoned");
        if let Some(b) = cache.get(&n) {
            return Ok(Arc::clone(b));
        }
        let bubble = PiecewiseFun::from_coeffs(vec![0.5, 0.0, -0.5]);
        let mut basis: Vec<PiecewiseFun> = Vec::with_capacity(n - 1);
        for k in 0..=n - 2 {
            let mut tk = vec![0.0; k + 1];
            tk[k] = 1.0;
            let mut q = bubble.multiply(&PiecewiseFun::from_coeffs(tk));
            // Two passes of modified Gram–Schmidt.
            for _ in 0..2 {
                for e in &basis {
                    let h = e.inner_product(&q);
                    q = PiecewiseFun::axpy(-h, e, &q);
                }
            }
            let nrm = q.norm_l2();
            basis.push(q.scale(1.0 / nrm));
        }
        let basis = Arc::new(basis);
        cache.insert(n, Arc::clone(&basis));
        Ok(basis)
    }

    /// L2-orthogonal projection onto `V0` of degree `n`.
    pub fn projection_v0(&self, p: &PiecewiseFun, n: usize) -> Result<PiecewiseFun> {
        let basis = self.v0_basis(n)?;
        let mut coeffs = vec![0.0; n + 1];
        for e in basis.iter() {
            let w = e.inner_product(p);
            let ec = e.pieces()[0].coeffs();
            for (c, x) in coeffs.iter_mut().zip(ec) {
                *c += w * x;
            }
        }
        Ok(PiecewiseFun::from_coeffs(coeffs).chop(self.tol))
    }

    /// Upper bound on the condition number of `T` restricted to `W0`:
    /// `(sup|a| + sup|c| ||R||^2) / inf|a|`, with sup and inf estimated on
    /// 2049 Chebyshev points per piece and refined by a local search around
    /// the best sample.
    pub fn condition_bound(&self) -> Result<f64> {
        let p = &self.problem;
        if !p.self_adjoint {
            return Err(Error::Contract(
                "condition bound needs a self-adjoint problem (b = 0)".into(),
            ));
        }
        if !p.coercive {
            return Err(Error::Contract(
                "condition bound needs a coercive problem (a > 0, c >= 0)".into(),
            ));
        }
        let a_max = extremum(&p.a, 1.0);
        let a_min = -extremum(&p.a, -1.0);
        let c_max = extremum(&p.c, 1.0).max(extremum(&p.c, -1.0));
        let a_sup = a_max.abs().max(a_min.abs());
        let a_inf = if a_min > 0.0 { a_min } else { 0.0 };
        if a_inf <= 0.0 {
            return Err(Error::Contract(format!(
                "inf |a| must be positive, sampled {a_min:e}"
            )));
        }
        Ok((a_sup + c_max * R_OP_NORM * R_OP_NORM) / a_inf)
    }

    /// Finds a zero-mean `v2` so that `g = f - L R v2` has `[R R* g](1) = 0`.
    pub fn solve_ancillary(&self) -> Result<AncillarySolution> {
        let f = &self.problem.f;
        let rho = apply_r_star(f).definite_integral();
        let fnorm = f.norm_l2();
        if rho.abs() <= self.tol * fnorm {
            return Ok(AncillarySolution {
                v2: PiecewiseFun::zero(),
                eta: 0.0,
                rho,
                trial: None,
            });
        }
        let mut tried = Vec::new();
        for (i, name) in TRIAL_FUNCTIONS.iter().enumerate() {
            let w = trial_function(i);
            let eta = self.rstar_l_r(&w).definite_integral();
            tried.push(format!("{name} (eta = {eta:e})"));
            if eta.abs() > 1e-10 * fnorm {
                return Ok(AncillarySolution {
                    v2: w.scale(rho / eta),
                    eta,
                    rho,
                    trial: Some(name),
                });
            }
        }
        Err(Error::AncillaryBreakdown { tried })
    }

    /// Krylov start function `r0 = Pi R* g` with `g = f - L R v2`.
    pub fn prepare_rhs(&self) -> Result<PreparedRhs> {
        let ancillary = self.solve_ancillary()?;
        let f = &self.problem.f;
        let rstar_f = apply_r_star(f);
        let (g, r0) = if ancillary.v2.is_zero() {
            (f.clone(), projection_w0(&rstar_f))
        } else {
            let v2 = &ancillary.v2;
            let g = f - &self.apply_l(&apply_r(v2));
            let r0 = projection_w0(&(&rstar_f - &self.rstar_l_r(v2)));
            (g, r0)
        };
        Ok(PreparedRhs {
            r0: ensure_resolved(r0.chop(self.tol))?,
            v2: ancillary.v2.clone(),
            g,
            ancillary,
        })
    }
}

pub(crate) fn ensure_resolved(p: PiecewiseFun) -> Result<PiecewiseFun> {
    let bad: Vec<usize> = p
        .pieces()
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_resolved() || s.degree() > MAX_DEGREE)
        .map(|(i, _)| i)
        .collect();
    if bad.is_empty() {
        Ok(p)
    } else {
        Err(Error::Unresolved {
            partial: Box::new(p),
            pieces: bad,
            cap: MAX_DEGREE,
        })
    }
}

/// `max sign * p(x)` estimated by dense sampling plus golden-section
/// refinement around the best sample.
fn extremum(p: &PiecewiseFun, sign: f64) -> f64 {
    let g = |x: f64| sign * p.eval(x);
    let ((min, xmin), (max, xmax)) = p.sampled_extrema(SAMPLE_POINTS);
    let (best, xb) = if sign > 0.0 { (max, xmax) } else { (-min, xmin) };
    // Bracket: the piece containing xb, narrowed to a few grid spacings.
    let breaks = p.breakpoints();
    let idx = breaks.partition_point(|&b| b <= xb).clamp(1, breaks.len() - 1);
    let (lo, hi) = (breaks[idx - 1], breaks[idx]);
    let spacing = (hi - lo) * PI / SAMPLE_POINTS as f64;
    let mut l = (xb - 2.0 * spacing).max(lo);
    let mut r = (xb + 2.0 * spacing).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = r - inv_phi * (r - l);
    let mut x2 = l + inv_phi * (r - l);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if g1 < g2 {
            l = x1;
            x1 = x2;
            g1 = g2;
            x2 = l + inv_phi * (r - l);
            g2 = g(x2);
        } else {
            r = x2;
            x2 = x1;
            g2 = g1;
            x1 = r - inv_phi * (r - l);
            g1 = g(x1);
        }
    }
    best.max(g1).max(g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebfun::construct_adaptive;

    fn fun(f: impl Fn(f64) -> f64) -> PiecewiseFun {
        chebfun(f).unwrap()
    }

    fn ctx(a: PiecewiseFun, c: PiecewiseFun, f: PiecewiseFun) -> OperatorContext {
        OperatorContext::new(BvpProblem::new(a, PiecewiseFun::zero(), c, f))
    }

    fn laplace(f: PiecewiseFun) -> OperatorContext {
        OperatorContext::new(BvpProblem::laplacian(f))
    }

    fn one_minus_x2() -> PiecewiseFun {
        PiecewiseFun::from_coeffs(vec![0.5, 0.0, -0.5])
    }

    fn exact_laplace() -> PiecewiseFun {
        fun(|x| (x.powi(4) - 6.0 * x * x + 5.0) / 12.0)
    }

    fn max_dev(p: &PiecewiseFun, f: impl Fn(f64) -> f64) -> f64 {
        (0..201)
            .map(|i| -1.0 + i as f64 / 100.0)
            .map(|x| (p.eval(x) - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn problem_flags() {
        let p = BvpProblem::laplacian(one_minus_x2());
        assert!(p.is_self_adjoint() && p.is_coercive());
        let q = BvpProblem::new(
            PiecewiseFun::constant(1.0),
            PiecewiseFun::constant(1e-3),
            PiecewiseFun::constant(-1.0),
            one_minus_x2(),
        );
        assert!(!q.is_self_adjoint() && !q.is_coercive());
        assert!(q.with_coercive(true).is_coercive());
    }

    #[test]
    fn apply_l_examples() {
        let c = laplace(one_minus_x2());
        let lu = c.apply_l(&exact_laplace());
        assert!(max_dev(&lu, |x| 1.0 - x * x) < 1e-13);

        let c = ctx(PiecewiseFun::constant(1.0), PiecewiseFun::constant(1.0), one_minus_x2());
        assert!(c.apply_l(&PiecewiseFun::zero()).is_zero());

        let c = ctx(fun(|x| 1.0 + x * x), PiecewiseFun::zero(), one_minus_x2());
        let lu = c.apply_l(&one_minus_x2());
        assert!(max_dev(&lu, |x| 2.0 + 6.0 * x * x) < 1e-12);
    }

    #[test]
    fn bilinear_form_examples() {
        let c = laplace(one_minus_x2());
        let b = c.bilinear_form(&one_minus_x2(), &one_minus_x2()).unwrap();
        assert!((b - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(c.bilinear_form(&PiecewiseFun::zero(), &one_minus_x2()).unwrap(), 0.0);
        let u = exact_laplace();
        // int (1 - x^2)(x^4 - 6x^2 + 5)/12 = (-2/7 + 14/5 - 22/3 + 10)/12 = 136/315.
        let buu = c.bilinear_form(&u, &u).unwrap();
        assert!((buu - 136.0 / 315.0).abs() < 1e-12, "{buu}");
        assert!((buu - one_minus_x2().inner_product(&u)).abs() < 1e-14);
        let err = c.bilinear_form(&PiecewiseFun::constant(1.0), &u).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn r_and_r_star() {
        let one = PiecewiseFun::constant(1.0);
        assert!(max_dev(&apply_r(&one), |x| x + 1.0) < 1e-15);
        assert!(max_dev(&apply_r_star(&one), |x| 1.0 - x) < 1e-15);
        let p = fun(|x| (3.0 * x).cos() + x.powi(5));
        let back = apply_r(&p).differentiate();
        assert!((&back - &p).norm_l2() < 1e-12);
    }

    #[test]
    fn projection_w0_examples() {
        assert!(projection_w0(&PiecewiseFun::constant(1.0)).is_zero());
        let x = PiecewiseFun::identity();
        assert_eq!(projection_w0(&x), x);
        let t2 = PiecewiseFun::from_coeffs(vec![0.0, 0.0, 1.0]);
        let p = projection_w0(&t2);
        assert!((p.pieces()[0].coeffs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(p.mean().abs() < 1e-15);
    }

    #[test]
    fn projection_v0_examples() {
        let c = laplace(one_minus_x2());
        let p = c.projection_v0(&one_minus_x2(), 4).unwrap();
        assert!((&p - &one_minus_x2()).norm_l2() < 1e-12);
        let p = c.projection_v0(&PiecewiseFun::constant(1.0), 2).unwrap();
        assert!(max_dev(&p, |x| 1.25 * (1.0 - x * x)) < 1e-14);
        let g = fun(|x| (2.0 * x).exp());
        let once = c.projection_v0(&g, 8).unwrap();
        let twice = c.projection_v0(&once, 8).unwrap();
        assert!((&once - &twice).norm_l2() < 1e-12);
        assert!(once.eval(1.0).abs() < 1e-10 && once.eval(-1.0).abs() < 1e-10);
        assert!(once.max_degree() <= 8);
        let resid = &g - &once;
        for e in c.v0_basis(8).unwrap().iter() {
            assert!(resid.inner_product(e).abs() < 1e-10);
        }
        assert!(matches!(c.projection_v0(&g, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn apply_t_laplacian_is_projection() {
        let c = laplace(one_minus_x2());
        let p = fun(|x| (2.0 * x).sin() + x * x);
        let tp = c.apply_t(&p).unwrap();
        assert!((&tp - &projection_w0(&p)).norm_l2() < 1e-11);
        assert!(c.apply_t(&PiecewiseFun::zero()).unwrap().is_zero());
    }

    #[test]
    fn apply_t_self_adjoint_and_mean_zero() {
        let c = ctx(fun(|x| 2.0 + (PI * x).cos()), fun(|x| 1.0 + x * x), one_minus_x2());
        let p = projection_w0(&fun(|x| (3.0 * x).exp()));
        let q = projection_w0(&fun(|x| (5.0 * x).cos() + x));
        let tp = c.apply_t(&p).unwrap();
        let tq = c.apply_t(&q).unwrap();
        assert!((tp.inner_product(&q) - p.inner_product(&tq)).abs() < 1e-10);
        assert!(tp.mean().abs() < 1e-12);
    }

    #[test]
    fn condition_bound_examples() {
        let c = ctx(fun(|x| 2.0 + (PI * x).cos()), PiecewiseFun::zero(), one_minus_x2());
        assert!((c.condition_bound().unwrap() - 3.0).abs() < 1e-12);
        let k = 2.0 * (PI / 4.0).powi(2);
        let c = ctx(PiecewiseFun::constant(1.0), PiecewiseFun::constant(k), one_minus_x2());
        assert!((c.condition_bound().unwrap() - 3.0).abs() < 1e-12);
        let c = laplace(one_minus_x2());
        assert!((c.condition_bound().unwrap() - 1.0).abs() < 1e-15);
        let nc = OperatorContext::new(BvpProblem::laplacian(one_minus_x2()).with_coercive(false));
        assert!(matches!(nc.condition_bound(), Err(Error::Contract(_))));
    }

    #[test]
    fn condition_bound_interior_maximum() {
        // sup of 1 + |sin(pi x^2)| sits at x = 1/sqrt(2), away from the grid.
        let a = construct_adaptive(|x| 1.0 + (PI * x * x).sin().abs(), &[-1.0, 1.0], 1e-15).unwrap();
        let c = ctx(a, PiecewiseFun::zero(), one_minus_x2());
        assert!((c.condition_bound().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ancillary_laplacian() {
        let c = laplace(one_minus_x2());
        let anc = c.solve_ancillary().unwrap();
        assert!((anc.rho - 4.0 / 3.0).abs() < 1e-14);
        assert!((anc.eta + 2.0).abs() < 1e-14);
        assert!(max_dev(&anc.v2, |x| -2.0 * x / 3.0) < 1e-14);
        assert!(anc.v2.mean().abs() < 1e-15);

        let prep = c.prepare_rhs().unwrap();
        assert!(max_dev(&prep.g, |x| 1.0 / 3.0 - x * x) < 1e-13);
        assert!(max_dev(&prep.r0, |x| (x.powi(3) - x) / 3.0) < 1e-14);
        let check = apply_r(&apply_r_star(&prep.g));
        assert!(check.eval(1.0).abs() < 1e-10 && check.eval(-1.0).abs() < 1e-10);
    }

    #[test]
    fn ancillary_not_needed() {
        // int (s+1) f = 0 for f = x - 1/3.
        let f = PiecewiseFun::from_coeffs(vec![-1.0 / 3.0, 1.0]);
        let c = laplace(f.clone());
        let anc = c.solve_ancillary().unwrap();
        assert!(anc.v2.is_zero());
        let prep = c.prepare_rhs().unwrap();
        assert_eq!(prep.g, f);
    }

    #[test]
    fn ancillary_variable_coefficient() {
        let c = ctx(fun(|x| 2.0 + (PI * x).cos()), PiecewiseFun::zero(), one_minus_x2());
        let anc = c.solve_ancillary().unwrap();
        assert_eq!(anc.trial, Some("x"));
        assert!((anc.eta + 2.0).abs() < 1e-13);
    }

    #[test]
    fn ancillary_breakdown() {
        // With a = 0 every trial function gives eta = 0.
        let c = ctx(PiecewiseFun::zero(), PiecewiseFun::zero(), one_minus_x2());
        match c.solve_ancillary() {
            Err(Error::AncillaryBreakdown { tried }) => assert_eq!(tried.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
