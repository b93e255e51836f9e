mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use opkrylov::krylov::{
    cg_iteration_bound, cg_unpreconditioned, gmres, minres, pcg, ArnoldiFactorization, ArnoldiStep, Method,
};
use opkrylov::operator::projection_w0;
use opkrylov::{BvpProblem, Error, KrylovOptions, OperatorContext, PiecewiseFun};

fn laplace_exact_fun() -> PiecewiseFun {
    smooth(laplace_exact)
}

fn reference(ctx: &OperatorContext) -> PiecewiseFun {
    pcg(ctx, &KrylovOptions::default().with_tol(1e-14)).unwrap().u
}

fn zero_rhs(ctx: &OperatorContext) -> OperatorContext {
    OperatorContext::new(ctx.problem().with_rhs(PiecewiseFun::zero()))
}

#[test]
fn unpreconditioned_cg_terminates_at_the_space_dimension() {
    let ctx = laplace_ctx();
    let opts = KrylovOptions::default().with_exact(laplace_exact_fun());
    let rep = cg_unpreconditioned(&ctx, 10, &opts).unwrap();
    assert!(rep.converged);
    assert!(rep.iterations <= 9, "{}", rep.iterations);
    let err = rep.energy_error_history.as_ref().unwrap();
    assert!(*err.last().unwrap() < 1e-10, "{err:?}");
    assert!(err[3] > 1e-2, "{err:?}");
    // The right-hand side is a polynomial inside V0 for n = 10.
    assert!(rep.rhs_projection_residual.unwrap() < 1e-14);
}

#[test]
fn unpreconditioned_cg_matches_dense_oracle() {
    let ctx = laplace_ctx();
    let n = 10;
    let basis = ctx.v0_basis(n).unwrap();
    let m = basis.len();
    let gram = DMatrix::from_fn(m, m, |i, j| ctx.bilinear_form(&basis[i], &basis[j]).unwrap());
    let gram = (&gram + gram.transpose()) * 0.5;
    let rhs = DVector::from_fn(m, |i, _| ctx.problem().f().inner_product(&basis[i]));
    // Textbook matrix CG; the residual norm in the orthonormal basis equals
    // the function residual norm.
    let mut x = DVector::zeros(m);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut norms = vec![r.norm()];
    for _ in 0..m {
        let ap = &gram * &p;
        let alpha = r.dot(&r) / p.dot(&ap);
        x += alpha * &p;
        let r_new = &r - alpha * &ap;
        let beta = r_new.dot(&r_new) / r.dot(&r);
        p = &r_new + beta * &p;
        r = r_new;
        norms.push(r.norm());
    }
    let rep = cg_unpreconditioned(&ctx, n, &KrylovOptions::default()).unwrap();
    for (k, (a, b)) in rep.residual_history.iter().zip(&norms).enumerate().take(6) {
        assert!((a - b).abs() < 1e-8 * norms[0], "k = {k}: {a} vs {b}");
    }
}

#[test]
fn zero_rhs_converges_immediately() {
    for ctx in [zero_rhs(&laplace_ctx()), zero_rhs(&smooth_examples()[0].1)] {
        for rep in [
            cg_unpreconditioned(&ctx, 12, &KrylovOptions::default()).unwrap(),
            pcg(&ctx, &KrylovOptions::default()).unwrap(),
            minres(&ctx, &KrylovOptions::default()).unwrap(),
            gmres(&ctx, &KrylovOptions::default()).unwrap(),
        ] {
            assert!(rep.converged);
            assert_eq!(rep.iterations, 0);
            assert!(rep.u.norm_l2() == 0.0, "{}", rep.method);
        }
    }
}

#[test]
fn contract_errors() {
    let indefinite = OperatorContext::new(BvpProblem::new(
        PiecewiseFun::constant(1.0),
        PiecewiseFun::zero(),
        PiecewiseFun::constant(-100.0),
        rational_rhs(),
    ));
    assert!(matches!(pcg(&indefinite, &KrylovOptions::default()), Err(Error::Contract(_))));
    assert!(matches!(
        cg_unpreconditioned(&indefinite, 10, &KrylovOptions::default()),
        Err(Error::Contract(_))
    ));
    let convective = exp_diffusion(1.0, -10.0);
    assert!(matches!(minres(&convective, &KrylovOptions::default()), Err(Error::Contract(_))));
    // gmres has no preconditions.
    assert!(gmres(&convective, &KrylovOptions::default().with_max_iter(3)).is_ok());

    let bad = [
        KrylovOptions::default().with_tol(0.0),
        KrylovOptions::default().with_tol(1.0),
        KrylovOptions::default().with_max_iter(0),
        KrylovOptions::default().with_restart(0),
    ];
    for o in &bad {
        assert!(pcg(&laplace_ctx(), o).is_err());
    }
}

#[test]
fn negative_energy_is_reported_as_breakdown() {
    // Declared coercive although a < 0: the first step sees B[Rp, Rp] < 0.
    let ctx = OperatorContext::new(
        BvpProblem::new(PiecewiseFun::constant(-1.0), PiecewiseFun::zero(), PiecewiseFun::zero(), rational_rhs())
            .with_coercive(true),
    );
    match pcg(&ctx, &KrylovOptions::default()) {
        Err(Error::NotPositiveDefinite { iteration: 0, value }) => assert!(value < 0.0),
        other => panic!("expected breakdown, got {other:?}"),
    }
    match cg_unpreconditioned(&ctx, 8, &KrylovOptions::default()) {
        Err(Error::NotPositiveDefinite { iteration: 0, .. }) => {}
        other => panic!("expected breakdown, got {other:?}"),
    }
}

#[test]
fn pcg_solves_laplacian_in_one_step() {
    let rep = pcg(&laplace_ctx(), &KrylovOptions::default()).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.iterations, 1);
    assert!(max_error(&rep.u, laplace_exact) < 1e-12);
    assert!((rep.alphas[0] - 1.0).abs() < 1e-12);
}

#[test]
fn pcg_history_shapes_and_boundary_values() {
    for (name, ctx) in smooth_examples().into_iter().chain(piecewise_examples()) {
        let opts = KrylovOptions::default().with_exact(reference(&ctx)).recording();
        let rep = pcg(&ctx, &opts).unwrap();
        assert!(rep.converged, "{name}");
        let n = rep.iterations + 1;
        assert_eq!(rep.residual_history.len(), n);
        assert_eq!(rep.energy_error_history.as_ref().unwrap().len(), n);
        assert_eq!(rep.solution_norm_history.len(), n);
        assert_eq!(rep.elapsed.len(), n);
        assert_eq!(rep.alphas.len(), rep.iterations);
        assert_eq!(rep.iterates.len(), n);
        for (k, u) in rep.iterates.iter().enumerate() {
            assert!(u.eval(-1.0).abs() < 1e-9 && u.eval(1.0).abs() < 1e-9, "{name} k = {k}");
        }
        let err = rep.energy_error_history.unwrap();
        for w in err.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{name}: {err:?}");
        }
    }
}

#[test]
fn pcg_iteration_count_is_bounded() {
    for (name, ctx) in smooth_examples() {
        let kappa = ctx.condition_bound().unwrap();
        let opts = KrylovOptions::default().with_exact(reference(&ctx)).with_tol(1e-13);
        let rep = pcg(&ctx, &opts).unwrap();
        let err = rep.energy_error_history.unwrap();
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let hit = err.iter().position(|&e| e <= eps).unwrap_or(usize::MAX);
            let bound = cg_iteration_bound(kappa, eps);
            assert!(hit <= bound, "{name}: eps {eps} needs {hit} > {bound}");
        }
    }
}

#[test]
fn arnoldi_breaks_down_on_laplacian() {
    let ctx = laplace_ctx();
    let r0 = ctx.prepare_rhs().unwrap().r0;
    let mut fact = ArnoldiFactorization::new(&r0).unwrap();
    assert_eq!(fact.step(&ctx).unwrap(), ArnoldiStep::LuckyBreakdown);
    assert_eq!(fact.basis.len(), 1);
    assert!((fact.hessenberg[0][0] - 1.0).abs() < 1e-12);
}

#[test]
fn arnoldi_basis_is_orthonormal_and_reconstructs() {
    let ctx = smooth_examples().remove(0).1;
    let r0 = ctx.prepare_rhs().unwrap().r0;
    let mut fact = ArnoldiFactorization::new(&r0).unwrap();
    for _ in 0..20 {
        assert_eq!(fact.step(&ctx).unwrap(), ArnoldiStep::Extended);
    }
    let q = &fact.basis;
    for i in 0..q.len() {
        for j in 0..=i {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((q[i].inner_product(&q[j]) - want).abs() < 1e-10, "({i}, {j})");
        }
    }
    let h = fact.hessenberg_matrix();
    for j in 0..10 {
        let tq = ctx.apply_t(&q[j]).unwrap();
        let recon = (0..=j + 1).fold(PiecewiseFun::zero(), |acc, i| PiecewiseFun::axpy(h[i][j], &q[i], &acc));
        assert!((&tq - &recon).norm_l2() < 1e-8, "column {j}");
    }
}

#[test]
fn gmres_matches_pcg_on_laplacian() {
    let ctx = laplace_ctx();
    let g = gmres(&ctx, &KrylovOptions::default()).unwrap();
    let p = pcg(&ctx, &KrylovOptions::default()).unwrap();
    assert!(g.converged);
    assert_eq!(g.iterations, 1);
    assert!((&g.u - &p.u).norm_l2() < 1e-11);
    let m = minres(&ctx, &KrylovOptions::default()).unwrap();
    assert_eq!(m.iterations, 1);
    assert!((&m.u - &p.u).norm_l2() < 1e-11);
}

/// Dense GMRES: minimizes `||b - G y||` over `y` in `K_k(G, b)` by least
/// squares on the Krylov matrix.
fn dense_gmres_residuals(g: &DMatrix<f64>, b: &DVector<f64>, iters: usize) -> Vec<f64> {
    let mut out = vec![b.norm()];
    let mut krylov = vec![b.clone()];
    for k in 1..=iters {
        let next = g * krylov.last().unwrap();
        let kmat = DMatrix::from_columns(&krylov);
        let a = g * &kmat;
        let y = a.clone().svd(true, true).solve(b, 1e-14).unwrap();
        out.push((b - a * y).norm());
        krylov.push(next);
        assert_eq!(krylov.len(), k + 1);
    }
    out
}

#[test]
fn gmres_agrees_with_dense_oracle() {
    let ctx = exp_diffusion(1.0, -10.0);
    let r0 = ctx.prepare_rhs().unwrap().r0;
    let mut fact = ArnoldiFactorization::new(&r0).unwrap();
    for _ in 0..30 {
        fact.step(&ctx).unwrap();
    }
    let q = &fact.basis[..30];
    let tq: Vec<_> = q.iter().map(|qi| ctx.apply_t(qi).unwrap()).collect();
    let g = DMatrix::from_fn(30, 30, |i, j| q[i].inner_product(&tq[j]));
    let mut b = DVector::zeros(30);
    b[0] = fact.beta0;
    let want = dense_gmres_residuals(&g, &b, 5);
    let rep = gmres(&ctx, &KrylovOptions::default().with_max_iter(5)).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.iterations, 5);
    for (k, (a, w)) in rep.residual_history.iter().zip(&want).enumerate() {
        assert!((a - w).abs() < 1e-8 * want[0], "k = {k}: {a} vs {w}");
    }
}

#[test]
fn gmres_residual_is_monotone_within_cycles() {
    let ctx = exp_diffusion(1.0, -10.0);
    let opts = KrylovOptions::default().with_tol(1e-8).with_max_iter(60).with_restart(10);
    let rep = gmres(&ctx, &opts).unwrap();
    assert_eq!(rep.restarts, (1..6).map(|c| 10 * c).collect::<Vec<_>>()[..rep.restarts.len()]);
    let mut cycle_start = 0;
    for k in 1..rep.residual_history.len() {
        if rep.restarts.contains(&(k - 1)) {
            cycle_start = k - 1;
        }
        if k - 1 > cycle_start || cycle_start == 0 {
            let (a, b) = (rep.residual_history[k - 1], rep.residual_history[k]);
            assert!(b <= a + 1e-10, "k = {k}: {a} -> {b}");
        }
    }
}

#[test]
fn minres_agrees_with_gmres_on_smooth_example() {
    let ctx = smooth_examples().remove(1).1;
    let opts = KrylovOptions::default().with_tol(1e-12);
    let m = minres(&ctx, &opts).unwrap();
    let g = gmres(&ctx, &opts).unwrap();
    assert!(m.converged && g.converged);
    for (k, (a, b)) in m.residual_history.iter().zip(&g.residual_history).enumerate() {
        assert!((a - b).abs() < 1e-8, "k = {k}: {a} vs {b}");
    }
    assert!((&m.u - &g.u).norm_l2() < 1e-9);
}

#[test]
fn minres_handles_indefinite_problems() {
    let ctx = exp_diffusion(0.0, -100.0);
    let opts = KrylovOptions::default().with_tol(1e-10).with_max_iter(400);
    let rep = minres(&ctx, &opts).unwrap();
    assert!(rep.converged);
    // Weak-form residual against a few smooth test functions.
    let f = ctx.problem().f();
    for k in 1..5 {
        let psi = smooth(|x| (1.0 - x * x) * (k as f64 * x).cos());
        let lhs = ctx.bilinear_form(&rep.u, &psi).unwrap();
        let rhs = f.inner_product(&psi);
        assert!((lhs - rhs).abs() < 1e-7, "{lhs} vs {rhs}");
    }
}

#[test]
fn solve_dispatches_by_method() {
    let ctx = laplace_ctx();
    for m in [Method::Cg, Method::Pcg, Method::Minres, Method::Gmres] {
        let rep = opkrylov::krylov::solve(&ctx, m, 12, &KrylovOptions::default()).unwrap();
        assert_eq!(rep.method, m);
        assert!(max_error(&rep.u, laplace_exact) < 1e-10, "{m}");
    }
}

#[test]
fn residual_projection_keeps_zero_mean() {
    let ctx = smooth_examples().remove(0).1;
    let rep = pcg(&ctx, &KrylovOptions::default().recording()).unwrap();
    for r in &rep.residuals {
        assert!(projection_w0(r).mean().abs() < 1e-14 && r.mean().abs() < 1e-12);
    }
}
