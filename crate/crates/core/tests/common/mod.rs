//! Problem builders shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use opkrylov::{construct_adaptive, BvpProblem, OperatorContext, PiecewiseFun};

pub fn fun(f: impl Fn(f64) -> f64, breaks: &[f64]) -> PiecewiseFun {
    construct_adaptive(f, breaks, 1e-15).expect("test function resolves")
}

pub fn smooth(f: impl Fn(f64) -> f64) -> PiecewiseFun {
    fun(f, &[-1.0, 1.0])
}

pub fn rational_rhs() -> PiecewiseFun {
    smooth(|x| 1.0 / (1.0 + x * x))
}

pub fn laplace_ctx() -> OperatorContext {
    OperatorContext::new(BvpProblem::laplacian(smooth(|x| 1.0 - x * x)))
}

pub fn laplace_exact(x: f64) -> f64 {
    (x.powi(4) - 6.0 * x * x + 5.0) / 12.0
}

/// The three smooth problems whose condition bound is 3.
pub fn smooth_examples() -> Vec<(&'static str, OperatorContext)> {
    let z = PiecewiseFun::zero();
    let q = PI / 4.0;
    vec![
        (
            "E1",
            BvpProblem::new(smooth(|x| 2.0 + (PI * x).cos()), z.clone(), z.clone(), rational_rhs()),
        ),
        (
            "E2",
            BvpProblem::new(
                smooth(|x| 1.0 + x * x),
                z.clone(),
                smooth(|x| (q * (PI * x).cos()).powi(2)),
                rational_rhs(),
            ),
        ),
        (
            "E3",
            BvpProblem::new(PiecewiseFun::constant(1.0), z.clone(), PiecewiseFun::constant(2.0 * q * q), rational_rhs()),
        ),
    ]
    .into_iter()
    .map(|(n, p)| (n, OperatorContext::new(p)))
    .collect()
}

/// `[-1, k_1, ..., k_m, 1]` for kinks `(2j + 1) / (2 * half_periods)` inside `(-1, 1)`.
pub fn odd_grid(denominator: i32) -> Vec<f64> {
    let mut b = vec![-1.0];
    let d = denominator as f64;
    for j in -denominator..denominator {
        let x = (2 * j + 1) as f64 / d;
        if x > -1.0 && x < 1.0 {
            b.push(x);
        }
    }
    b.push(1.0);
    b
}

/// The three piecewise problems with condition bound 3, plus the
/// discontinuous right-hand side example on the first operator.
pub fn piecewise_examples() -> Vec<(&'static str, OperatorContext)> {
    let z = PiecewiseFun::zero();
    let q = PI / 4.0;
    let b1 = [-1.0, -0.5, 0.5, 1.0];
    let b2 = [-1.0, -0.75, -0.25, 0.25, 0.75, 1.0];
    let b3 = odd_grid(40);
    let a1 = fun(|x| 1.0 + 2.0 * (PI * x).cos().abs(), &b1);
    let sign_breaks = opkrylov::chebfun::union_breaks(&b1, &odd_grid(60));
    let sign_rhs = fun(|x| (30.0 * PI * x).cos().signum(), &sign_breaks);
    vec![
        ("E1", BvpProblem::new(a1.clone(), z.clone(), z.clone(), rational_rhs())),
        (
            "E2",
            BvpProblem::new(
                smooth(|x| 1.0 + (PI * x * x).sin().abs()),
                z.clone(),
                fun(|x| q * q * (2.0 * PI * x).cos().abs(), &b2),
                rational_rhs(),
            ),
        ),
        (
            "E3",
            BvpProblem::new(
                PiecewiseFun::constant(1.0),
                z.clone(),
                fun(|x| 2.0 * q * q * (20.0 * PI * x).cos().abs(), &b3),
                rational_rhs(),
            ),
        ),
        ("sign", BvpProblem::new(a1, z.clone(), z, sign_rhs)),
    ]
    .into_iter()
    .map(|(n, p)| (n, OperatorContext::new(p)))
    .collect()
}

pub fn exp_diffusion(b: f64, c: f64) -> OperatorContext {
    let b = if b == 0.0 { PiecewiseFun::zero() } else { PiecewiseFun::constant(b) };
    OperatorContext::new(BvpProblem::new(
        smooth(f64::exp),
        b,
        PiecewiseFun::constant(c),
        smooth(|x| (30.0 * PI * x).sin()),
    ))
}

pub fn max_error(p: &PiecewiseFun, f: impl Fn(f64) -> f64) -> f64 {
    (0..=2000)
        .map(|i| -1.0 + 2.0 * i as f64 / 2000.0)
        .map(|x| (p.eval(x) - f(x)).abs())
        .fold(0.0, f64::max)
}
