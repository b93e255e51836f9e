//! Discrete Chebyshev transform between values at Chebyshev points of the
//! second kind and Chebyshev coefficients.
//!
//! Both directions are computed with a type-I DCT realised as a length-`2n`
//! complex FFT of the even extension, so a transform of `n + 1` samples costs
//! `O(n log n)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// The `n + 1` Chebyshev points of the second kind on `[-1, 1]`, ascending.
///
/// Computed as `sin(pi (2j - n) / (2n))` so the grid is exactly symmetric.
pub fn cheb_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    let m = n as f64;
    (0..=n)
        .map(|j| (PI * (2.0 * j as f64 - m) / (2.0 * m)).sin())
        .collect()
}

/// Even-extension DCT-I: returns `W_k = w_0 + (-1)^k w_n + 2 sum_{j=1}^{n-1} w_j cos(pi j k / n)`
/// for `k = 0..=n`.
fn dct1(w: &[f64]) -> Vec<f64> {
    let n = w.len() - 1;
    let len = 2 * n;
    let mut buf: Vec<Complex64> = Vec::with_capacity(len);
    buf.extend(w.iter().map(|&x| Complex64::new(x, 0.0)));
    buf.extend(w[1..n].iter().rev().map(|&x| Complex64::new(x, 0.0)));
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len));
    fft.process(&mut buf);
    buf.truncate(n + 1);
    buf.into_iter().map(|c| c.re).collect()
}

/// Chebyshev coefficients of the polynomial interpolating `values`, which are
/// samples at [`cheb_points`] (ascending order).
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = match values.len() {
        0 => return vec![0.0],
        1 => return values.to_vec(),
        len => len - 1,
    };
    // The DCT works on the descending ordering x_j = cos(pi j / n).
    let w: Vec<f64> = values.iter().rev().copied().collect();
    let mut coeffs = dct1(&w);
    let scale = 1.0 / n as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    coeffs[0] *= 0.5;
    coeffs[n] *= 0.5;
    coeffs
}

/// Values at the `coeffs.len()` Chebyshev points (ascending) of the series
/// with the given coefficients. Inverse of [`values_to_coeffs`].
pub fn coeffs_to_values(coeffs: &[f64]) -> Vec<f64> {
    let n = match coeffs.len() {
        0 => return vec![0.0],
        1 => return coeffs.to_vec(),
        len => len - 1,
    };
    let mut c = coeffs.to_vec();
    c[0] *= 2.0;
    c[n] *= 2.0;
    let w = dct1(&c);
    w.into_iter().rev().map(|x| 0.5 * x).collect()
}
