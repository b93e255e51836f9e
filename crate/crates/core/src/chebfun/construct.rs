use super::piecewise::validate_breaks;
use super::series::ChebSeries;
use super::transform::{cheb_points, values_to_coeffs};
use super::{PiecewiseFun, MAX_DEGREE};
use crate::error::{Error, Result};

/// First grid is `2^MIN_LOG2 + 1` points.
const MIN_LOG2: u32 = 3;

/// Relative tail level below which a stagnating tail is accepted as the
/// sampler's rounding floor rather than unresolved structure.
const PLATEAU_CEILING: f64 = 1e-11;

/// One-sided offset (relative to piece width) used to sample a piece's end
/// at an interior breakpoint.
const ONE_SIDED_STEP: f64 = 1e-9;

/// Relative size of the largest of the last `max(3, n/8)` coefficients.
fn tail_level(coeffs: &[f64], scale: f64) -> f64 {
    let len = coeffs.len();
    let tail = 3.max(len / 8).min(len);
    coeffs[len - tail..].iter().fold(0.0, |m: f64, c| m.max(c.abs())) / scale
}

fn sample_piece<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    n: usize,
    interior_lo: bool,
    interior_hi: bool,
) -> Result<Vec<f64>> {
    let half = 0.5 * (hi - lo);
    let step = ONE_SIDED_STEP * (hi - lo);
    let sample = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteSample { x })
        }
    };
    cheb_points(n)
        .into_iter()
        .enumerate()
        .map(|(j, t)| {
            if j == 0 {
                if interior_lo {
                    // Limit from the right: linear extrapolation from inside.
                    Ok(2.0 * sample(lo + step)? - sample(lo + 2.0 * step)?)
                } else {
                    sample(lo)
                }
            } else if j == n {
                if interior_hi {
                    Ok(2.0 * sample(hi - step)? - sample(hi - 2.0 * step)?)
                } else {
                    sample(hi)
                }
            } else {
                sample(lo + (t + 1.0) * half)
            }
        })
        .collect()
}

fn construct_piece<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    interior_lo: bool,
    interior_hi: bool,
    tol: f64,
) -> Result<ChebSeries> {
    let mut prev_tail: Option<f64> = None;
    let mut log2 = MIN_LOG2;
    loop {
        let n = 1usize << log2;
        let values = sample_piece(f, lo, hi, n, interior_lo, interior_hi)?;
        let coeffs = values_to_coeffs(&values);
        let scale = coeffs.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
        if scale == 0.0 {
            return Ok(ChebSeries::zero(lo, hi));
        }
        let tail = tail_level(&coeffs, scale);
        let series = ChebSeries::new(coeffs, lo, hi);
        if tail < tol {
            return Ok(series.chop(tol));
        }
        if tail < PLATEAU_CEILING && prev_tail.is_some_and(|p| tail > 0.25 * p) {
            // The tail stopped decaying: it is the sampling noise floor.
            return Ok(series.chop(tail));
        }
        if n >= MAX_DEGREE {
            return Ok(series.chop(tol).with_resolved(false));
        }
        prev_tail = Some(tail);
        log2 += 1;
    }
}

/// Adaptively builds a piecewise Chebyshev approximation of `f` on the given
/// partition of `[-1, 1]`.
///
/// Each piece is sampled on grids of `2^j + 1` Chebyshev points, `j = 3, 4, ...`,
/// until the trailing coefficients fall below `tol` relative to the largest
/// one; the result is chopped. Pieces that reach the degree cap are returned
/// inside [`Error::Unresolved`] with `resolved = false`.
///
/// At interior breakpoints the sampler is evaluated as a one-sided limit from
/// inside the piece, so functions with jumps at breakpoints are handled.
pub fn construct_adaptive<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<PiecewiseFun> {
    validate_breaks(breaks)?;
    if !(tol > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    let last = breaks.len() - 2;
    let pieces = breaks
        .windows(2)
        .enumerate()
        .map(|(i, w)| construct_piece(&f, w[0], w[1], i > 0, i < last, tol))
        .collect::<Result<Vec<_>>>()?;
    let unresolved: Vec<usize> = pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_resolved())
        .map(|(i, _)| i)
        .collect();
    let fun = PiecewiseFun::from_pieces(breaks.to_vec(), pieces)?;
    if unresolved.is_empty() {
        Ok(fun)
    } else {
        Err(Error::Unresolved {
            partial: Box::new(fun),
            pieces: unresolved,
            cap: MAX_DEGREE,
        })
    }
}

/// Smooth single-piece construction on `[-1, 1]` at the default tolerance.
pub fn chebfun<F: Fn(f64) -> f64>(f: F) -> Result<PiecewiseFun> {
    construct_adaptive(f, &[-1.0, 1.0], super::DEFAULT_TOL)
}
