use std::ops::{Add, Mul, Neg, Sub};

use super::series::ChebSeries;
use super::DEFAULT_TOL;
use crate::error::{Error, Result};

/// Breakpoints closer than this are treated as the same point when two
/// functions are brought onto a common partition.
const BREAK_MERGE_TOL: f64 = 1e-14;

/// A function on `[-1, 1]` stored as one Chebyshev series per subinterval of
/// a fixed partition `-1 = x_0 < x_1 < ... < x_{M+1} = 1`.
///
/// `M = 0` is the smooth single-piece case. Values at interior breakpoints are
/// taken from the piece on the right; the value at `x = 1` comes from the last
/// piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFun {
    breaks: Vec<f64>,
    pieces: Vec<ChebSeries>,
}

impl PiecewiseFun {
    pub fn from_pieces(breaks: Vec<f64>, pieces: Vec<ChebSeries>) -> Result<Self> {
        validate_breaks(&breaks)?;
        if pieces.len() + 1 != breaks.len() {
            return Err(Error::Breakpoints(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len() - 1,
                pieces.len()
            )));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.domain() != (breaks[i], breaks[i + 1]) {
                return Err(Error::Breakpoints(format!(
                    "piece {i} has domain {:?}, expected [{}, {}]",
                    p.domain(),
                    breaks[i],
                    breaks[i + 1]
                )));
            }
        }
        Ok(Self { breaks, pieces })
    }

    /// Single-piece function with the given Chebyshev coefficients on `[-1, 1]`.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self {
            breaks: vec![-1.0, 1.0],
            pieces: vec![ChebSeries::new(coeffs, -1.0, 1.0)],
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_coeffs(vec![value])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The identity `x -> x`.
    pub fn identity() -> Self {
        Self::from_coeffs(vec![0.0, 1.0])
    }

    /// A function that is constant on each piece of the given partition.
    pub fn piecewise_constant(breaks: Vec<f64>, values: &[f64]) -> Result<Self> {
        let pieces = breaks
            .windows(2)
            .zip(values)
            .map(|(w, &v)| ChebSeries::constant(v, w[0], w[1]))
            .collect();
        Self::from_pieces(breaks, pieces)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[ChebSeries] {
        &self.pieces
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_resolved(&self) -> bool {
        self.pieces.iter().all(ChebSeries::is_resolved)
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(ChebSeries::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(ChebSeries::is_zero)
    }

    fn piece_index(&self, x: f64) -> usize {
        let last = self.pieces.len() - 1;
        // First breakpoint strictly greater than x, so interior ties go right.
        let idx = self.breaks.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(last)
    }

    /// Value at `x`; errors outside `[-1, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(self.eval(x))
    }

    /// Value at `x` without a domain check. Points outside `[-1, 1]` are
    /// extrapolated from the end pieces.
    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Left and right limits at every interior breakpoint, as `right - left`.
    pub fn jumps(&self) -> Vec<f64> {
        self.pieces
            .windows(2)
            .map(|w| w[1].endpoint_value(-1.0) - w[0].endpoint_value(1.0))
            .collect()
    }

    /// Samples `n + 1` Chebyshev points on every piece and returns the
    /// smallest and largest value seen, with their locations.
    pub fn sampled_extrema(&self, n: usize) -> ((f64, f64), (f64, f64)) {
        let mut min = (f64::INFINITY, 0.0);
        let mut max = (f64::NEG_INFINITY, 0.0);
        for p in &self.pieces {
            let (lo, hi) = p.domain();
            let values = p.values(n.max(p.degree()));
            let pts = super::transform::cheb_points(values.len() - 1);
            for (v, t) in values.into_iter().zip(pts) {
                let x = lo + (t + 1.0) * 0.5 * (hi - lo);
                if v < min.0 {
                    min = (v, x);
                }
                if v > max.0 {
                    max = (v, x);
                }
            }
        }
        (min, max)
    }

    /// Largest `|value|` over `n + 1` Chebyshev points per piece.
    pub fn sampled_max_abs(&self, n: usize) -> f64 {
        let ((min, _), (max, _)) = self.sampled_extrema(n);
        min.abs().max(max.abs())
    }

    /// Re-represents the function on a finer partition. Every breakpoint of
    /// `self` must appear (up to merge tolerance) in `breaks`.
    pub fn refine(&self, breaks: &[f64]) -> Self {
        if breaks == self.breaks.as_slice() {
            return self.clone();
        }
        let pieces = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let parent = &self.pieces[self.piece_index(mid)];
                let (plo, phi) = parent.domain();
                if (plo - w[0]).abs() <= BREAK_MERGE_TOL && (phi - w[1]).abs() <= BREAK_MERGE_TOL {
                    ChebSeries::new(parent.coeffs().to_vec(), w[0], w[1])
                        .with_resolved(parent.is_resolved())
                } else {
                    parent.restrict(w[0], w[1])
                }
            })
            .collect();
        Self {
            breaks: breaks.to_vec(),
            pieces,
        }
    }

    fn common(p: &Self, q: &Self) -> (Self, Self) {
        if p.breaks == q.breaks {
            return (p.clone(), q.clone());
        }
        let breaks = union_breaks(&p.breaks, &q.breaks);
        (p.refine(&breaks), q.refine(&breaks))
    }

    fn map_pieces(&self, f: impl Fn(&ChebSeries) -> ChebSeries) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    fn zip_pieces(p: &Self, q: &Self, f: impl Fn(&ChebSeries, &ChebSeries) -> ChebSeries) -> Self {
        let (p, q) = Self::common(p, q);
        let pieces = p.pieces.iter().zip(&q.pieces).map(|(a, b)| f(a, b)).collect();
        Self {
            breaks: p.breaks,
            pieces,
        }
    }

    /// `x -> int_{-1}^x self`. Continuous across breakpoints and exactly zero
    /// at `x = -1`.
    pub fn indefinite_integral(&self) -> Self {
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let q = p.cumsum_from(acc, DEFAULT_TOL);
            acc = q.endpoint_value(1.0);
            pieces.push(q);
        }
        Self {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `x -> int_x^1 self`, the L2 adjoint of [`Self::indefinite_integral`].
    /// Exactly zero at `x = 1`.
    pub fn adjoint_integral(&self) -> Self {
        let mut acc = 0.0;
        let mut pieces: Vec<ChebSeries> = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                let q = p.rcumsum_to(acc, DEFAULT_TOL);
                acc = q.endpoint_value(-1.0);
                q
            })
            .collect();
        pieces.reverse();
        Self {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// Piecewise classical derivative. Jumps at breakpoints contribute
    /// nothing (no delta functions are represented).
    pub fn differentiate(&self) -> Self {
        self.map_pieces(|p| p.derivative().chop(DEFAULT_TOL))
    }

    pub fn multiply(&self, other: &Self) -> Self {
        Self::zip_pieces(self, other, |a, b| ChebSeries::product(a, b, DEFAULT_TOL))
    }

    pub fn definite_integral(&self) -> f64 {
        self.pieces.iter().map(ChebSeries::integral).sum()
    }

    /// L2 inner product over `[-1, 1]`.
    pub fn inner_product(&self, other: &Self) -> f64 {
        self.multiply(other).definite_integral()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_product(self).max(0.0).sqrt()
    }

    pub fn mean(&self) -> f64 {
        0.5 * self.definite_integral()
    }

    /// `alpha * p + q` on the union of the two partitions.
    pub fn axpy(alpha: f64, p: &Self, q: &Self) -> Self {
        Self::zip_pieces(p, q, |a, b| ChebSeries::axpy(alpha, a, b, DEFAULT_TOL))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map_pieces(|p| p.scale(alpha).chop(DEFAULT_TOL))
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.map_pieces(|p| {
            let mut coeffs = p.coeffs().to_vec();
            coeffs[0] += c;
            let (lo, hi) = p.domain();
            ChebSeries::new(coeffs, lo, hi)
                .with_resolved(p.is_resolved())
                .chop(DEFAULT_TOL)
        })
    }

    /// Chops every piece at relative tolerance `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        self.map_pieces(|p| p.chop(tol))
    }

    /// Largest pointwise deviation between two functions over `n` equispaced
    /// points (a test and reporting helper).
    pub fn max_deviation(&self, other: &Self, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                (self.eval(x) - other.eval(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn validate_breaks(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::Breakpoints("need at least -1 and 1".into()));
    }
    if breaks[0] != -1.0 || breaks[breaks.len() - 1] != 1.0 {
        return Err(Error::Breakpoints(format!(
            "partition must start at -1 and end at 1, got {:?}",
            breaks
        )));
    }
    if let Some(w) = breaks.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::Breakpoints(format!(
            "breakpoints must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Sorted union of two partitions, merging points closer than the merge
/// tolerance.
pub fn union_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if x - last <= BREAK_MERGE_TOL => {}
            _ => out.push(x),
        }
    }
    // Endpoints are pinned exactly.
    out[0] = -1.0;
    let n = out.len();
    if n > 1 && (out[n - 1] - 1.0).abs() <= BREAK_MERGE_TOL {
        out[n - 1] = 1.0;
    }
    out
}

impl Add for &PiecewiseFun {
    type Output = PiecewiseFun;
    fn add(self, rhs: Self) -> PiecewiseFun {
        PiecewiseFun::axpy(1.0, self, rhs)
    }
}

impl Sub for &PiecewiseFun {
    type Output = PiecewiseFun;
    fn sub(self, rhs: Self) -> PiecewiseFun {
        PiecewiseFun::axpy(-1.0, rhs, self)
    }
}

impl Neg for &PiecewiseFun {
    type Output = PiecewiseFun;
    fn neg(self) -> PiecewiseFun {
        self.scale(-1.0)
    }
}

impl Mul for &PiecewiseFun {
    type Output = PiecewiseFun;
    fn mul(self, rhs: Self) -> PiecewiseFun {
        self.multiply(rhs)
    }
}

impl Mul<&PiecewiseFun> for f64 {
    type Output = PiecewiseFun;
    fn mul(self, rhs: &PiecewiseFun) -> PiecewiseFun {
        rhs.scale(self)
    }
}
