use super::transform::{cheb_points, coeffs_to_values, values_to_coeffs};

/// A Chebyshev expansion `sum_k c_k T_k(t)` of a smooth function on the
/// subinterval `[lo, hi]`, where `t` is the affine image of `x` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
    resolved: bool,
}

impl ChebSeries {
    /// Builds a series from raw coefficients. An empty coefficient list is the
    /// zero function.
    pub fn new(coeffs: Vec<f64>, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty domain [{lo}, {hi}]");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self {
            coeffs,
            lo,
            hi,
            resolved: true,
        }
    }

    pub fn constant(value: f64, lo: f64, hi: f64) -> Self {
        Self::new(vec![value], lo, hi)
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        Self::constant(0.0, lo, hi)
    }

    /// Interpolates `values` sampled at the Chebyshev points of `[lo, hi]`.
    pub fn from_values(values: &[f64], lo: f64, hi: f64) -> Self {
        Self::new(values_to_coeffs(values), lo, hi)
    }

    pub(crate) fn with_resolved(mut self, resolved: bool) -> Self {
        self.resolved = resolved;
        self
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn is_resolved(&self) -> bool {
        self.resolved
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        if x == self.lo {
            -1.0
        } else if x == self.hi {
            1.0
        } else {
            (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
        }
    }

    pub fn from_unit(&self, t: f64) -> f64 {
        if t == -1.0 {
            self.lo
        } else if t == 1.0 {
            self.hi
        } else {
            self.lo + (t + 1.0) * self.half_width()
        }
    }

    /// Value at `x` (no domain check; points outside extrapolate).
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_unit(self.to_unit(x))
    }

    /// Clenshaw evaluation at `t` in the reference interval. The endpoints use
    /// the explicit sums so that integration constants fixed through
    /// [`Self::endpoint_value`] reproduce exactly.
    pub fn eval_unit(&self, t: f64) -> f64 {
        if t == 1.0 {
            return self.endpoint_value(1.0);
        }
        if t == -1.0 {
            return self.endpoint_value(-1.0);
        }
        let c = &self.coeffs;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + t * b1 - b2
    }

    fn tail_sum(&self, sign: f64) -> f64 {
        let mut s = 0.0;
        let mut w = 1.0;
        for &c in &self.coeffs[1..] {
            w *= sign;
            s += w * c;
        }
        s
    }

    /// `c_0 + sum_{k>=1} sign^k c_k`, i.e. the value at `t = sign`.
    pub fn endpoint_value(&self, sign: f64) -> f64 {
        self.coeffs[0] + self.tail_sum(sign)
    }

    /// Values at the `n + 1` Chebyshev points of the domain. `n` must be at
    /// least the degree.
    pub fn values(&self, n: usize) -> Vec<f64> {
        debug_assert!(n >= self.degree());
        let mut c = self.coeffs.clone();
        c.resize(n + 1, 0.0);
        coeffs_to_values(&c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops trailing coefficients whose magnitude is at most `tol` times the
    /// largest coefficient. A series with all coefficients zero becomes `[0]`.
    pub fn chop(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.chop_in_place(tol);
        out
    }

    pub(crate) fn chop_in_place(&mut self, tol: f64) {
        let scale = self.max_abs_coeff();
        if scale == 0.0 || !scale.is_finite() {
            if scale == 0.0 {
                self.coeffs = vec![0.0];
            }
            return;
        }
        let thresh = tol * scale;
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.abs() > thresh)
            .map_or(1, |i| i + 1);
        self.coeffs.truncate(keep);
    }

    /// Re-represents this polynomial on the subinterval `[lo, hi]` of its
    /// domain, keeping the degree.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        if lo == self.lo && hi == self.hi {
            return self.clone();
        }
        let n = self.degree();
        if n == 0 {
            return Self::constant(self.coeffs[0], lo, hi).with_resolved(self.resolved);
        }
        let half = 0.5 * (hi - lo);
        let values: Vec<f64> = cheb_points(n)
            .into_iter()
            .map(|t| self.eval(lo + (t + 1.0) * half))
            .collect();
        Self::from_values(&values, lo, hi).with_resolved(self.resolved)
    }

    /// Antiderivative coefficients (in `x`, scaled by the half-width) for
    /// `k >= 1`; entry 0 is left at zero for the caller to fix.
    pub(crate) fn antiderivative_tail(&self) -> Vec<f64> {
        let a = &self.coeffs;
        let n = a.len() - 1;
        let at = |k: usize| a.get(k).copied().unwrap_or(0.0);
        let h = self.half_width();
        let mut b = vec![0.0; n + 2];
        b[1] = h * (at(0) - 0.5 * at(2));
        for (k, bk) in b.iter_mut().enumerate().skip(2) {
            *bk = h * (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
        }
        b
    }

    /// Antiderivative taking the value `start` at the left end of the domain.
    pub fn cumsum_from(&self, start: f64, tol: f64) -> Self {
        let mut out = Self::new(self.antiderivative_tail(), self.lo, self.hi)
            .with_resolved(self.resolved);
        out.chop_in_place(tol);
        // The constant is fixed after chopping so the left endpoint sum is exact.
        out.coeffs[0] = 0.0;
        out.coeffs[0] = start - out.tail_sum(-1.0);
        out
    }

    /// `x -> end + int_x^hi self` : the right-anchored antiderivative taking
    /// the value `end` at the right end of the domain.
    pub fn rcumsum_to(&self, end: f64, tol: f64) -> Self {
        let mut b = self.antiderivative_tail();
        for c in b.iter_mut() {
            *c = -*c;
        }
        let mut out = Self::new(b, self.lo, self.hi).with_resolved(self.resolved);
        out.chop_in_place(tol);
        out.coeffs[0] = 0.0;
        out.coeffs[0] = end - out.tail_sum(1.0);
        out
    }

    /// Derivative with respect to `x`.
    pub fn derivative(&self) -> Self {
        let a = &self.coeffs;
        let n = a.len() - 1;
        if n == 0 {
            return Self::zero(self.lo, self.hi).with_resolved(self.resolved);
        }
        // c'_{k-1} = c'_{k+1} + 2 k a_k, then halve c'_0.
        let mut d = vec![0.0; n + 2];
        for k in (1..=n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * a[k];
        }
        d.truncate(n);
        d[0] *= 0.5;
        let scale = 1.0 / self.half_width();
        for c in d.iter_mut() {
            *c *= scale;
        }
        Self::new(d, self.lo, self.hi).with_resolved(self.resolved)
    }

    /// `int_lo^hi` of the series (Clenshaw–Curtis weights on the coefficients).
    pub fn integral(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .step_by(2)
            .map(|(k, &c)| {
                let k = k as f64;
                2.0 * c / (1.0 - k * k)
            })
            .sum();
        s * self.half_width()
    }

    pub(crate) fn scale(&self, alpha: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| alpha * c).collect();
        Self::new(coeffs, self.lo, self.hi).with_resolved(self.resolved)
    }

    /// `alpha * self + other`, both on the same domain.
    pub(crate) fn axpy(alpha: f64, p: &Self, q: &Self, tol: f64) -> Self {
        debug_assert_eq!(p.domain(), q.domain());
        let n = p.coeffs.len().max(q.coeffs.len());
        let mut c = vec![0.0; n];
        for (k, ck) in c.iter_mut().enumerate() {
            let pk = p.coeffs.get(k).copied().unwrap_or(0.0);
            let qk = q.coeffs.get(k).copied().unwrap_or(0.0);
            *ck = alpha * pk + qk;
        }
        let mut out = Self::new(c, p.lo, p.hi).with_resolved(p.resolved && q.resolved);
        out.chop_in_place(tol);
        out
    }

    /// Pointwise product on a shared domain: pad both to the product degree,
    /// multiply values, transform back.
    pub(crate) fn product(p: &Self, q: &Self, tol: f64) -> Self {
        debug_assert_eq!(p.domain(), q.domain());
        let resolved = p.resolved && q.resolved;
        if p.degree() == 0 {
            return q.scale(p.coeffs[0]).with_resolved(resolved).chop(tol);
        }
        if q.degree() == 0 {
            return p.scale(q.coeffs[0]).with_resolved(resolved).chop(tol);
        }
        let n = p.degree() + q.degree();
        let vp = p.values(n);
        let vq = q.values(n);
        let v: Vec<f64> = vp.iter().zip(&vq).map(|(a, b)| a * b).collect();
        let mut out = Self::from_values(&v, p.lo, p.hi).with_resolved(resolved);
        out.chop_in_place(tol);
        out
    }
}
