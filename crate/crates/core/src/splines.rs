//! Univariate B-spline bases on p-open knot vectors.
//!
//! Evaluation follows the Cox–de Boor recursion with the usual conventions:
//! terms of the form `0/0` vanish, and the basis is closed on the right so the
//! last function equals one at `x = 1`.

use crate::error::{Error, Result};

/// Largest polynomial degree supported by the fixed-size evaluation buffers.
pub const MAX_DEGREE: usize = 10;

/// A p-open knot vector on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Argument(format!(
                "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        let n = knots.len();
        if n < 2 * degree + 2 {
            return Err(Error::Argument(format!(
                "{n} knots cannot carry {} basis functions of degree {degree}",
                degree + 1
            )));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Argument("knots must be non-decreasing".into()));
        }
        if knots[..=degree].iter().any(|&k| k != 0.0)
            || knots[n - degree - 1..].iter().any(|&k| k != 1.0)
        {
            return Err(Error::Argument(format!(
                "knot vector is not {degree}-open on [0, 1]"
            )));
        }
        // A knot of multiplicity p+2 would leave a basis function with empty support.
        let mut run = 1;
        for w in knots[degree..n - degree].windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > degree + 1 {
                return Err(Error::Argument(format!(
                    "interior knot {} has multiplicity above {}",
                    w[0],
                    degree + 1
                )));
            }
        }
        Ok(Self { degree, knots })
    }

    /// The knot vector of the Bernstein basis of the given degree.
    pub fn bezier(degree: usize) -> Self {
        let mut knots = vec![0.0; degree + 1];
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self { degree, knots }
    }

    /// Open knot vector with `elements` equal intervals and simple interior knots.
    pub fn uniform(degree: usize, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::Argument("a knot vector needs at least one element".into()));
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..elements).map(|j| j as f64 / elements as f64));
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions `k`.
    pub fn len(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distinct knot values, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Drops the first and last knot, giving the companion space of degree `p - 1`.
    pub fn truncated(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Argument("cannot truncate a degree-0 knot vector".into()));
        }
        let n = self.knots.len();
        Self::new(self.degree - 1, self.knots[1..n - 1].to_vec())
    }

    /// Uniform dyadic refinement: every element is split into `2^level` equal parts,
    /// and the result has maximal smoothness.
    pub fn dyadic_refine(&self, level: u32) -> Result<Self> {
        let elements = self.num_elements() << level;
        Self::uniform(self.degree, elements)
    }

    fn check_x(x: f64) -> Result<()> {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            })
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "basis index {i} out of range for {} functions",
                self.len()
            )))
        }
    }

    /// Index of the non-empty knot span containing `x`; `x = 1` falls into the last span.
    pub fn find_span(&self, x: f64) -> usize {
        let k = self.len();
        if x >= self.knots[k] {
            let mut i = k - 1;
            while self.knots[i] >= self.knots[k] {
                i -= 1;
            }
            return i;
        }
        // largest i in [p, k-1] with knots[i] <= x
        let upper = &self.knots[self.degree + 1..=k];
        self.degree + upper.partition_point(|&t| t <= x)
    }

    /// Value of `b_i^p(x)` from the defining recursion.
    pub fn value(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Self::check_x(x)?;
        Ok(self.recursive(i, self.degree, x))
    }

    fn recursive(&self, i: usize, p: usize, x: f64) -> f64 {
        let t = &self.knots;
        if p == 0 {
            let last = *t.last().unwrap();
            let inside = t[i] <= x && x < t[i + 1];
            // left limit at the right end of the parameter domain
            let closing = x == last && t[i] < last && t[i + 1] == last;
            return if inside || closing { 1.0 } else { 0.0 };
        }
        let mut out = 0.0;
        let d1 = t[i + p] - t[i];
        if d1 > 0.0 {
            out += (x - t[i]) / d1 * self.recursive(i, p - 1, x);
        }
        let d2 = t[i + p + 1] - t[i + 1];
        if d2 > 0.0 {
            out += (t[i + p + 1] - x) / d2 * self.recursive(i + 1, p - 1, x);
        }
        out
    }

    /// Derivative of `b_i^p` via degree reduction.
    pub fn derivative(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Self::check_x(x)?;
        let p = self.degree;
        if p == 0 {
            return Ok(0.0);
        }
        let t = &self.knots;
        let mut out = 0.0;
        let d1 = t[i + p] - t[i];
        if d1 > 0.0 {
            out += self.recursive(i, p - 1, x) / d1;
        }
        let d2 = t[i + p + 1] - t[i + 1];
        if d2 > 0.0 {
            out -= self.recursive(i + 1, p - 1, x) / d2;
        }
        Ok(p as f64 * out)
    }

    /// The `p + 1` possibly non-zero basis values at `x`, written into `values`.
    /// Returns the index of the first one.
    pub fn nonzero_into(&self, x: f64, values: &mut [f64]) -> usize {
        let p = self.degree;
        let span = self.find_span(x);
        let t = &self.knots;
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        span - p
    }

    /// Like [`nonzero_into`](Self::nonzero_into) at local coordinate `s` in
    /// `[0, 1]` of the `element`-th non-empty knot span.
    ///
    /// Distances to the knots are formed from `s` directly instead of from the
    /// global abscissa, so no bits of `s` are lost to the span offset.
    pub fn nonzero_on_element_into(&self, element: usize, s: f64, values: &mut [f64]) -> usize {
        let p = self.degree;
        let t = &self.knots;
        let span = (p..t.len() - p - 1)
            .filter(|&i| t[i + 1] > t[i])
            .nth(element)
            .expect("element index within the knot vector");
        let h = t[span + 1] - t[span];
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = (t[span] - t[span + 1 - j]) + s * h;
            right[j] = (t[span + j] - t[span]) - s * h;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        span - p
    }

    /// Non-zero basis values with their first derivatives.
    pub fn nonzero_with_derivatives_into(
        &self,
        x: f64,
        values: &mut [f64],
        derivatives: &mut [f64],
    ) -> usize {
        let p = self.degree;
        if p == 0 {
            let first = self.nonzero_into(x, values);
            derivatives[0] = 0.0;
            return first;
        }
        let span = self.find_span(x);
        let t = &self.knots;
        // values of degree p-1 on the same span
        let mut lower = [0.0; MAX_DEGREE + 1];
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        lower[0] = 1.0;
        for j in 1..p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = lower[r] / (right[r + 1] + left[j - r]);
                lower[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            lower[j] = saved;
        }
        // lower[r] = b_{span-p+1+r}^{p-1}, r = 0..p-1
        let first = span - p;
        for r in 0..=p {
            let i = first + r;
            let mut d = 0.0;
            if r >= 1 {
                let den = t[i + p] - t[i];
                if den > 0.0 {
                    d += lower[r - 1] / den;
                }
            }
            if r < p {
                let den = t[i + p + 1] - t[i + 1];
                if den > 0.0 {
                    d -= lower[r] / den;
                }
            }
            derivatives[r] = p as f64 * d;
        }
        self.nonzero_into(x, values);
        first
    }

    /// Convenience wrapper around [`Self::nonzero_into`].
    pub fn nonzero(&self, x: f64) -> Result<(usize, Vec<f64>)> {
        Self::check_x(x)?;
        let mut values = vec![0.0; self.degree + 1];
        let first = self.nonzero_into(x, &mut values);
        Ok((first, values))
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.len())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }
}
