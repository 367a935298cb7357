//! Check loss, empirical quantiles and the per-rectangle sum of quantile loss.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::Dd;

/// Quantile level `tau` in the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub const MEDIAN: QuantileLevel = QuantileLevel(0.5);

    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau < 1.0 {
            Ok(Self(tau))
        } else {
            Err(Error::Config(format!("quantile level must lie in (0, 1), got {tau}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// 1-based rank of the empirical quantile among `m` sorted values:
    /// `tau * m` when it is an integer, `ceil(tau * m)` otherwise.
    ///
    /// Products within `1e-9` relative of an integer count as integers, so
    /// `tau = 0.1, m = 30` gives rank 3 even though `0.1 * 30` rounds above 3.
    #[inline]
    pub fn rank(self, m: usize) -> usize {
        debug_assert!(m > 0);
        let t = self.0 * m as f64;
        let nearest = t.round();
        let k = if (t - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            t.ceil()
        };
        (k as usize).clamp(1, m)
    }
}

impl fmt::Display for QuantileLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Check loss: slope `tau` for `x >= 0` and `1 - tau` for `x < 0`.
#[inline]
pub fn rho(tau: QuantileLevel, x: f64) -> f64 {
    if x >= 0.0 {
        tau.0 * x
    } else {
        (tau.0 - 1.0) * x
    }
}

/// Sorted observations of one rectangle with compensated prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSegment {
    values: Vec<f64>,
    prefix: Vec<Dd>,
}

impl SortedSegment {
    /// Sorts `values`; rejects empty input and non-finite values.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("segment must contain at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("segment contains a non-finite value".into()));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self::from_sorted_unchecked(values))
    }

    /// Segment holding one finite value.
    pub fn singleton(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Self {
            values: vec![value],
            prefix: vec![Dd::ZERO, Dd::from_f64(value)],
        }
    }

    fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        let prefix = build_prefix(&values);
        Self { values, prefix }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the `k` smallest values.
    pub fn prefix(&self, k: usize) -> f64 {
        self.prefix[k].to_f64()
    }

    pub(crate) fn prefix_dd(&self, k: usize) -> Dd {
        self.prefix[k]
    }
}

fn build_prefix(values: &[f64]) -> Vec<Dd> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    let mut acc = Dd::ZERO;
    prefix.push(acc);
    for &v in values {
        acc = acc.add_f64(v);
        prefix.push(acc);
    }
    prefix
}

/// Fitted constant and check loss of one rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectCost {
    pub sql: f64,
    pub quantile: f64,
}

/// Left-endpoint minimiser of `a -> sum_i rho(values[i] - a)`.
pub fn empirical_quantile(tau: QuantileLevel, seg: &SortedSegment) -> f64 {
    seg.values[tau.rank(seg.len()) - 1]
}

/// Sum of check loss about the empirical quantile, evaluated in O(1) from the
/// prefix sums.
pub fn sql(tau: QuantileLevel, seg: &SortedSegment) -> RectCost {
    let m = seg.len();
    let k = tau.rank(m);
    let q = seg.values[k - 1];
    let sql = check_loss_from_sums(tau, m, k, q, seg.prefix_dd(k), seg.prefix_dd(m));
    RectCost { sql, quantile: q }
}

/// `tau * [(S_m - S_k) - (m-k) q] + (1-tau) * [k q - S_k]` where `S_k` sums
/// the `k` smallest of `m` values and `q` is the `k`-th smallest.
pub(crate) fn check_loss_from_sums(tau: QuantileLevel, m: usize, k: usize, q: f64, s_k: Dd, s_m: Dd) -> f64 {
    let above = s_m.sub(s_k).sub(Dd::product((m - k) as f64, q));
    let below = Dd::product(k as f64, q).sub(s_k);
    let total = above.mul_f64(tau.0).add(below.mul_f64(1.0 - tau.0));
    total.to_f64().max(0.0)
}

/// Merges two sorted segments in linear time.
pub fn merge(a: &SortedSegment, b: &SortedSegment) -> SortedSegment {
    let (x, y) = (&a.values, &b.values);
    let mut values = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        if y[j] < x[i] {
            values.push(y[j]);
            j += 1;
        } else {
            values.push(x[i]);
            i += 1;
        }
    }
    values.extend_from_slice(&x[i..]);
    values.extend_from_slice(&y[j..]);
    SortedSegment::from_sorted_unchecked(values)
}

/// Within-rectangle sum of squared residuals about the mean, from the count
/// and the first two raw moments.
pub fn sse(count: usize, sum: f64, sum_sq: f64) -> Result<f64> {
    if count == 0 {
        return Err(Error::Usage("sum of squares needs at least one value".into()));
    }
    Ok((sum_sq - sum * sum / count as f64).max(0.0))
}
