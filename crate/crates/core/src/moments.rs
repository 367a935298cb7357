//! Summed-area tables of the first two raw moments on a `d`-dimensional lattice.

use crate::lattice::{LatticeShape, Rect, MAX_DIMS};

/// Inclusive prefix sums of `y` and `y^2`, padded with a zero plane on the
/// low side of every axis.
#[derive(Debug, Clone)]
pub struct MomentTable {
    ndim: usize,
    padded_strides: [usize; MAX_DIMS],
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl MomentTable {
    pub fn new(shape: &LatticeShape, y: &[f64]) -> Self {
        assert_eq!(y.len(), shape.len());
        let d = shape.ndim();
        let padded: Vec<usize> = shape.dims().iter().map(|n| n + 1).collect();
        let mut padded_strides = [0usize; MAX_DIMS];
        let mut total = 1;
        for axis in (0..d).rev() {
            padded_strides[axis] = total;
            total *= padded[axis];
        }
        let mut sum = vec![0.0; total];
        let mut sum_sq = vec![0.0; total];
        for (off, &v) in y.iter().enumerate() {
            let coords = shape.coords(off);
            let p: usize = (0..d).map(|a| coords[a] * padded_strides[a]).sum();
            sum[p] = v;
            sum_sq[p] = v * v;
        }
        // cumulative sums along each axis in turn
        for axis in 0..d {
            let stride = padded_strides[axis];
            for p in 0..total {
                if (p / stride) % padded[axis] > 0 {
                    sum[p] += sum[p - stride];
                    sum_sq[p] += sum_sq[p - stride];
                }
            }
        }
        Self {
            ndim: d,
            padded_strides,
            sum,
            sum_sq,
        }
    }

    /// `(count, sum, sum of squares)` over `rect` by inclusion-exclusion over
    /// its `2^d` corners.
    pub fn moments(&self, rect: &Rect) -> (usize, f64, f64) {
        let d = self.ndim;
        let (mut s1, mut s2) = (0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut p = 0;
            let mut lows = 0;
            for axis in 0..d {
                let c = if corner >> axis & 1 == 1 {
                    lows += 1;
                    rect.lo(axis) - 1
                } else {
                    rect.hi(axis)
                };
                p += c * self.padded_strides[axis];
            }
            if lows % 2 == 0 {
                s1 += self.sum[p];
                s2 += self.sum_sq[p];
            } else {
                s1 -= self.sum[p];
                s2 -= self.sum_sq[p];
            }
        }
        (rect.size(), s1, s2)
    }
}
