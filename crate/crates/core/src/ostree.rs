//! Insert-only order-statistics structure over a fixed universe of values.
//!
//! Values are ranked once up front (ties broken by position), and two
//! Fenwick trees over those ranks track the count and the compensated sum of
//! the inserted elements. `select` and prefix sums are O(log n).

use crate::numeric::Dd;

#[derive(Debug, Clone)]
pub struct RankSelect<'a> {
    values: &'a [f64],
    /// Fenwick position (1-based) of element `i`.
    slot: Vec<usize>,
    /// Element stored at each Fenwick position.
    element: Vec<usize>,
    counts: Vec<u32>,
    sums: Vec<Dd>,
    len: usize,
    top_bit: usize,
}

impl<'a> RankSelect<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        let n = values.len();
        let mut element: Vec<usize> = (0..n).collect();
        element.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut slot = vec![0; n];
        for (pos, &e) in element.iter().enumerate() {
            slot[e] = pos + 1;
        }
        let top_bit = if n == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - n.leading_zeros())
        };
        Self {
            values,
            slot,
            element,
            counts: vec![0; n + 1],
            sums: vec![Dd::ZERO; n + 1],
            len: 0,
            top_bit,
        }
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.sums.iter_mut().for_each(|s| *s = Dd::ZERO);
        self.len = 0;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts element `i` of the universe. Each element at most once.
    pub fn insert(&mut self, i: usize) {
        let v = self.values[i];
        let mut p = self.slot[i];
        while p < self.counts.len() {
            self.counts[p] += 1;
            self.sums[p] = self.sums[p].add_f64(v);
            p += p & p.wrapping_neg();
        }
        self.len += 1;
    }

    /// Fenwick position of the `k`-th smallest inserted element (1-based `k`).
    fn locate(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.len);
        let mut pos = 0;
        let mut remaining = k as u32;
        let mut bit = self.top_bit;
        while bit > 0 {
            let next = pos + bit;
            if next < self.counts.len() && self.counts[next] < remaining {
                pos = next;
                remaining -= self.counts[next];
            }
            bit >>= 1;
        }
        pos + 1
    }

    /// `k`-th smallest inserted value.
    pub fn select(&self, k: usize) -> f64 {
        self.values[self.element[self.locate(k) - 1]]
    }

    /// `(k-th smallest value, sum of the k smallest)`.
    pub fn select_with_sum(&self, k: usize) -> (f64, Dd) {
        let pos = self.locate(k);
        (self.values[self.element[pos - 1]], self.prefix_sum(pos))
    }

    fn prefix_sum(&self, mut p: usize) -> Dd {
        let mut acc = Dd::ZERO;
        while p > 0 {
            acc = acc.add(self.sums[p]);
            p &= p - 1;
        }
        acc
    }

    pub fn total(&self) -> Dd {
        self.prefix_sum(self.counts.len() - 1)
    }
}
