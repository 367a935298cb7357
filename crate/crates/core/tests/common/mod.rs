//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use qdcart::{sql, LatticeShape, QuantileLevel, Rect, SortedSegment, SplitTree};
use rand::Rng;

/// Correctly rounded sum of `xs` (Shewchuk partials, round-half-even fixup).
pub fn fsum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        let y = partials[n - 1];
        n -= 1;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `sum_i rho_tau(v_i - q)` rounded once from the exact real value. Each
/// difference and product is split into error-free pieces, so the only
/// rounding is the final one in [`fsum`].
pub fn exact_check_loss(tau: QuantileLevel, values: &[f64], q: f64) -> f64 {
    let t = tau.get();
    let mut terms = Vec::with_capacity(4 * values.len());
    for &v in values {
        let slope = if v >= q { t } else { t - 1.0 };
        let (s, e) = two_sum(v, -q);
        let (p1, p2) = two_prod(s, slope);
        let (p3, p4) = two_prod(e, slope);
        terms.extend([p1, p2, p3, p4]);
    }
    fsum(terms)
}

/// Distance from `a` to `b` in units of `b`'s last place.
pub fn ulps(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = b.abs();
    let ulp = if m == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(m.to_bits() + 1) - m
    };
    (a - b).abs() / ulp
}

pub fn leaf_sql(shape: &LatticeShape, y: &[f64], tau: QuantileLevel, rect: &Rect) -> f64 {
    let values: Vec<f64> = rect.cells(shape).map(|c| y[c]).collect();
    sql(tau, &SortedSegment::from_unsorted(values).unwrap()).sql
}

/// One candidate partition: value accumulated along its split tree and the
/// leaves in tree order.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub value: f64,
    pub leaves: Vec<Rect>,
}

/// Every gamma-feasible recursive dyadic partition of the full lattice, each
/// valued as `sum (SQL + lambda)` accumulated bottom-up along its tree.
pub fn all_rdps(shape: &LatticeShape, y: &[f64], tau: QuantileLevel, lambda: f64, gamma: usize) -> Vec<Candidate> {
    let mut memo = HashMap::new();
    enumerate(shape, y, tau, lambda, gamma, shape.full_rect(), &mut memo)
}

fn enumerate(
    shape: &LatticeShape,
    y: &[f64],
    tau: QuantileLevel,
    lambda: f64,
    gamma: usize,
    rect: Rect,
    memo: &mut HashMap<Rect, Vec<Candidate>>,
) -> Vec<Candidate> {
    if let Some(found) = memo.get(&rect) {
        return found.clone();
    }
    let mut out = vec![Candidate {
        value: leaf_sql(shape, y, tau, &rect) + lambda,
        leaves: vec![rect],
    }];
    for axis in 0..rect.ndim() {
        let (lo, hi) = (rect.lo(axis), rect.hi(axis));
        if lo == hi {
            continue;
        }
        let (left, right) = rect.split_at(axis, (lo + hi) / 2).unwrap();
        if left.size() < gamma || right.size() < gamma {
            continue;
        }
        let ls = enumerate(shape, y, tau, lambda, gamma, left, memo);
        let rs = enumerate(shape, y, tau, lambda, gamma, right, memo);
        for a in &ls {
            for b in &rs {
                let mut leaves = a.leaves.clone();
                leaves.extend_from_slice(&b.leaves);
                out.push(Candidate {
                    value: a.value + b.value,
                    leaves,
                });
            }
        }
    }
    memo.insert(rect, out.clone());
    out
}

/// Value of a split tree with the same accumulation order as [`all_rdps`].
pub fn tree_value(shape: &LatticeShape, y: &[f64], tau: QuantileLevel, lambda: f64, tree: &SplitTree) -> f64 {
    match tree {
        SplitTree::Leaf(rect) => leaf_sql(shape, y, tau, rect) + lambda,
        SplitTree::Split { children, .. } => {
            tree_value(shape, y, tau, lambda, &children.0) + tree_value(shape, y, tau, lambda, &children.1)
        }
    }
}

/// Sortable key so leaf sets can be compared regardless of order.
pub fn rect_key(r: &Rect) -> Vec<usize> {
    (0..r.ndim()).flat_map(|a| [r.lo(a), r.hi(a)]).collect()
}

pub fn same_leaves(a: &[Rect], b: &[Rect]) -> bool {
    let mut ka: Vec<_> = a.iter().map(rect_key).collect();
    let mut kb: Vec<_> = b.iter().map(rect_key).collect();
    ka.sort();
    kb.sort();
    ka == kb
}

/// Minimum over every segmentation of `y` into runs of length `>= gamma`,
/// valued left to right as `((acc + SQL) + lambda)`. Returns the value and
/// the run boundaries of one minimiser.
pub fn best_segmentation(y: &[f64], tau: QuantileLevel, lambda: f64, gamma: usize) -> (f64, Vec<(usize, usize)>) {
    let n = y.len();
    let mut best = (f64::INFINITY, Vec::new());
    let mut stack = Vec::new();
    segmentations(y, tau, lambda, gamma, 1, n, 0.0, &mut stack, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn segmentations(
    y: &[f64],
    tau: QuantileLevel,
    lambda: f64,
    gamma: usize,
    start: usize,
    n: usize,
    acc: f64,
    stack: &mut Vec<(usize, usize)>,
    best: &mut (f64, Vec<(usize, usize)>),
) {
    if start > n {
        if acc < best.0 {
            *best = (acc, stack.clone());
        }
        return;
    }
    for end in start + gamma - 1..=n {
        let cost = sql(tau, &SortedSegment::from_unsorted(y[start - 1..end].to_vec()).unwrap()).sql;
        stack.push((start, end));
        segmentations(y, tau, lambda, gamma, end + 1, n, acc + cost + lambda, stack, best);
        stack.pop();
    }
}

/// Left-to-right value of a given segmentation.
pub fn segmentation_value(y: &[f64], tau: QuantileLevel, lambda: f64, runs: &[(usize, usize)]) -> f64 {
    runs.iter().fold(0.0, |acc, &(a, b)| {
        acc + sql(tau, &SortedSegment::from_unsorted(y[a - 1..b].to_vec()).unwrap()).sql + lambda
    })
}

/// Real values with deliberate ties.
pub fn mixed_values(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.3) {
                rng.random_range(-3i32..=3) as f64
            } else {
                rng.random_range(-5.0..5.0)
            }
        })
        .collect()
}

/// Multiples of 1/4 in `[-10, 10]`, so every partial sum is exact.
pub fn quarter_values(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-40i32..=40) as f64 * 0.25).collect()
}
