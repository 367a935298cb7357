use crate::error::{Error, Result};
use crate::lattice::{LatticeShape, Rect};
use crate::ostree::RankSelect;
use crate::quantile::check_loss_from_sums;

use super::partition::{Partition, SplitTree};
use super::{check_data, FitResult, Method, SolverConfig};

/// Quantile optimal regression tree on a line.
///
/// In one dimension every segmentation is reachable by hierarchical splits,
/// so this is the interval recurrence
/// `E(j) = min_{i <= j - gamma + 1} E(i - 1) + SQL([i, j]) + lambda`.
/// For each right endpoint `j` the left endpoint scans downward while an
/// order-statistics structure maintains the segment's quantile and partial
/// sums; total work is `O(n^2 log n)`. Ties keep the longer final segment.
pub fn fit_qort_1d(y: &[f64], cfg: &SolverConfig) -> Result<FitResult> {
    let shape = LatticeShape::line(y.len().max(1))?;
    if y.is_empty() {
        return Err(Error::Data("no observations".into()));
    }
    let cfg = SolverConfig {
        method: Method::Qort1d,
        ..*cfg
    };
    cfg.check_shape(&shape)?;
    check_data(&shape, y)?;

    let n = y.len();
    let (tau, lambda, gamma) = (cfg.tau, cfg.lambda, cfg.gamma);
    let mut best = vec![f64::INFINITY; n + 1];
    let mut start = vec![0usize; n + 1];
    let mut level = vec![0.0; n + 1];
    best[0] = 0.0;

    let mut window = RankSelect::new(y);
    for j in 1..=n {
        window.clear();
        for i in (1..=j).rev() {
            window.insert(i - 1);
            let len = j - i + 1;
            if len < gamma || !best[i - 1].is_finite() {
                continue;
            }
            let k = tau.rank(len);
            let (q, s_k) = window.select_with_sum(k);
            let cost = check_loss_from_sums(tau, len, k, q, s_k, window.total());
            let candidate = best[i - 1] + cost + lambda;
            if candidate <= best[j] {
                best[j] = candidate;
                start[j] = i;
                level[j] = q;
            }
        }
    }
    if !best[n].is_finite() {
        return Err(Error::Internal("no feasible segmentation found".into()));
    }

    let mut segments = Vec::new();
    let mut j = n;
    while j > 0 {
        segments.push((start[j], j, level[j]));
        j = start[j] - 1;
    }
    segments.reverse();

    let mut theta_hat = vec![0.0; n];
    for &(a, b, q) in &segments {
        theta_hat[a - 1..b].iter_mut().for_each(|t| *t = q);
    }
    let bounds: Vec<(usize, usize)> = segments.iter().map(|&(a, b, _)| (a, b)).collect();

    Ok(FitResult {
        partition: Partition::from_tree(chain(&bounds)?),
        shape,
        theta_hat,
        objective: best[n],
        config: cfg,
    })
}

/// Split tree peeling segments off the left end one at a time.
fn chain(bounds: &[(usize, usize)]) -> Result<SplitTree> {
    let (first, rest) = bounds.split_first().expect("at least one segment");
    let leaf = SplitTree::Leaf(Rect::interval(first.0, first.1)?);
    if rest.is_empty() {
        return Ok(leaf);
    }
    let last = rest.last().expect("nonempty").1;
    Ok(SplitTree::Split {
        rect: Rect::interval(first.0, last)?,
        axis: 0,
        cut: first.1,
        children: Box::new((leaf, chain(rest)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segments(fit: &FitResult) -> Vec<(usize, usize)> {
        fit.partition.leaves().iter().map(|r| (r.lo(0), r.hi(0))).collect()
    }

    #[test]
    fn step_with_small_penalty() {
        let y = [0.0, 0.0, 0.0, 5.0, 5.0];
        let cfg = SolverConfig::qort_1d(0.5, 0.5, 1).unwrap();
        let fit = fit_qort_1d(&y, &cfg).unwrap();
        assert_eq!(segments(&fit), vec![(1, 3), (4, 5)]);
        assert_eq!(fit.objective, 1.0);
        assert_eq!(fit.theta_hat, y.to_vec());
    }

    #[test]
    fn large_penalty_gives_one_segment() {
        let y = [0.0, 5.0, 0.0, 5.0];
        let cfg = SolverConfig::qort_1d(0.5, 20.0, 1).unwrap();
        let fit = fit_qort_1d(&y, &cfg).unwrap();
        assert_eq!(segments(&fit), vec![(1, 4)]);
    }

    #[test]
    fn spike_cannot_be_isolated_below_gamma() {
        let y = [0.0, 0.0, 0.0, 100.0, 0.0, 0.0, 0.0];
        let free = fit_qort_1d(&y, &SolverConfig::qort_1d(0.5, 0.1, 1).unwrap()).unwrap();
        assert!(segments(&free).contains(&(4, 4)));
        let fit = fit_qort_1d(&y, &SolverConfig::qort_1d(0.5, 0.1, 2).unwrap()).unwrap();
        assert!(fit.partition.leaves().iter().all(|r| r.size() >= 2));
        assert!(fit.partition.check(&fit.shape, 2).is_ok());
    }

    #[test]
    fn errors() {
        let cfg = SolverConfig::qort_1d(0.5, 1.0, 4).unwrap();
        assert!(matches!(fit_qort_1d(&[1.0, 2.0], &cfg), Err(Error::Infeasible { .. })));
        assert!(matches!(fit_qort_1d(&[], &cfg), Err(Error::Data(_))));
    }
}
