use crate::error::{Error, Result};
use crate::lattice::{DyadicId, DyadicIndex, LatticeShape};
use crate::moments::MomentTable;
use crate::quantile::{merge, sql, QuantileLevel, RectCost, SortedSegment};

use super::partition::{Partition, SplitTree};
use super::{check_data, FitResult, Method, SolverConfig};

/// Optimal first move for a dyadic rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitDecision {
    /// Rectangle holds fewer than `gamma` cells.
    Unvisited,
    /// Keep the rectangle as one piece.
    Leaf,
    /// Split at the dyadic midpoint of this axis.
    Split(usize),
}

/// Unpenalized cost of keeping a rectangle whole, and its fitted constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafCost {
    pub loss: f64,
    pub value: f64,
}

impl From<RectCost> for LeafCost {
    fn from(c: RectCost) -> Self {
        Self {
            loss: c.sql,
            value: c.quantile,
        }
    }
}

/// Lifetime of the sorted segments built while computing leaf costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegmentRetention {
    /// Drop a segment once every rectangle that merges it has been built.
    #[default]
    Release,
    /// Keep every segment until the costs are complete.
    RetainAll,
}

/// `OPT`, `SPLIT` and leaf-cost tables indexed by [`DyadicId`].
#[derive(Debug, Clone)]
pub struct DpTables {
    pub opt: Vec<f64>,
    pub split: Vec<SplitDecision>,
    pub cost: Vec<Option<LeafCost>>,
    pub lambda: f64,
}

/// Leaf costs of every feasible dyadic rectangle, computed once and reused
/// across penalties.
#[derive(Debug, Clone)]
pub struct DyadicSolver {
    index: DyadicIndex,
    method: Method,
    tau: QuantileLevel,
    gamma: usize,
    costs: Vec<Option<LeafCost>>,
}

impl DyadicSolver {
    /// Check-loss costs; sorted segments are merged bottom-up along canonical
    /// splits.
    pub fn qdcart(shape: &LatticeShape, y: &[f64], tau: QuantileLevel, gamma: usize) -> Result<Self> {
        Self::qdcart_with(shape, y, tau, gamma, SegmentRetention::Release)
    }

    pub fn qdcart_with(
        shape: &LatticeShape,
        y: &[f64],
        tau: QuantileLevel,
        gamma: usize,
        retention: SegmentRetention,
    ) -> Result<Self> {
        check_data(shape, y)?;
        check_gamma(shape, gamma)?;
        let index = DyadicIndex::new(shape);
        let m = index.len();

        // number of rectangles whose canonical split consumes each segment
        let mut pending = vec![0u8; m];
        for &id in index.order() {
            if let Some((_, l, r)) = index.canonical_children(id) {
                pending[l.index()] += 1;
                pending[r.index()] += 1;
            }
        }

        let mut segments: Vec<Option<SortedSegment>> = vec![None; m];
        let mut costs = vec![None; m];
        for &id in index.order() {
            let seg = match index.canonical_children(id) {
                None => {
                    let cell = index.rect(id).cells(shape).next().expect("nonempty rect");
                    SortedSegment::singleton(y[cell])
                }
                Some((_, l, r)) => {
                    let merged = merge(
                        segments[l.index()].as_ref().expect("child segment built"),
                        segments[r.index()].as_ref().expect("child segment built"),
                    );
                    if retention == SegmentRetention::Release {
                        for child in [l, r] {
                            pending[child.index()] -= 1;
                            if pending[child.index()] == 0 {
                                segments[child.index()] = None;
                            }
                        }
                    }
                    merged
                }
            };
            if seg.len() >= gamma {
                costs[id.index()] = Some(sql(tau, &seg).into());
            }
            if pending[id.index()] > 0 || retention == SegmentRetention::RetainAll {
                segments[id.index()] = Some(seg);
            }
        }

        Ok(Self {
            index,
            method: Method::Qdcart,
            tau,
            gamma,
            costs,
        })
    }

    /// Squared-error costs from summed-area tables of the first two moments.
    pub fn dcart(shape: &LatticeShape, y: &[f64], gamma: usize) -> Result<Self> {
        check_data(shape, y)?;
        check_gamma(shape, gamma)?;
        let index = DyadicIndex::new(shape);
        let table = MomentTable::new(shape, y);
        let mut costs = vec![None; index.len()];
        for &id in index.order() {
            if index.size(id) < gamma {
                continue;
            }
            let (count, s1, s2) = table.moments(&index.rect(id));
            costs[id.index()] = Some(LeafCost {
                loss: crate::quantile::sse(count, s1, s2)?,
                value: s1 / count as f64,
            });
        }
        Ok(Self {
            index,
            method: Method::Dcart,
            tau: QuantileLevel::MEDIAN,
            gamma,
            costs,
        })
    }

    pub fn index(&self) -> &DyadicIndex {
        &self.index
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn tau(&self) -> QuantileLevel {
        self.tau
    }

    /// Leaf cost of a dyadic rectangle, `None` when it is below `gamma`.
    pub fn leaf_cost(&self, id: DyadicId) -> Option<LeafCost> {
        self.costs[id.index()]
    }

    /// Bottom-up recurrence `OPT(R) = min(cost(R) + lambda, OPT(R1) + OPT(R2))`
    /// over feasible dyadic splits. Ties keep the rectangle whole, then favour
    /// the lowest axis.
    pub fn tables(&self, lambda: f64) -> Result<DpTables> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        let m = self.index.len();
        let d = self.index.shape().ndim();
        let mut opt = vec![f64::NAN; m];
        let mut split = vec![SplitDecision::Unvisited; m];
        for &id in self.index.order() {
            let Some(cost) = self.costs[id.index()] else {
                continue;
            };
            let mut best = cost.loss + lambda;
            let mut decision = SplitDecision::Leaf;
            for axis in 0..d {
                let Some((l, r)) = self.index.children(id, axis) else {
                    continue;
                };
                if self.costs[l.index()].is_none() || self.costs[r.index()].is_none() {
                    continue;
                }
                let candidate = opt[l.index()] + opt[r.index()];
                if candidate < best {
                    best = candidate;
                    decision = SplitDecision::Split(axis);
                }
            }
            opt[id.index()] = best;
            split[id.index()] = decision;
        }
        Ok(DpTables {
            opt,
            split,
            cost: self.costs.clone(),
            lambda,
        })
    }

    pub fn fit(&self, lambda: f64) -> Result<FitResult> {
        let tables = self.tables(lambda)?;
        let (partition, leaf_ids) = walk(&tables, &self.index, self.gamma)?;
        let shape = self.index.shape();
        let mut theta_hat = vec![0.0; shape.len()];
        for (leaf, id) in partition.leaves().iter().zip(&leaf_ids) {
            let value = tables.cost[id.index()]
                .ok_or_else(|| Error::Internal(format!("leaf {leaf} has no cost entry")))?
                .value;
            for c in leaf.cells(shape) {
                theta_hat[c] = value;
            }
        }
        Ok(FitResult {
            shape: shape.clone(),
            theta_hat,
            partition,
            objective: tables.opt[self.index.root().index()],
            config: SolverConfig {
                method: self.method,
                tau: self.tau,
                lambda,
                gamma: self.gamma,
            },
        })
    }
}

fn check_gamma(shape: &LatticeShape, gamma: usize) -> Result<()> {
    if gamma == 0 {
        return Err(Error::Config("gamma must be at least 1".into()));
    }
    if gamma > shape.len() {
        return Err(Error::Infeasible {
            gamma,
            cells: shape.len(),
        });
    }
    Ok(())
}

/// Follows the `SPLIT` decisions top-down from the full lattice.
pub fn extract_partition(tables: &DpTables, index: &DyadicIndex, gamma: usize) -> Result<Partition> {
    walk(tables, index, gamma).map(|(p, _)| p)
}

fn walk(tables: &DpTables, index: &DyadicIndex, gamma: usize) -> Result<(Partition, Vec<DyadicId>)> {
    fn go(
        id: DyadicId,
        tables: &DpTables,
        index: &DyadicIndex,
        gamma: usize,
        leaf_ids: &mut Vec<DyadicId>,
    ) -> Result<SplitTree> {
        let rect = index.rect(id);
        let decision = tables
            .split
            .get(id.index())
            .copied()
            .ok_or_else(|| Error::Internal(format!("no table entry for {rect}")))?;
        match decision {
            SplitDecision::Unvisited => Err(Error::Internal(format!("no table entry for {rect}"))),
            SplitDecision::Leaf => {
                if rect.size() < gamma {
                    return Err(Error::Internal(format!("leaf {rect} is smaller than gamma = {gamma}")));
                }
                leaf_ids.push(id);
                Ok(SplitTree::Leaf(rect))
            }
            SplitDecision::Split(axis) => {
                let (l, r) = index
                    .children(id, axis)
                    .ok_or_else(|| Error::Internal(format!("{rect} cannot split on axis {axis}")))?;
                let left = go(l, tables, index, gamma, leaf_ids)?;
                let right = go(r, tables, index, gamma, leaf_ids)?;
                Ok(SplitTree::Split {
                    rect,
                    axis,
                    cut: index.rect(l).hi(axis),
                    children: Box::new((left, right)),
                })
            }
        }
    }

    let mut leaf_ids = Vec::new();
    let tree = go(index.root(), tables, index, gamma, &mut leaf_ids)?;
    Ok((Partition::from_tree(tree), leaf_ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Rect;
    use crate::solver::{fit_dcart, fit_qdcart};

    fn line(n: usize) -> LatticeShape {
        LatticeShape::line(n).unwrap()
    }

    fn intervals(p: &Partition) -> Vec<(usize, usize)> {
        p.leaves().iter().map(|r| (r.lo(0), r.hi(0))).collect()
    }

    #[test]
    fn two_level_step_small_penalty() {
        let y = [0.0, 0.0, 10.0, 10.0];
        let cfg = SolverConfig::qdcart(0.5, 1.0, 1).unwrap();
        let fit = fit_qdcart(&line(4), &y, &cfg).unwrap();
        assert_eq!(intervals(&fit.partition), vec![(1, 2), (3, 4)]);
        assert_eq!(fit.theta_hat, y.to_vec());
        assert_eq!(fit.objective, 2.0);
    }

    #[test]
    fn two_level_step_large_penalty() {
        let y = [0.0, 0.0, 10.0, 10.0];
        let cfg = SolverConfig::qdcart(0.5, 20.0, 1).unwrap();
        let fit = fit_qdcart(&line(4), &y, &cfg).unwrap();
        assert_eq!(fit.leaf_count(), 1);
        assert_eq!(fit.theta_hat, vec![0.0; 4]);
        assert_eq!(fit.objective, 30.0);
    }

    #[test]
    fn gamma_equal_to_n_forces_one_leaf() {
        let shape = LatticeShape::new(vec![3, 5]).unwrap();
        let y: Vec<f64> = (0..15).map(|i| ((i * 37) % 13) as f64).collect();
        let cfg = SolverConfig::qdcart(0.7, 1e-3, 15).unwrap();
        let fit = fit_qdcart(&shape, &y, &cfg).unwrap();
        assert_eq!(fit.leaf_count(), 1);
        let mut sorted = y.clone();
        sorted.sort_by(f64::total_cmp);
        let q = sorted[cfg.tau.rank(15) - 1];
        assert!(fit.theta_hat.iter().all(|&t| t == q));
    }

    #[test]
    fn constant_data_gives_one_leaf() {
        let shape = LatticeShape::cube(2, 8).unwrap();
        let y = vec![-3.25; 64];
        for gamma in [1, 4, 64] {
            let cfg = SolverConfig::qdcart(0.2, 0.5, gamma).unwrap();
            let fit = fit_qdcart(&shape, &y, &cfg).unwrap();
            assert_eq!(fit.leaf_count(), 1);
            assert_eq!(fit.objective, 0.5);
            assert_eq!(fit.theta_hat, y);
        }
    }

    #[test]
    fn dcart_examples() {
        let y = [0.0, 0.0, 10.0, 10.0];
        let cfg = SolverConfig::dcart(1.0, 1).unwrap();
        let fit = fit_dcart(&line(4), &y, &cfg).unwrap();
        assert_eq!(fit.leaf_count(), 2);
        assert_eq!(fit.theta_hat, y.to_vec());
        assert_eq!(fit.objective, 2.0);

        let shape = LatticeShape::cube(2, 2).unwrap();
        let fit = fit_dcart(&shape, &[0.0, 0.0, 8.0, 8.0], &cfg).unwrap();
        assert_eq!(fit.objective, 2.0);
        assert_eq!(fit.theta_hat, vec![0.0, 0.0, 8.0, 8.0]);
        match fit.partition.tree() {
            SplitTree::Split { axis, .. } => assert_eq!(*axis, 0),
            other => panic!("expected a split, got {other:?}"),
        }

        let fit = fit_dcart(&shape, &[4.0; 4], &cfg).unwrap();
        assert_eq!(fit.leaf_count(), 1);
    }

    #[test]
    fn extract_partition_examples() {
        let shape = line(4);
        let y = [0.0, 0.0, 10.0, 10.0];
        let solver = DyadicSolver::qdcart(&shape, &y, QuantileLevel::MEDIAN, 1).unwrap();
        let tables = solver.tables(1.0).unwrap();
        let p = extract_partition(&tables, solver.index(), 1).unwrap();
        assert_eq!(intervals(&p), vec![(1, 2), (3, 4)]);
        assert_eq!(p.tree().depth(), 1);

        let mut all_leaf = tables.clone();
        all_leaf.split.iter_mut().for_each(|s| *s = SplitDecision::Leaf);
        let p = extract_partition(&all_leaf, solver.index(), 1).unwrap();
        assert_eq!(p.leaves(), &[Rect::interval(1, 4).unwrap()]);

        let mut broken = tables;
        let left = solver.index().id_of(&Rect::interval(1, 2).unwrap()).unwrap();
        broken.split[left.index()] = SplitDecision::Unvisited;
        assert!(matches!(
            extract_partition(&broken, solver.index(), 1),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn retention_modes_agree() {
        let shape = LatticeShape::new(vec![6, 7]).unwrap();
        let y: Vec<f64> = (0..42).map(|i| ((i * 29) % 17) as f64 * 0.3).collect();
        let tau = QuantileLevel::new(0.4).unwrap();
        let a = DyadicSolver::qdcart_with(&shape, &y, tau, 2, SegmentRetention::Release).unwrap();
        let b = DyadicSolver::qdcart_with(&shape, &y, tau, 2, SegmentRetention::RetainAll).unwrap();
        assert_eq!(a.costs, b.costs);
    }

    #[test]
    fn table_invariants() {
        let shape = LatticeShape::new(vec![8, 4]).unwrap();
        let y: Vec<f64> = (0..32).map(|i| ((i * 13) % 7) as f64).collect();
        let solver = DyadicSolver::qdcart(&shape, &y, QuantileLevel::new(0.3).unwrap(), 2).unwrap();
        let t = solver.tables(0.7).unwrap();
        for &id in solver.index().order() {
            match t.cost[id.index()] {
                Some(c) => assert!(t.opt[id.index()] <= c.loss + 0.7),
                None => assert_eq!(t.split[id.index()], SplitDecision::Unvisited),
            }
        }
    }
}
