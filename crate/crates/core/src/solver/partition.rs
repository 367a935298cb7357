use crate::error::{Error, Result};
use crate::lattice::{midpoint, LatticeShape, Rect};
use crate::quantile::{empirical_quantile, QuantileLevel, SortedSegment};

/// Recursive record of the splits that produced a partition.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTree {
    Leaf(Rect),
    Split {
        rect: Rect,
        axis: usize,
        /// Last coordinate of the left child along `axis`.
        cut: usize,
        children: Box<(SplitTree, SplitTree)>,
    },
}

impl SplitTree {
    pub fn rect(&self) -> Rect {
        match self {
            SplitTree::Leaf(r) | SplitTree::Split { rect: r, .. } => *r,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SplitTree::Leaf(_) => 0,
            SplitTree::Split { children, .. } => 1 + children.0.depth().max(children.1.depth()),
        }
    }

    fn collect_leaves(&self, out: &mut Vec<Rect>) {
        match self {
            SplitTree::Leaf(r) => out.push(*r),
            SplitTree::Split { children, .. } => {
                children.0.collect_leaves(out);
                children.1.collect_leaves(out);
            }
        }
    }

    /// True when every split cuts at the dyadic midpoint.
    pub fn is_dyadic(&self) -> bool {
        match self {
            SplitTree::Leaf(_) => true,
            SplitTree::Split {
                rect,
                axis,
                cut,
                children,
            } => *cut == midpoint(rect.lo(*axis), rect.hi(*axis)) && children.0.is_dyadic() && children.1.is_dyadic(),
        }
    }
}

/// Leaves of a split tree, in left-to-right tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    tree: SplitTree,
    leaves: Vec<Rect>,
}

impl Partition {
    pub fn from_tree(tree: SplitTree) -> Self {
        let mut leaves = Vec::new();
        tree.collect_leaves(&mut leaves);
        Self { tree, leaves }
    }

    /// The single-rectangle partition of `shape`.
    pub fn trivial(shape: &LatticeShape) -> Self {
        Self::from_tree(SplitTree::Leaf(shape.full_rect()))
    }

    pub fn tree(&self) -> &SplitTree {
        &self.tree
    }

    pub fn leaves(&self) -> &[Rect] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Leaf index of every cell.
    pub fn labels(&self, shape: &LatticeShape) -> Vec<usize> {
        let mut labels = vec![usize::MAX; shape.len()];
        for (k, leaf) in self.leaves.iter().enumerate() {
            for c in leaf.cells(shape) {
                labels[c] = k;
            }
        }
        labels
    }

    /// Verifies that the leaves tile `shape` and all hold `>= gamma` cells.
    pub fn check(&self, shape: &LatticeShape, gamma: usize) -> Result<()> {
        let mut seen = vec![false; shape.len()];
        for leaf in &self.leaves {
            if !shape.contains(leaf) {
                return Err(Error::Internal(format!("leaf {leaf} lies outside the lattice")));
            }
            if leaf.size() < gamma {
                return Err(Error::Internal(format!(
                    "leaf {leaf} has {} cells, fewer than gamma = {gamma}",
                    leaf.size()
                )));
            }
            for c in leaf.cells(shape) {
                if std::mem::replace(&mut seen[c], true) {
                    return Err(Error::Internal(format!("leaf {leaf} overlaps another leaf")));
                }
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Internal(format!("cell {} is not covered", c + 1)));
        }
        Ok(())
    }
}

/// Replaces every cell by the empirical `tau`-quantile of its leaf.
pub fn project(partition: &Partition, shape: &LatticeShape, y: &[f64], tau: QuantileLevel) -> Result<Vec<f64>> {
    super::check_data(shape, y)?;
    let mut out = vec![f64::NAN; shape.len()];
    for leaf in partition.leaves() {
        let values: Vec<f64> = leaf.cells(shape).map(|c| y[c]).collect();
        let q = empirical_quantile(tau, &SortedSegment::from_unsorted(values)?);
        for c in leaf.cells(shape) {
            out[c] = q;
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::Usage("partition does not cover the lattice".into()));
    }
    Ok(out)
}
