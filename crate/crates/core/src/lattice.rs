//! Lattice geometry: shapes, rectangles and dyadic splitting.
//!
//! Interval endpoints are 1-based and inclusive. Axes are 0-based. Cell
//! storage is row-major with the first axis varying slowest, and
//! [`Rect::cells`] yields 0-based offsets into that storage.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIMS: usize = 4;

/// Side lengths of a `d`-dimensional lattice, `1 <= d <= 4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeShape {
    dims: Vec<usize>,
    len: usize,
}

impl LatticeShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() || dims.len() > MAX_DIMS {
            return Err(Error::Usage(format!(
                "lattice dimension must be between 1 and {MAX_DIMS}, got {}",
                dims.len()
            )));
        }
        if let Some(axis) = dims.iter().position(|&n| n == 0) {
            return Err(Error::Usage(format!("side length of axis {axis} is zero")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::Usage("lattice has too many cells".into()))?;
        Ok(Self { dims, len })
    }

    /// One-dimensional lattice with `n` cells.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `d`-dimensional lattice with every side equal to `n`.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total number of cells `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn full_rect(&self) -> Rect {
        let ones = [1usize; MAX_DIMS];
        Rect::new(&ones[..self.ndim()], &self.dims).expect("shape sides are positive")
    }

    /// Row-major strides, first axis slowest.
    pub fn strides(&self) -> [usize; MAX_DIMS] {
        let mut strides = [0usize; MAX_DIMS];
        let mut acc = 1;
        for axis in (0..self.ndim()).rev() {
            strides[axis] = acc;
            acc *= self.dims[axis];
        }
        strides
    }

    /// 0-based storage offset of the cell with 1-based coordinates `coords`.
    pub fn offset(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.ndim());
        let strides = self.strides();
        coords.iter().zip(&strides).map(|(&c, &s)| (c - 1) * s).sum()
    }

    /// 1-based coordinates of the cell stored at `offset`.
    pub fn coords(&self, mut offset: usize) -> [usize; MAX_DIMS] {
        let mut coords = [0usize; MAX_DIMS];
        for axis in (0..self.ndim()).rev() {
            coords[axis] = offset % self.dims[axis] + 1;
            offset /= self.dims[axis];
        }
        coords
    }

    pub fn contains(&self, rect: &Rect) -> bool {
        rect.ndim() == self.ndim() && (0..self.ndim()).all(|a| rect.hi(a) <= self.dims[a])
    }
}

impl fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sides: Vec<String> = self.dims.iter().map(ToString::to_string).collect();
        write!(f, "{}", sides.join("x"))
    }
}

/// Axis-aligned discrete rectangle `[a_1,b_1] x ... x [a_d,b_d]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    ndim: u8,
    lo: [usize; MAX_DIMS],
    hi: [usize; MAX_DIMS],
}

impl Rect {
    pub fn new(lo: &[usize], hi: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > MAX_DIMS {
            return Err(Error::Usage("rectangle bounds have mismatched dimension".into()));
        }
        let mut rect = Rect {
            ndim: lo.len() as u8,
            lo: [1; MAX_DIMS],
            hi: [1; MAX_DIMS],
        };
        for axis in 0..lo.len() {
            if lo[axis] == 0 || lo[axis] > hi[axis] {
                return Err(Error::Usage(format!(
                    "invalid interval [{}, {}] on axis {axis}",
                    lo[axis], hi[axis]
                )));
            }
            rect.lo[axis] = lo[axis];
            rect.hi[axis] = hi[axis];
        }
        Ok(rect)
    }

    /// One-dimensional interval `[a, b]`.
    pub fn interval(a: usize, b: usize) -> Result<Self> {
        Self::new(&[a], &[b])
    }

    pub fn ndim(&self) -> usize {
        self.ndim as usize
    }

    pub fn lo(&self, axis: usize) -> usize {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> usize {
        self.hi[axis]
    }

    pub fn side(&self, axis: usize) -> usize {
        self.hi[axis] - self.lo[axis] + 1
    }

    /// Number of cells.
    pub fn size(&self) -> usize {
        (0..self.ndim()).map(|a| self.side(a)).product()
    }

    /// Sum of the side lengths.
    pub fn length(&self) -> usize {
        (0..self.ndim()).map(|a| self.side(a)).sum()
    }

    fn with_axis(mut self, axis: usize, lo: usize, hi: usize) -> Self {
        self.lo[axis] = lo;
        self.hi[axis] = hi;
        self
    }

    /// Splits at `[a, b] -> [a, m], [m+1, b]` with `m = floor((a+b)/2)`, or
    /// returns `None` on a singleton cut at `cut` where `lo <= cut < hi`.
    pub fn split_at(&self, axis: usize, cut: usize) -> Option<(Rect, Rect)> {
        if cut < self.lo[axis] || cut >= self.hi[axis] {
            return None;
        }
        Some((
            self.with_axis(axis, self.lo[axis], cut),
            self.with_axis(axis, cut + 1, self.hi[axis]),
        ))
    }

    pub fn contains_cell(&self, coords: &[usize]) -> bool {
        (0..self.ndim()).all(|a| self.lo[a] <= coords[a] && coords[a] <= self.hi[a])
    }

    /// Storage offsets of the cells in `self`, row-major.
    pub fn cells<'a>(&self, shape: &'a LatticeShape) -> Cells<'a> {
        debug_assert!(shape.contains(self));
        Cells {
            shape,
            rect: *self,
            cursor: self.lo,
            done: false,
        }
    }
}

impl fmt::Debug for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axis in 0..self.ndim() {
            if axis > 0 {
                f.write_str("x")?;
            }
            write!(f, "[{},{}]", self.lo[axis], self.hi[axis])?;
        }
        Ok(())
    }
}

/// Iterator over the storage offsets of a rectangle.
pub struct Cells<'a> {
    shape: &'a LatticeShape,
    rect: Rect,
    cursor: [usize; MAX_DIMS],
    done: bool,
}

impl Iterator for Cells<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let d = self.rect.ndim();
        let out = self.shape.offset(&self.cursor[..d]);
        // odometer increment, last axis fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            if self.cursor[axis] < self.rect.hi[axis] {
                self.cursor[axis] += 1;
                break;
            }
            self.cursor[axis] = self.rect.lo[axis];
        }
        Some(out)
    }
}

/// Midpoint of `[a, b]`; the left half receives the extra cell.
#[inline]
pub fn midpoint(a: usize, b: usize) -> usize {
    (a + b) / 2
}

/// Dyadic split of `rect` along `axis`; `None` when that side is a singleton.
pub fn dyadic_split(rect: &Rect, axis: usize) -> Result<Option<(Rect, Rect)>> {
    if axis >= rect.ndim() {
        return Err(Error::Usage(format!(
            "axis {axis} out of range for a {}-dimensional rectangle",
            rect.ndim()
        )));
    }
    Ok(rect.split_at(axis, midpoint(rect.lo(axis), rect.hi(axis))))
}

/// Split along the first non-singleton axis; `None` for a single cell.
pub fn canonical_split(rect: &Rect) -> Option<(usize, Rect, Rect)> {
    (0..rect.ndim()).find(|&a| rect.side(a) > 1).and_then(|a| {
        rect.split_at(a, midpoint(rect.lo(a), rect.hi(a)))
            .map(|(l, r)| (a, l, r))
    })
}

/// Dense key of a dyadic rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicId(pub u32);

impl DyadicId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
struct IntervalNode {
    lo: usize,
    hi: usize,
    children: Option<(u32, u32)>,
}

impl IntervalNode {
    fn len(&self) -> usize {
        self.hi - self.lo + 1
    }
}

/// Dyadic intervals of one axis, ordered by (length, lower endpoint) so the
/// singleton `[i, i]` has index `i - 1`.
#[derive(Debug, Clone)]
struct AxisIntervals {
    nodes: Vec<IntervalNode>,
    lookup: HashMap<(usize, usize), u32>,
    root: u32,
}

impl AxisIntervals {
    fn new(n: usize) -> Self {
        let mut spans = Vec::with_capacity(2 * n - 1);
        let mut stack = vec![(1usize, n)];
        while let Some((a, b)) = stack.pop() {
            spans.push((a, b));
            if a < b {
                let m = midpoint(a, b);
                stack.push((a, m));
                stack.push((m + 1, b));
            }
        }
        spans.sort_by_key(|&(a, b)| (b - a, a));
        let lookup: HashMap<(usize, usize), u32> =
            spans.iter().enumerate().map(|(i, &span)| (span, i as u32)).collect();
        let nodes = spans
            .iter()
            .map(|&(a, b)| IntervalNode {
                lo: a,
                hi: b,
                children: (a < b).then(|| {
                    let m = midpoint(a, b);
                    (lookup[&(a, m)], lookup[&(m + 1, b)])
                }),
            })
            .collect();
        let root = lookup[&(1, n)];
        Self { nodes, lookup, root }
    }
}

/// Enumeration and O(1) navigation of every dyadic rectangle of a lattice.
///
/// Ids pack the per-axis interval indices in mixed radix, first axis most
/// significant.
#[derive(Debug, Clone)]
pub struct DyadicIndex {
    shape: LatticeShape,
    axes: Vec<AxisIntervals>,
    strides: [usize; MAX_DIMS],
    count: usize,
    order: Vec<DyadicId>,
}

impl DyadicIndex {
    pub fn new(shape: &LatticeShape) -> Self {
        let axes: Vec<AxisIntervals> = shape.dims().iter().map(|&n| AxisIntervals::new(n)).collect();
        let mut strides = [0usize; MAX_DIMS];
        let mut count = 1usize;
        for axis in (0..axes.len()).rev() {
            strides[axis] = count;
            count *= axes[axis].nodes.len();
        }
        assert!(count <= u32::MAX as usize, "too many dyadic rectangles");

        // counting sort by length keeps children ahead of parents
        let max_len: usize = shape.dims().iter().sum();
        let mut buckets = vec![0usize; max_len + 2];
        let mut lengths = Vec::with_capacity(count);
        let mut idx = [0usize; MAX_DIMS];
        for id in 0..count {
            let mut rem = id;
            for axis in 0..axes.len() {
                idx[axis] = rem / strides[axis];
                rem %= strides[axis];
            }
            let len: usize = (0..axes.len()).map(|a| axes[a].nodes[idx[a]].len()).sum();
            lengths.push(len);
            buckets[len + 1] += 1;
        }
        for i in 1..buckets.len() {
            buckets[i] += buckets[i - 1];
        }
        let mut order = vec![DyadicId(0); count];
        for (id, &len) in lengths.iter().enumerate() {
            order[buckets[len]] = DyadicId(id as u32);
            buckets[len] += 1;
        }

        Self {
            shape: shape.clone(),
            axes,
            strides,
            count,
            order,
        }
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    /// Number of dyadic rectangles.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn root(&self) -> DyadicId {
        let id = (0..self.axes.len())
            .map(|a| self.axes[a].root as usize * self.strides[a])
            .sum::<usize>();
        DyadicId(id as u32)
    }

    #[inline]
    fn component(&self, id: DyadicId, axis: usize) -> usize {
        (id.index() / self.strides[axis]) % self.axes[axis].nodes.len()
    }

    #[inline]
    fn node(&self, id: DyadicId, axis: usize) -> &IntervalNode {
        &self.axes[axis].nodes[self.component(id, axis)]
    }

    pub fn rect(&self, id: DyadicId) -> Rect {
        let d = self.axes.len();
        let mut lo = [1usize; MAX_DIMS];
        let mut hi = [1usize; MAX_DIMS];
        for axis in 0..d {
            let node = self.node(id, axis);
            lo[axis] = node.lo;
            hi[axis] = node.hi;
        }
        Rect { ndim: d as u8, lo, hi }
    }

    pub fn size(&self, id: DyadicId) -> usize {
        (0..self.axes.len()).map(|a| self.node(id, a).len()).product()
    }

    /// Id of `rect` when it is dyadic.
    pub fn id_of(&self, rect: &Rect) -> Option<DyadicId> {
        if rect.ndim() != self.axes.len() {
            return None;
        }
        let mut id = 0usize;
        for axis in 0..self.axes.len() {
            let i = *self.axes[axis].lookup.get(&(rect.lo(axis), rect.hi(axis)))?;
            id += i as usize * self.strides[axis];
        }
        Some(DyadicId(id as u32))
    }

    /// Id of the single cell stored at `offset`.
    pub fn cell_id(&self, offset: usize) -> DyadicId {
        let coords = self.shape.coords(offset);
        let id: usize = (0..self.axes.len()).map(|a| (coords[a] - 1) * self.strides[a]).sum();
        DyadicId(id as u32)
    }

    /// Children of the dyadic split along `axis`, `None` on a singleton side.
    #[inline]
    pub fn children(&self, id: DyadicId, axis: usize) -> Option<(DyadicId, DyadicId)> {
        let comp = self.component(id, axis);
        let (l, r) = self.axes[axis].nodes[comp].children?;
        let base = id.index() - comp * self.strides[axis];
        Some((
            DyadicId((base + l as usize * self.strides[axis]) as u32),
            DyadicId((base + r as usize * self.strides[axis]) as u32),
        ))
    }

    /// Children along the first non-singleton axis.
    #[inline]
    pub fn canonical_children(&self, id: DyadicId) -> Option<(usize, DyadicId, DyadicId)> {
        (0..self.axes.len()).find_map(|a| self.children(id, a).map(|(l, r)| (a, l, r)))
    }

    /// Ids in nondecreasing order of rectangle length.
    pub fn order(&self) -> &[DyadicId] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicId, Rect)> + '_ {
        self.order.iter().map(move |&id| (id, self.rect(id)))
    }
}

/// Every dyadic rectangle of `shape`, children before parents.
pub fn enumerate_dyadic_rects(shape: &LatticeShape) -> impl Iterator<Item = (DyadicId, Rect)> {
    let index = DyadicIndex::new(shape);
    let items: Vec<(DyadicId, Rect)> = index.iter().collect();
    items.into_iter()
}
