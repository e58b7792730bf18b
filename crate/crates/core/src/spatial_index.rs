//! Exact k-nearest-neighbor search over a static point set with a k-d tree.
//!
//! Distances are Euclidean. Results are ordered by `(squared distance, id)`,
//! so equidistant points come back lowest id first and every query is fully
//! deterministic.

use std::cmp::Ordering;

use crate::error::{Error, Result};

const BUCKET_SIZE: usize = 16;

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub dist2: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist2.sqrt()
    }

    /// Total order used everywhere: squared distance, then id.
    #[inline]
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.id.cmp(&other.id))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

/// Neighbors sorted nearest first.
pub type NeighborList = Vec<Neighbor>;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    /// Left subtree holds points with `coord <= value`, right holds `coord >= value`.
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    /// Points in leaf order, row-major.
    points: Vec<f64>,
    /// Original id of each point in leaf order.
    ids: Vec<usize>,
    /// Leaf-order slot of each original id.
    slots: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds a tree over row-major `values` of dimension `dim`.
    pub fn build(values: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: values.len() % dim,
            });
        }
        let n = values.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / BUCKET_SIZE + 1);
        build_node(values, dim, &mut order, 0, &mut nodes);

        let mut points = Vec::with_capacity(values.len());
        let mut slots = vec![0; n];
        for (slot, &id) in order.iter().enumerate() {
            points.extend_from_slice(&values[id * dim..(id + 1) * dim]);
            slots[id] = slot;
        }
        Ok(KdTree {
            dim,
            points,
            ids: order,
            slots,
            nodes,
        })
    }

    /// Builds a tree from per-point rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        KdTree::build(&values, dim)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Point ids in leaf order; consecutive ids are spatially close.
    pub fn leaf_order(&self) -> &[usize] {
        &self.ids
    }

    pub fn point(&self, id: usize) -> &[f64] {
        let slot = self.slots[id];
        &self.points[slot * self.dim..(slot + 1) * self.dim]
    }

    /// The `min(k, candidates)` nearest points to `query`, nearest first.
    /// `exclude` removes one point id from the candidate set.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<NeighborList> {
        self.check_dim(query)?;
        if k == 0 {
            return Err(Error::KOutOfRange { k, max: self.len() });
        }
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        let k = k.min(available);
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut best = Vec::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut best);
        Ok(best)
    }

    /// The `r`-th (1-based) nearest neighbor of `query`.
    pub fn rth_neighbor(&self, query: &[f64], r: usize, exclude: Option<usize>) -> Result<Neighbor> {
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        if r == 0 || r > available {
            return Err(Error::RankOutOfRange { rank: r, available });
        }
        let list = self.knn(query, r, exclude)?;
        Ok(list[r - 1])
    }

    /// Calls `f(id, dist2)` for every point strictly closer than
    /// `sqrt(radius2)` to `query`, in no particular order.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, query: &[f64], radius2: f64, mut f: F) -> Result<()> {
        self.check_dim(query)?;
        self.range(0, query, radius2, &mut f);
        Ok(())
    }

    fn range<F: FnMut(usize, f64)>(&self, node: usize, query: &[f64], radius2: f64, f: &mut F) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = squared_distance(query, &self.points[slot * self.dim..(slot + 1) * self.dim]);
                    if d2 < radius2 {
                        f(self.ids[slot], d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.range(near, query, radius2, f);
                if diff * diff < radius2 {
                    self.range(far, query, radius2, f);
                }
            }
        }
    }

    fn check_dim(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        Ok(())
    }

    fn search(&self, node: usize, query: &[f64], k: usize, exclude: Option<usize>, best: &mut NeighborList) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let id = self.ids[slot];
                    if Some(id) == exclude {
                        continue;
                    }
                    let p = &self.points[slot * self.dim..(slot + 1) * self.dim];
                    let cand = Neighbor {
                        id,
                        dist2: squared_distance(query, p),
                    };
                    if best.len() == k && cand >= best[k - 1] {
                        continue;
                    }
                    // Small k: a sorted insert beats a heap.
                    let at = best.partition_point(|n| *n < cand);
                    best.insert(at, cand);
                    best.truncate(k);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, exclude, best);
                // `<=` keeps equidistant far-side points with lower ids reachable.
                let worst = if best.len() < k {
                    f64::INFINITY
                } else {
                    best[k - 1].dist2
                };
                if diff * diff <= worst {
                    self.search(far, query, k, exclude, best);
                }
            }
        }
    }
}

fn build_node(values: &[f64], dim: usize, order: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let idx = nodes.len();
    if order.len() <= BUCKET_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + order.len(),
        });
        return idx;
    }
    let coord = |id: usize, axis: usize| values[id * dim + axis];

    let mut axis = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for a in 0..dim {
        let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &id| {
            let v = coord(id, a);
            (lo.min(v), hi.max(v))
        });
        if hi - lo > best_spread {
            best_spread = hi - lo;
            axis = a;
        }
    }

    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| coord(a, axis).total_cmp(&coord(b, axis)));
    let value = coord(order[mid], axis);

    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(values, dim, lo, offset, nodes);
    let right = build_node(values, dim, hi, offset + mid, nodes);
    nodes[idx] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    idx
}
