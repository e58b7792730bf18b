use crate::error::{Error, Result};
use crate::spatial_index::{KdTree, Neighbor, NeighborList};

/// Directed kNN graph over the training set: vertex `i` points at its
/// `depth()` nearest training points, edge weights are distances.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKnnGraph {
    lists: Vec<NeighborList>,
    labels: Vec<usize>,
    n_classes: usize,
    k_max: usize,
}

impl WeightedKnnGraph {
    /// Queries `index` for the `min(k_max, m - 1)` nearest neighbors of every point.
    pub fn build(index: &KdTree, labels: &[usize], n_classes: usize, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::KOutOfRange { k: 0, max: index.len() });
        }
        let lists = (0..index.len())
            .map(|i| index.knn(index.point(i), k_max, Some(i)))
            .collect::<Result<Vec<_>>>()?;
        let mut graph = WeightedKnnGraph::from_lists(lists, labels.to_vec(), n_classes)?;
        graph.k_max = k_max;
        Ok(graph)
    }

    pub fn from_lists(lists: Vec<NeighborList>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if lists.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} neighbor lists for {} labels",
                lists.len(),
                labels.len()
            )));
        }
        let depth = lists.first().map_or(0, Vec::len);
        for (i, list) in lists.iter().enumerate() {
            if list.len() != depth {
                return Err(Error::InvalidArgument(format!(
                    "neighbor list {i} has {} entries, expected {depth}",
                    list.len()
                )));
            }
            if list.iter().any(|n| n.id >= lists.len() || n.id == i) {
                return Err(Error::InvalidArgument(format!("neighbor list {i} has an invalid id")));
            }
            if list.windows(2).any(|w| w[0].rank_cmp(&w[1]).is_gt()) {
                return Err(Error::InvalidArgument(format!("neighbor list {i} is not sorted")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidArgument(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(WeightedKnnGraph {
            lists,
            labels,
            n_classes,
            k_max: depth,
        })
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Overrides the requested neighborhood size; it may not be below the
    /// list depth.
    pub fn with_k_max(mut self, k_max: usize) -> Result<Self> {
        if k_max < self.depth() || k_max == 0 {
            return Err(Error::KOutOfRange {
                k: k_max,
                max: self.depth(),
            });
        }
        self.k_max = k_max;
        Ok(self)
    }

    /// Requested neighborhood size. Lists are shorter only when the training
    /// set has fewer than `k_max + 1` points.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Length of every neighbor list.
    pub fn depth(&self) -> usize {
        self.lists.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.lists[i]
    }

    pub fn lists(&self) -> &[NeighborList] {
        &self.lists
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// 1 when point `i` and its `r`-th (1-based) neighbor share a class.
    pub fn indicator(&self, i: usize, r: usize) -> Result<u8> {
        let list = &self.lists[i];
        if r == 0 || r > list.len() {
            return Err(Error::RankOutOfRange {
                rank: r,
                available: list.len(),
            });
        }
        Ok(self.indicator_unchecked(i, r))
    }

    #[inline]
    pub(crate) fn indicator_unchecked(&self, i: usize, r: usize) -> u8 {
        u8::from(self.labels[self.lists[i][r - 1].id] == self.labels[i])
    }
}
