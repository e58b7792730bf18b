use super::graph::WeightedKnnGraph;
use crate::error::{Error, Result};

/// Generalized class-wise statistics over a [`WeightedKnnGraph`].
///
/// For class `c` at neighborhood size `k`,
/// `T_c = (sum over members x of hits_k(x)) / (n_c * k)` where `hits_k(x)`
/// counts how many of x's `k` nearest neighbors share its class. Per-point
/// prefix sums of the indicator make every `k <= depth` available in O(1)
/// per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClasswiseStats {
    k_max: usize,
    depth: usize,
    /// `prefix_hits[i * depth + (r - 1)]` = hits among ranks `1..=r` of point `i`.
    prefix_hits: Vec<u32>,
    class_sizes: Vec<usize>,
    /// `class_hits[(k - 1) * n_classes + c]` = sum of `hits_k` over class `c`.
    class_hits: Vec<u64>,
}

impl ClasswiseStats {
    pub fn from_graph(graph: &WeightedKnnGraph) -> Self {
        let depth = graph.depth();
        let mut prefix_hits = Vec::with_capacity(graph.len() * depth);
        for i in 0..graph.len() {
            let mut acc = 0u32;
            for r in 1..=depth {
                acc += u32::from(graph.indicator_unchecked(i, r));
                prefix_hits.push(acc);
            }
        }
        Self::from_prefix_hits(graph, prefix_hits).expect("prefix sums computed from the graph")
    }

    /// Rebuilds the statistics from stored prefix sums, checking each row
    /// against the graph it claims to summarize.
    pub fn from_prefix_hits(graph: &WeightedKnnGraph, prefix_hits: Vec<u32>) -> Result<Self> {
        let depth = graph.depth();
        let n_classes = graph.n_classes();
        if prefix_hits.len() != graph.len() * depth {
            return Err(Error::InvalidArgument(format!(
                "expected {} prefix sums, got {}",
                graph.len() * depth,
                prefix_hits.len()
            )));
        }
        for i in 0..graph.len() {
            let mut acc = 0u32;
            for r in 1..=depth {
                acc += u32::from(graph.indicator_unchecked(i, r));
                if prefix_hits[i * depth + r - 1] != acc {
                    return Err(Error::InvalidArgument(format!(
                        "prefix sum of point {i} at rank {r} disagrees with the graph"
                    )));
                }
            }
        }
        let mut class_sizes = vec![0usize; n_classes];
        for &l in graph.labels() {
            class_sizes[l] += 1;
        }
        let mut class_hits = vec![0u64; depth * n_classes];
        for i in 0..graph.len() {
            let c = graph.label(i);
            for k in 1..=depth {
                class_hits[(k - 1) * n_classes + c] += u64::from(prefix_hits[i * depth + k - 1]);
            }
        }
        Ok(ClasswiseStats {
            k_max: graph.k_max(),
            depth,
            prefix_hits,
            class_sizes,
            class_hits,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn prefix_hits(&self) -> &[u32] {
        &self.prefix_hits
    }

    /// Hits among the first `r` neighbors of point `i`; `r = 0` gives 0.
    #[inline]
    pub fn hits(&self, i: usize, r: usize) -> u32 {
        if r == 0 {
            0
        } else {
            self.prefix_hits[i * self.depth + r - 1]
        }
    }

    /// Neighborhood size actually used for a requested `k` in `1..=k_max`:
    /// lists shorter than `k` truncate the inner sum and its divisor.
    pub fn effective_k(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.k_max || self.depth == 0 {
            return Err(Error::KOutOfRange { k, max: self.k_max });
        }
        Ok(k.min(self.depth))
    }

    /// Sum of `hits_k` over the members of each class.
    pub fn class_hit_totals(&self, k: usize) -> &[u64] {
        let c = self.n_classes();
        &self.class_hits[(k - 1) * c..k * c]
    }

    /// `T_c` for every class at neighborhood size `k`. Classes with no
    /// members get 0.
    pub fn classwise_statistic(&self, k: usize) -> Result<Vec<f64>> {
        let k = self.effective_k(k)?;
        Ok(self
            .class_hit_totals(k)
            .iter()
            .zip(&self.class_sizes)
            .map(|(&hits, &n)| if n == 0 { 0.0 } else { hits as f64 / (n * k) as f64 })
            .collect())
    }
}
