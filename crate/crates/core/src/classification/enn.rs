//! The extended nearest neighbor decision.
//!
//! For a query `z` and each candidate class `j`, the class-wise statistics are
//! re-evaluated on the training set with `z` added under label `j`. Adding `z`
//! only changes the rows of points that would take `z` into their `k`-nearest
//! set, and for such a point the new hit count is `hits_{k-1}(x) + [y_x == j]`
//! whatever rank `z` lands at. A range query out to the largest `k`-th
//! neighbor distance in the training set finds every such point, so one pass
//! yields every assumed statistic.

use std::cmp::Ordering;

use super::graph::WeightedKnnGraph;
use super::stats::ClasswiseStats;
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::spatial_index::{KdTree, Neighbor};

/// Which baseline the assumed statistics are compared against when scores
/// are reported. The predicted label does not depend on it: the baseline is
/// the same for every candidate class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseStatistic {
    /// Baseline recomputed at the query's neighborhood size.
    #[default]
    QueryK,
    /// Baseline at the graph's full depth, as cached by training.
    TrainingK,
}

/// Full breakdown of one ENN decision.
#[derive(Debug, Clone, PartialEq)]
pub struct EnnDecision {
    pub label: usize,
    /// Neighborhood size actually used.
    pub k: usize,
    pub base: Vec<f64>,
    /// `assumed[j]` holds the statistics of every class with the query labeled
    /// `j`; `None` for classes with no training members.
    pub assumed: Vec<Option<Vec<f64>>>,
    /// `scores[j] = sum_c (assumed[j][c] - base[c])`.
    pub scores: Vec<Option<f64>>,
}

/// Training data, index, graph and statistics shared by every ENN variant.
#[derive(Debug, Clone)]
pub struct EnnCore {
    data: Dataset,
    index: KdTree,
    graph: WeightedKnnGraph,
    stats: ClasswiseStats,
    /// `reach[k - 1]`: largest squared `k`-th neighbor distance over the
    /// training set.
    reach: Vec<f64>,
}

struct Augmented {
    k: usize,
    /// Affected training points per class.
    entering: Vec<u64>,
    /// Hits lost at rank `k` by affected points, per class.
    lost: Vec<u64>,
    /// Query's neighbors per class.
    query_hits: Vec<u64>,
}

impl EnnCore {
    pub fn new(data: Dataset, index: KdTree, graph: WeightedKnnGraph) -> Result<Self> {
        if graph.len() != data.len() || index.len() != data.len() {
            return Err(Error::InvalidArgument(
                "graph, index and data disagree on the training size".into(),
            ));
        }
        let stats = ClasswiseStats::from_graph(&graph);
        let reach = reach(&graph);
        Ok(EnnCore {
            data,
            index,
            graph,
            stats,
            reach,
        })
    }

    pub(crate) fn from_parts(data: Dataset, index: KdTree, graph: WeightedKnnGraph, stats: ClasswiseStats) -> Self {
        let reach = reach(&graph);
        EnnCore {
            data,
            index,
            graph,
            stats,
            reach,
        }
    }

    /// Builds the index and a `k_max`-deep graph over `data`.
    pub fn train(data: Dataset, k_max: usize) -> Result<Self> {
        let index = KdTree::build(data.values(), data.dim())?;
        let graph = WeightedKnnGraph::build(&index, data.labels(), data.n_classes(), k_max)?;
        EnnCore::new(data, index, graph)
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn index(&self) -> &KdTree {
        &self.index
    }

    pub fn graph(&self) -> &WeightedKnnGraph {
        &self.graph
    }

    pub fn stats(&self) -> &ClasswiseStats {
        &self.stats
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub(crate) fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(())
    }

    /// ENN label for `z` at neighborhood size `k`.
    pub fn enn_predict(&self, z: &[f64], k: usize) -> Result<usize> {
        self.check_dim(z)?;
        let k = self.stats.effective_k(k)?;
        let near = self.index.knn(z, k, None)?;
        Ok(self.decide(&self.augment(z, &near, k)))
    }

    /// Like [`enn_predict`](Self::enn_predict) with the statistics behind the decision.
    pub fn enn_explain(&self, z: &[f64], k: usize, base: BaseStatistic) -> Result<EnnDecision> {
        self.check_dim(z)?;
        let k = self.stats.effective_k(k)?;
        let near = self.index.knn(z, k, None)?;
        Ok(self.explain(&self.augment(z, &near, k), base))
    }

    /// Decision with the query's nearest training neighbors already known;
    /// `near` must hold at least `k` entries sorted nearest first.
    pub(crate) fn enn_predict_with(&self, z: &[f64], near: &[Neighbor], k: usize) -> Result<usize> {
        let k = self.stats.effective_k(k)?;
        Ok(self.decide(&self.augment(z, &near[..k], k)))
    }

    pub(crate) fn enn_explain_with(
        &self,
        z: &[f64],
        near: &[Neighbor],
        k: usize,
        base: BaseStatistic,
    ) -> Result<EnnDecision> {
        let k = self.stats.effective_k(k)?;
        Ok(self.explain(&self.augment(z, &near[..k], k), base))
    }

    fn augment(&self, z: &[f64], near: &[Neighbor], k: usize) -> Augmented {
        let n_classes = self.data.n_classes();
        let mut entering = vec![0u64; n_classes];
        let mut lost = vec![0u64; n_classes];
        self.index
            .for_each_within(z, self.reach[k - 1], |x, d2| {
                // The query is the newest point, so it loses distance ties.
                if d2 < self.graph.neighbors(x)[k - 1].dist2 {
                    let c = self.graph.label(x);
                    entering[c] += 1;
                    lost[c] += u64::from(self.graph.indicator_unchecked(x, k));
                }
            })
            .expect("query dimension checked by the caller");
        let mut query_hits = vec![0u64; n_classes];
        for n in near {
            query_hits[self.graph.label(n.id)] += 1;
        }
        Augmented {
            k,
            entering,
            lost,
            query_hits,
        }
    }

    /// Argmax over candidate classes, exact in integer arithmetic.
    ///
    /// With `B_c` the class's hits after displacement and `E_j` the hits the
    /// assumption adds to class `j`, the score differs between candidates only
    /// through `(n_j E_j - B_j) / (n_j (n_j + 1))`.
    fn decide(&self, aug: &Augmented) -> usize {
        let sizes = self.stats.class_sizes();
        let base = self.stats.class_hit_totals(aug.k);
        let mut best: Option<(usize, i128, i128)> = None;
        for j in 0..sizes.len() {
            let n = sizes[j] as i128;
            if n == 0 {
                continue;
            }
            let b = (base[j] - aug.lost[j]) as i128;
            let e = (aug.entering[j] + aug.query_hits[j]) as i128;
            let num = n * e - b;
            let den = n * (n + 1);
            let better = match best {
                None => true,
                Some((_, bn, bd)) => (num * bd).cmp(&(bn * den)) == Ordering::Greater,
            };
            if better {
                best = Some((j, num, den));
            }
        }
        best.map_or(0, |(j, _, _)| j)
    }

    fn explain(&self, aug: &Augmented, base_rule: BaseStatistic) -> EnnDecision {
        let k = aug.k;
        let sizes = self.stats.class_sizes();
        let totals = self.stats.class_hit_totals(k);
        let base = match base_rule {
            BaseStatistic::QueryK => self.stats.classwise_statistic(k),
            BaseStatistic::TrainingK => self.stats.classwise_statistic(self.stats.depth()),
        }
        .expect("k validated by the caller");
        let mut assumed = Vec::with_capacity(sizes.len());
        let mut scores = Vec::with_capacity(sizes.len());
        for j in 0..sizes.len() {
            if sizes[j] == 0 {
                assumed.push(None);
                scores.push(None);
                continue;
            }
            let t: Vec<f64> = (0..sizes.len())
                .map(|c| {
                    let own = usize::from(c == j);
                    let n = sizes[c] + own;
                    if n == 0 {
                        return 0.0;
                    }
                    let mut hits = totals[c] - aug.lost[c];
                    if own == 1 {
                        hits += aug.entering[c] + aug.query_hits[c];
                    }
                    hits as f64 / (n * k) as f64
                })
                .collect();
            scores.push(Some(t.iter().zip(&base).map(|(a, b)| a - b).sum()));
            assumed.push(Some(t));
        }
        EnnDecision {
            label: self.decide(aug),
            k,
            base,
            assumed,
            scores,
        }
    }
}

fn reach(graph: &WeightedKnnGraph) -> Vec<f64> {
    let mut reach = vec![0.0f64; graph.depth()];
    for list in graph.lists() {
        for (r, n) in list.iter().enumerate() {
            reach[r] = reach[r].max(n.dist2);
        }
    }
    reach
}
