use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::enn::{BaseStatistic, EnnCore, EnnDecision};
use super::graph::WeightedKnnGraph;
use super::stats::ClasswiseStats;
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::natural_neighbor::{compute_nane, NanSearchOptions, NaturalNeighborModel, NeighborCountRule};
use crate::spatial_index::KdTree;

/// A neighborhood size given either directly or as `floor(sqrt(m))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KChoice {
    Fixed(usize),
    SqrtN,
}

impl KChoice {
    /// Concrete `k` for a training set of `m` points (never below 1).
    pub fn resolve(self, m: usize) -> usize {
        match self {
            KChoice::Fixed(k) => k,
            KChoice::SqrtN => isqrt(m).max(1),
        }
    }
}

fn isqrt(m: usize) -> usize {
    let mut r = (m as f64).sqrt() as usize;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

impl FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(KChoice::SqrtN);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KChoice::Fixed(k)),
            _ => Err(Error::InvalidArgument(format!("bad neighborhood size {s:?}"))),
        }
    }
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Fixed(k) => write!(f, "{k}"),
            KChoice::SqrtN => f.write_str("sqrt"),
        }
    }
}

/// What a query with no natural neighbors uses as its neighborhood size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroFallback {
    #[default]
    Lambda,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnanOptions {
    pub nan: NanSearchOptions,
    pub count_rule: NeighborCountRule,
    pub zero_fallback: ZeroFallback,
    pub base: BaseStatistic,
}

/// ENN with one neighborhood size for training and every query.
#[derive(Debug, Clone)]
pub struct EnnModel {
    core: EnnCore,
    k: usize,
}

/// Trains ENN at a fixed `k`, which must be below the training size.
pub fn train_enn_fixed(ds: Dataset, k: usize) -> Result<EnnModel> {
    if k == 0 || k >= ds.len() {
        return Err(Error::KOutOfRange {
            k,
            max: ds.len().saturating_sub(1),
        });
    }
    Ok(EnnModel {
        core: EnnCore::train(ds, k)?,
        k,
    })
}

impl EnnModel {
    pub(crate) fn from_core(core: EnnCore, k: usize) -> Self {
        EnnModel { core, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn core(&self) -> &EnnCore {
        &self.core
    }

    pub fn graph(&self) -> &WeightedKnnGraph {
        self.core.graph()
    }

    pub fn stats(&self) -> &ClasswiseStats {
        self.core.stats()
    }

    pub fn predict_one(&self, z: &[f64]) -> Result<usize> {
        self.core.enn_predict(z, self.k)
    }

    /// Labels for row-major `queries`.
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<usize>> {
        par_rows(queries, self.core.dim(), |z| self.predict_one(z))
    }
}

/// Trained ENaN classifier: the graph depth and training statistics use the
/// natural-neighbor eigenvalue, each query uses its own natural-neighbor count.
#[derive(Debug, Clone)]
pub struct EnanModel {
    core: EnnCore,
    nan: NaturalNeighborModel,
    options: EnanOptions,
}

pub fn train_enan(ds: Dataset) -> Result<EnanModel> {
    train_enan_with(ds, EnanOptions::default())
}

pub fn train_enan_with(ds: Dataset, options: EnanOptions) -> Result<EnanModel> {
    let index = KdTree::build(ds.values(), ds.dim())?;
    let nan = compute_nane(&index, &options.nan)?;
    // The natural-neighbor search already holds every point's lambda-NN list
    // from the same tree, which is exactly the weighted graph at k = lambda.
    let graph = WeightedKnnGraph::from_lists(nan.knn_lists().to_vec(), ds.labels().to_vec(), ds.n_classes())?
        .with_k_max(nan.lambda())?;
    let core = EnnCore::new(ds, index, graph)?;
    Ok(EnanModel { core, nan, options })
}

impl EnanModel {
    pub(crate) fn from_parts(core: EnnCore, nan: NaturalNeighborModel, options: EnanOptions) -> Self {
        EnanModel { core, nan, options }
    }

    pub fn lambda(&self) -> usize {
        self.nan.lambda()
    }

    pub fn options(&self) -> &EnanOptions {
        &self.options
    }

    pub fn set_options(&mut self, options: EnanOptions) {
        self.options.count_rule = options.count_rule;
        self.options.zero_fallback = options.zero_fallback;
        self.options.base = options.base;
    }

    pub fn core(&self) -> &EnnCore {
        &self.core
    }

    pub fn nan_model(&self) -> &NaturalNeighborModel {
        &self.nan
    }

    pub fn graph(&self) -> &WeightedKnnGraph {
        self.core.graph()
    }

    pub fn stats(&self) -> &ClasswiseStats {
        self.core.stats()
    }

    pub fn data(&self) -> &Dataset {
        self.core.data()
    }

    /// Training-time statistics at `k = lambda`.
    pub fn training_statistic(&self) -> Vec<f64> {
        self.stats()
            .classwise_statistic(self.lambda())
            .expect("lambda is the graph depth")
    }

    /// `(natural-neighbor count, neighborhood size used)` for a query.
    pub fn query_k(&self, z: &[f64]) -> Result<(usize, usize)> {
        self.core.check_dim(z)?;
        let count = self
            .nan
            .num_natural_neighbors(self.core.index(), z, self.options.count_rule)?;
        Ok((count, self.fallback(count)))
    }

    /// Neighborhood size for a query with `count` natural neighbors. A
    /// reverse count can exceed `lambda`; it is clamped so `k <= lambda`.
    fn fallback(&self, count: usize) -> usize {
        match (count, self.options.zero_fallback) {
            (0, ZeroFallback::Lambda) => self.lambda(),
            (0, ZeroFallback::One) => 1,
            (c, _) => c.min(self.lambda()),
        }
    }

    pub fn predict_one(&self, z: &[f64]) -> Result<usize> {
        self.core.check_dim(z)?;
        let (count, near) = self
            .nan
            .query_neighborhood(self.core.index(), z, self.options.count_rule)?;
        self.core.enn_predict_with(z, &near, self.fallback(count))
    }

    pub fn explain(&self, z: &[f64]) -> Result<EnnDecision> {
        self.core.check_dim(z)?;
        let (count, near) = self
            .nan
            .query_neighborhood(self.core.index(), z, self.options.count_rule)?;
        self.core
            .enn_explain_with(z, &near, self.fallback(count), self.options.base)
    }

    /// Labels for row-major `queries`.
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<usize>> {
        par_rows(queries, self.core.dim(), |z| self.predict_one(z))
    }
}

fn par_rows<F>(queries: &[f64], dim: usize, f: F) -> Result<Vec<usize>>
where
    F: Fn(&[f64]) -> Result<usize> + Sync + Send,
{
    if !queries.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: queries.len() % dim,
        });
    }
    queries.par_chunks_exact(dim).map(f).collect()
}
