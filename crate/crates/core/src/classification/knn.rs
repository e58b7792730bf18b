use rayon::prelude::*;

use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::spatial_index::KdTree;

/// Majority vote over the labels of `neighbors`; ties go to the lowest class id.
pub fn majority_label(labels: impl IntoIterator<Item = usize>, n_classes: usize) -> usize {
    let mut votes = vec![0usize; n_classes];
    for l in labels {
        votes[l] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

/// Majority label among the `k` training points nearest to `z`.
pub fn knn_classify(index: &KdTree, labels: &[usize], n_classes: usize, z: &[f64], k: usize) -> Result<usize> {
    if k == 0 || k > index.len() {
        return Err(Error::KOutOfRange { k, max: index.len() });
    }
    let near = index.knn(z, k, None)?;
    Ok(majority_label(near.iter().map(|n| labels[n.id]), n_classes))
}

/// Plain k-nearest-neighbor classifier.
#[derive(Debug, Clone)]
pub struct KnnModel {
    data: Dataset,
    index: KdTree,
    k: usize,
}

impl KnnModel {
    pub fn train(data: Dataset, k: usize) -> Result<Self> {
        if k == 0 || k > data.len() {
            return Err(Error::KOutOfRange { k, max: data.len() });
        }
        let index = KdTree::build(data.values(), data.dim())?;
        Ok(KnnModel { data, index, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn predict_one(&self, z: &[f64]) -> Result<usize> {
        knn_classify(&self.index, self.data.labels(), self.data.n_classes(), z, self.k)
    }

    /// Labels for row-major `queries`.
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<usize>> {
        let dim = self.data.dim();
        if !queries.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: queries.len() % dim,
            });
        }
        queries.par_chunks_exact(dim).map(|z| self.predict_one(z)).collect()
    }
}
