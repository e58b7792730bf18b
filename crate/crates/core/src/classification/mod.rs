//! Extended nearest neighbor classification: the class-wise statistics, the
//! ENN decision rule, and the KNN, fixed-k ENN and ENaN classifiers.

mod enn;
mod graph;
mod knn;
mod models;
mod persist;
mod stats;

pub use enn::{BaseStatistic, EnnCore, EnnDecision};
pub use graph::WeightedKnnGraph;
pub use knn::{knn_classify, majority_label, KnnModel};
pub use models::{
    train_enan, train_enan_with, train_enn_fixed, EnanModel, EnanOptions, EnnModel, KChoice, ZeroFallback,
};
pub use persist::{SavedModel, TrainedModel, FORMAT_MAGIC, FORMAT_VERSION};
pub use stats::ClasswiseStats;
