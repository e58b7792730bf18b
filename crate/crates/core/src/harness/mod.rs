//! Cross-validation benchmarks, accuracy-vs-k sweeps, report writing and
//! graph export.

mod bench;
mod config;
mod export;
mod report;
mod sweep;

pub use bench::{
    benchmark_datasets, evaluate_cell, fit_predict, mean, run_benchmark, sample_std, CellResult, DatasetResult,
    FoldOutcome,
};
pub use config::{DatasetSource, ExperimentConfig, Method, Protocol};
pub use export::{export_nan_artifacts, COUNTS_FILE, EDGES_FILE, META_FILE};
pub use report::{format_cell, EvalReport};
pub use sweep::{sweep_k, SweepMethod, SweepResult, SweepRow};
