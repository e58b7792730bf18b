use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method, Protocol};
use super::report::EvalReport;
use crate::classification::{train_enan, train_enn_fixed, KnnModel};
use crate::data_io::{load_csv, stratified_kfold, Dataset, FoldPlan, MinMaxScaler};
use crate::error::{Error, Result};

/// Predictions of one method on one test fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    /// Row indices into the evaluated dataset.
    pub test_rows: Vec<usize>,
    pub predicted: Vec<usize>,
    /// Percent correct.
    pub accuracy: f64,
}

/// One (dataset, method) cell of the report.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub method: Method,
    pub folds: Vec<FoldOutcome>,
    /// Set when any fold failed; the cell then carries no accuracies.
    pub error: Option<String>,
    pub runtime: Duration,
}

impl CellResult {
    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn mean(&self) -> Option<f64> {
        self.is_valid().then(|| mean(&self.accuracies()))
    }

    /// Sample standard deviation over folds.
    pub fn std(&self) -> Option<f64> {
        self.is_valid().then(|| sample_std(&self.accuracies()))
    }
}

#[derive(Debug, Clone)]
pub struct DatasetResult {
    pub dataset: Dataset,
    pub plan: FoldPlan,
    pub cells: Vec<CellResult>,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Trains `method` on `train` and labels the row-major `queries`.
pub fn fit_predict(method: Method, train: Dataset, queries: &[f64]) -> Result<Vec<usize>> {
    let m = train.len();
    match method {
        Method::Knn(k) => KnnModel::train(train, k.resolve(m))?.predict(queries),
        Method::Enn(k) => train_enn_fixed(train, k.resolve(m))?.predict(queries),
        Method::Enan => train_enan(train)?.predict(queries),
    }
}

/// Runs `method` over every fold of `plan`. Scaling, when enabled, is fitted
/// on each training split and applied to its test split.
pub fn evaluate_cell(ds: &Dataset, plan: &FoldPlan, method: Method, normalize: bool) -> CellResult {
    let start = Instant::now();
    let outcomes: Result<Vec<FoldOutcome>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let mut train = ds.subset(&fold.train);
            let mut test = ds.subset(&fold.test);
            if normalize {
                let scaler = MinMaxScaler::fit(&train);
                train = scaler.transform(&train);
                test = scaler.transform(&test);
            }
            let predicted = fit_predict(method, train, test.values())?;
            let correct = predicted.iter().zip(test.labels()).filter(|(p, t)| p == t).count();
            Ok(FoldOutcome {
                fold: f,
                test_rows: fold.test.clone(),
                accuracy: 100.0 * correct as f64 / fold.test.len().max(1) as f64,
                predicted,
            })
        })
        .collect();
    let runtime = start.elapsed();
    match outcomes {
        Ok(folds) => CellResult {
            method,
            folds,
            error: None,
            runtime,
        },
        Err(e) => CellResult {
            method,
            folds: Vec::new(),
            error: Some(e.to_string()),
            runtime,
        },
    }
}

/// Cross-validates every method of `protocol` on each dataset.
pub fn benchmark_datasets(datasets: Vec<Dataset>, protocol: &Protocol) -> Result<EvalReport> {
    let mut results = Vec::with_capacity(datasets.len());
    for ds in datasets {
        let plan = stratified_kfold(&ds, protocol.n_folds, protocol.seed)
            .map_err(|e| Error::InvalidDataset(format!("{}: {e}", ds.name())))?;
        let cells = protocol
            .methods
            .par_iter()
            .map(|&method| evaluate_cell(&ds, &plan, method, protocol.normalize))
            .collect();
        results.push(DatasetResult {
            dataset: ds,
            plan,
            cells,
        });
    }
    Ok(EvalReport {
        protocol: protocol.clone(),
        datasets: results,
    })
}

/// Loads every dataset named in `config`, then benchmarks them.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let datasets = config
        .datasets
        .iter()
        .map(|src| {
            let mut ds = load_csv(&src.path, &src.label_column, src.has_header)
                .map_err(|e| Error::InvalidDataset(format!("dataset {}: {e}", src.name)))?;
            ds.set_name(src.name.clone());
            Ok(ds)
        })
        .collect::<Result<Vec<_>>>()?;
    benchmark_datasets(datasets, &config.protocol)
}
