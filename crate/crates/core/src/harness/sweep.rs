use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::bench::evaluate_cell;
use super::config::Method;
use crate::classification::KChoice;
use crate::data_io::{stratified_kfold, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    Knn,
    Enn,
}

impl SweepMethod {
    fn at(self, k: usize) -> Method {
        match self {
            SweepMethod::Knn => Method::Knn(KChoice::Fixed(k)),
            SweepMethod::Enn => Method::Enn(KChoice::Fixed(k)),
        }
    }
}

impl std::str::FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(SweepMethod::Knn),
            "enn" => Ok(SweepMethod::Enn),
            other => Err(Error::InvalidArgument(format!(
                "sweep method must be knn or enn, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub dataset: String,
    pub method: SweepMethod,
    pub n_folds: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

/// Cross-validated accuracy of a fixed-k method for each `k` in `k_range`.
pub fn sweep_k(
    ds: &Dataset,
    method: SweepMethod,
    k_range: &[usize],
    n_folds: usize,
    seed: u64,
    normalize: bool,
) -> Result<SweepResult> {
    if k_range.is_empty() {
        return Err(Error::InvalidArgument("empty k range".into()));
    }
    let plan = stratified_kfold(ds, n_folds, seed)?;
    let smallest_train = plan.folds.iter().map(|f| f.train.len()).min().unwrap_or(0);
    let max_k = *k_range.iter().max().expect("nonempty");
    if k_range.contains(&0) || max_k >= smallest_train {
        return Err(Error::KOutOfRange {
            k: if k_range.contains(&0) { 0 } else { max_k },
            max: smallest_train.saturating_sub(1),
        });
    }
    let rows = k_range
        .par_iter()
        .map(|&k| {
            let cell = evaluate_cell(ds, &plan, method.at(k), normalize);
            match (cell.mean(), cell.std(), cell.error) {
                (Some(mean), Some(std), _) => Ok(SweepRow { k, mean, std }),
                (_, _, e) => Err(Error::InvalidArgument(format!("k = {k}: {}", e.unwrap_or_default()))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        dataset: ds.name().to_owned(),
        method,
        n_folds,
        seed,
        rows,
    })
}

impl SweepResult {
    /// Plot-ready CSV (`k,mean,std`) preceded by a comment naming the protocol.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# {} accuracy vs k on {}: {}-fold stratified cross-validation, seed {}\nk,mean,std\n",
            match self.method {
                SweepMethod::Knn => "KNN",
                SweepMethod::Enn => "ENN",
            },
            self.dataset,
            self.n_folds,
            self.seed
        );
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.4},{:.4}", r.k, r.mean, r.std);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
