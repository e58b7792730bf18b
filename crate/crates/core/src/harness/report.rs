use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::bench::{mean, DatasetResult};
use super::config::{Method, Protocol};
use crate::error::{Error, Result};

/// Accuracy table over datasets (rows) and methods (columns).
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub datasets: Vec<DatasetResult>,
}

/// `MM.MM±SS.SS%`.
pub fn format_cell(mean: f64, std: f64) -> String {
    format!("{mean:.2}±{std:.2}%")
}

impl EvalReport {
    pub fn methods(&self) -> &[Method] {
        &self.protocol.methods
    }

    /// `(mean, std)` of a cell, `None` when the cell failed or is missing.
    pub fn cell(&self, dataset: &str, method: Method) -> Option<(f64, f64)> {
        let d = self.datasets.iter().find(|d| d.dataset.name() == dataset)?;
        let c = d.cells.iter().find(|c| c.method == method)?;
        Some((c.mean()?, c.std()?))
    }

    /// Unweighted mean over datasets of each column's means and stds; `None`
    /// for a column with any failed cell.
    pub fn overall(&self) -> Vec<Option<(f64, f64)>> {
        (0..self.methods().len())
            .map(|j| {
                let cells: Option<Vec<(f64, f64)>> = self
                    .datasets
                    .iter()
                    .map(|d| Some((d.cells[j].mean()?, d.cells[j].std()?)))
                    .collect();
                let cells = cells?;
                if cells.is_empty() {
                    return None;
                }
                let means: Vec<f64> = cells.iter().map(|c| c.0).collect();
                let stds: Vec<f64> = cells.iter().map(|c| c.1).collect();
                Some((mean(&means), mean(&stds)))
            })
            .collect()
    }

    fn protocol_line(&self) -> String {
        format!(
            "# {}-fold stratified cross-validation, seed {}, preprocessing {}; cells are mean±std of per-fold test accuracy (sample std over folds)",
            self.protocol.n_folds,
            self.protocol.seed,
            if self.protocol.normalize { "min-max" } else { "none" }
        )
    }

    /// Aligned table body; deterministic for a given protocol and data.
    pub fn render_text_body(&self) -> String {
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Data sets".to_owned()];
        header.extend(self.methods().iter().map(Method::heading));
        rows.push(header);
        for d in &self.datasets {
            let mut row = vec![d.dataset.name().to_owned()];
            for c in &d.cells {
                row.push(match (c.mean(), c.std()) {
                    (Some(m), Some(s)) => format_cell(m, s),
                    _ => "invalid".to_owned(),
                });
            }
            rows.push(row);
        }
        let mut overall = vec!["OVERALL".to_owned()];
        overall.extend(self.overall().into_iter().map(|c| match c {
            Some((m, s)) => format_cell(m, s),
            None => "n/a".to_owned(),
        }));
        rows.push(overall);

        let n_cols = rows[0].len();
        let widths: Vec<usize> = (0..n_cols)
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        out.push_str(&self.protocol_line());
        out.push('\n');
        for row in &rows {
            let mut line = String::new();
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    line.push_str("  ");
                }
                let pad = widths[j] - cell.chars().count();
                if j == 0 {
                    line.push_str(cell);
                    line.push_str(&" ".repeat(pad));
                } else {
                    line.push_str(&" ".repeat(pad));
                    line.push_str(cell);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let failures: Vec<String> = self
            .datasets
            .iter()
            .flat_map(|d| {
                d.cells.iter().filter_map(move |c| {
                    c.error
                        .as_ref()
                        .map(|e| format!("# invalid cell {} / {}: {e}", d.dataset.name(), c.method))
                })
            })
            .collect();
        for f in failures {
            out.push_str(&f);
            out.push('\n');
        }
        out
    }

    /// Full `report.txt`: one timestamp line, then the deterministic body.
    pub fn render_text(&self) -> String {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("# generated at unix time {secs}\n{}", self.render_text_body())
    }

    /// Machine-readable table: one row per cell plus `OVERALL` rows.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("dataset,size,dim,method,mean,std,fold_accuracies\n");
        for d in &self.datasets {
            for c in &d.cells {
                let (m, s) = match (c.mean(), c.std()) {
                    (Some(m), Some(s)) => (format!("{m:.4}"), format!("{s:.4}")),
                    _ => (String::new(), String::new()),
                };
                let folds: Vec<String> = c.accuracies().iter().map(|a| format!("{a:.4}")).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    d.dataset.name(),
                    d.dataset.len(),
                    d.dataset.dim(),
                    c.method,
                    m,
                    s,
                    folds.join(";")
                );
            }
        }
        for (method, o) in self.methods().iter().zip(self.overall()) {
            let (m, s) = o.map_or((String::new(), String::new()), |(m, s)| {
                (format!("{m:.4}"), format!("{s:.4}"))
            });
            let _ = writeln!(out, "OVERALL,,,{method},{m},{s},");
        }
        out
    }

    pub fn render_timing_csv(&self) -> String {
        let mut out = String::from("dataset,method,seconds\n");
        for d in &self.datasets {
            for c in &d.cells {
                let _ = writeln!(out, "{},{},{:.6}", d.dataset.name(), c.method, c.runtime.as_secs_f64());
            }
        }
        out
    }

    /// Writes `report.txt`, `report.csv`, `timing.csv`, per-dataset fold
    /// assignments and one prediction dump per (dataset, method, fold).
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: String, contents: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        put("report.txt".into(), self.render_text())?;
        put("report.csv".into(), self.render_csv())?;
        put("timing.csv".into(), self.render_timing_csv())?;
        for d in &self.datasets {
            let ds = &d.dataset;
            let mut folds = String::from("row_index,fold_id\n");
            for (row, f) in d.plan.assignment.iter().enumerate() {
                let _ = writeln!(folds, "{row},{f}");
            }
            put(format!("folds_{}.csv", ds.name()), folds)?;
            for c in &d.cells {
                for f in &c.folds {
                    let mut dump = String::from("row_index,true_label,predicted_label\n");
                    for (&row, &p) in f.test_rows.iter().zip(&f.predicted) {
                        let _ = writeln!(dump, "{row},{},{}", ds.class_name(ds.label(row)), ds.class_name(p));
                    }
                    put(
                        format!("predictions_{}_{}_{}.csv", ds.name(), c.method.slug(), f.fold),
                        dump,
                    )?;
                }
            }
        }
        Ok(written)
    }
}
