//! Labeled datasets: CSV loading, min-max scaling and stratified folds.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A dense feature matrix with one class label per row.
///
/// Points are stored row-major. Label ids are dense in `0..n_classes()` and
/// map back to the original label strings through `class_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dim: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        values: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("dimension must be at least 1".into()));
        }
        if values.len() != dim * labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} values do not form {} rows of dimension {}",
                values.len(),
                labels.len(),
                dim
            )));
        }
        if class_names.is_empty() {
            return Err(Error::InvalidDataset("no classes".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label id {bad} outside 0..{}",
                class_names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Dataset {
            name: name.into(),
            dim,
            values,
            labels,
            class_names,
        })
    }

    /// Builds a dataset from per-row vectors and label strings; ids follow
    /// first appearance.
    pub fn from_rows<S: AsRef<str>>(name: impl Into<String>, rows: &[Vec<f64>], labels: &[S]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let mut interner = LabelInterner::default();
        let ids = labels.iter().map(|l| interner.intern(l.as_ref())).collect();
        Dataset::new(name, dim, values, ids, interner.names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Row-major feature storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, id: usize) -> &str {
        &self.class_names[id]
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_classes()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Rows at `indices`, in that order. Class ids and names are kept, so a
    /// subset may contain classes with no members.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.point(i));
        }
        Dataset {
            name: self.name.clone(),
            dim: self.dim,
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Writes the dataset as headerless CSV with the label string last.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path)?;
        let mut record = Vec::with_capacity(self.dim + 1);
        for (i, point) in self.points().enumerate() {
            record.clear();
            record.extend(point.iter().map(|v| v.to_string()));
            record.push(self.class_names[self.labels[i]].clone());
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

#[derive(Default)]
struct LabelInterner {
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl LabelInterner {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.names.len();
        self.ids.insert(label.to_owned(), id);
        self.names.push(label.to_owned());
        id
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    /// 0-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_owned())
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

/// Loads a comma-separated file. Every column except the label column is a
/// real-valued feature. Error positions are 1-based file lines and columns.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_table(path, Some(label_column), has_header)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(name, table.dim, table.values, table.labels, table.class_names)
}

/// Loads an unlabeled comma-separated file: every column is a feature.
/// Returns the dimension and the row-major values.
pub fn load_features(path: impl AsRef<Path>, has_header: bool) -> Result<(usize, Vec<f64>)> {
    let table = read_table(path.as_ref(), None, has_header)?;
    Ok((table.dim, table.values))
}

struct Table {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

fn read_table(path: &Path, label_column: Option<&LabelColumn>, has_header: bool) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Last) => None,
        Some(LabelColumn::Name(name)) => {
            if !has_header {
                return Err(Error::LabelColumn(format!("{name:?} (file has no header)")));
            }
            let headers = reader.headers()?;
            Some(
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::LabelColumn(format!("{name:?}")))?,
            )
        }
    };

    let mut n_cols = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut interner = LabelInterner::default();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let row = record.position().map_or(0, |p| p.line() as usize);
        // Blank lines (common at the end of UCI files) are skipped by the
        // reader; a record of one empty field is the same thing.
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *n_cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.into(),
                row,
                expected,
                found: record.len(),
            });
        }
        let min_cols = if label_column.is_some() { 2 } else { 1 };
        if expected < min_cols {
            return Err(Error::InvalidDataset(format!(
                "{}: need a label column and at least one feature column",
                path.display()
            )));
        }
        let label_at = match label_column {
            Some(_) => *label_idx.get_or_insert(expected - 1),
            None => usize::MAX,
        };
        if label_column.is_some() && label_at >= expected {
            return Err(Error::LabelColumn(format!(
                "index {label_at} (file has {expected} columns)"
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            if cell.is_empty() || cell == "?" {
                return Err(Error::MissingValue {
                    path: path.into(),
                    row,
                    column: col + 1,
                });
            }
            if col == label_at {
                labels.push(interner.intern(cell));
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                path: path.into(),
                row,
                column: col + 1,
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    path: path.into(),
                    row,
                    column: col + 1,
                    value: cell.to_owned(),
                });
            }
            values.push(v);
        }
    }

    let Some(n_cols) = n_cols else {
        return Err(Error::EmptyFile { path: path.into() });
    };
    Ok(Table {
        dim: if label_column.is_some() { n_cols - 1 } else { n_cols },
        values,
        labels,
        class_names: interner.names,
    })
}

/// Per-column min-max scaling to `[0, 1]`. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    ranges: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let mut mins = vec![f64::INFINITY; ds.dim()];
        let mut maxs = vec![f64::NEG_INFINITY; ds.dim()];
        for p in ds.points() {
            for (j, &v) in p.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        let ranges = mins.iter().zip(&maxs).map(|(lo, hi)| hi - lo).collect();
        MinMaxScaler { mins, ranges }
    }

    pub fn from_parts(mins: Vec<f64>, ranges: Vec<f64>) -> Self {
        MinMaxScaler { mins, ranges }
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn transform_point(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.mins.iter().zip(&self.ranges))
            .map(|(&v, (&lo, &range))| if range > 0.0 { (v - lo) / range } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Dataset {
        let mut values = Vec::with_capacity(ds.values.len());
        for p in ds.points() {
            values.extend(self.transform_point(p));
        }
        Dataset { values, ..ds.clone() }
    }
}

pub fn minmax_normalize(ds: &Dataset) -> Dataset {
    MinMaxScaler::fit(ds).transform(ds)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Cross-validation plan: `assignment[i]` is the fold whose test set holds row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub seed: u64,
    pub n_folds: usize,
    pub assignment: Vec<usize>,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    /// Writes one `row_index,fold_id` line per row.
    pub fn write_assignment(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (row, fold) in self.assignment.iter().enumerate() {
            writeln!(out, "{row},{fold}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Seeded stratified k-fold split.
///
/// Each class's rows are shuffled and dealt round-robin over the folds; the
/// dealing position carries over from one class to the next so overall fold
/// sizes stay within one of each other.
pub fn stratified_kfold(ds: &Dataset, n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {n_folds}")));
    }
    if n_folds > ds.len() {
        return Err(Error::TooManyFolds {
            requested: n_folds,
            size: ds.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class = vec![Vec::new(); ds.n_classes()];
    for (i, &l) in ds.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut assignment = vec![0; ds.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    let folds = (0..n_folds)
        .map(|f| {
            let (test, train) = (0..ds.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect();
    Ok(FoldPlan {
        seed,
        n_folds,
        assignment,
        folds,
    })
}
