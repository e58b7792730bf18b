use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classification::EnanModel;
use crate::error::{Error, Result};

pub const EDGES_FILE: &str = "nan_edges.txt";
pub const COUNTS_FILE: &str = "nan_counts.txt";
pub const META_FILE: &str = "nan_meta.txt";

/// Writes the natural-neighbor graph of a trained model:
/// `nan_edges.txt` (`i j dist`, one line per undirected edge),
/// `nan_counts.txt` (`i count`) and `nan_meta.txt` (`lambda L`).
pub fn export_nan_artifacts(model: &EnanModel, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let nan = model.nan_model();

    let mut edges = String::new();
    for (i, j, d) in nan.edges() {
        let _ = writeln!(edges, "{i} {j} {d}");
    }
    let mut counts = String::new();
    for (i, c) in nan.nan_counts().iter().enumerate() {
        let _ = writeln!(counts, "{i} {c}");
    }
    let meta = format!("lambda {}\n", nan.lambda());

    let mut written = Vec::new();
    for (name, body) in [(EDGES_FILE, edges), (COUNTS_FILE, counts), (META_FILE, meta)] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
