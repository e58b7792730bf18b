use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::classification::KChoice;
use crate::data_io::LabelColumn;
use crate::error::{Error, Result};

/// A classifier under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Knn(KChoice),
    Enn(KChoice),
    Enan,
}

impl Method {
    /// The ENN columns followed by ENaN: k in {1, 3, 5, sqrt(n)}.
    pub fn default_grid() -> Vec<Method> {
        vec![
            Method::Enn(KChoice::Fixed(1)),
            Method::Enn(KChoice::Fixed(3)),
            Method::Enn(KChoice::Fixed(5)),
            Method::Enn(KChoice::SqrtN),
            Method::Enan,
        ]
    }

    /// Column heading in reports.
    pub fn heading(&self) -> String {
        match self {
            Method::Knn(k) => format!("KNN k={k}"),
            Method::Enn(k) => format!("ENN k={k}"),
            Method::Enan => "ENaN".to_owned(),
        }
    }

    /// File-name-safe identifier.
    pub fn slug(&self) -> String {
        match self {
            Method::Knn(k) => format!("knn-k{k}"),
            Method::Enn(k) => format!("enn-k{k}"),
            Method::Enan => "enan".to_owned(),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("enan") {
            return Ok(Method::Enan);
        }
        let (kind, k) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad method {s:?}; expected knn:<k>, enn:<k> or enan")))?;
        let k: KChoice = k.parse()?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(Method::Knn(k)),
            "enn" => Ok(Method::Enn(k)),
            _ => Err(Error::Config(format!("unknown method {kind:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Knn(k) => write!(f, "knn:{k}"),
            Method::Enn(k) => write!(f, "enn:{k}"),
            Method::Enan => f.write_str("enan"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSource {
    pub name: String,
    pub path: PathBuf,
    pub label_column: LabelColumn,
    pub has_header: bool,
}

/// Evaluation protocol shared by every dataset of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub methods: Vec<Method>,
    pub n_folds: usize,
    pub seed: u64,
    pub normalize: bool,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            methods: Method::default_grid(),
            n_folds: 10,
            seed: 0,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub protocol: Protocol,
    pub output_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    methods: Option<Vec<String>>,
    #[serde(default)]
    folds: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    normalize: Option<bool>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default, rename = "dataset")]
    datasets: Vec<RawDataset>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: Option<String>,
    path: PathBuf,
    #[serde(default)]
    label_column: Option<toml::Value>,
    #[serde(default)]
    has_header: bool,
}

impl ExperimentConfig {
    /// Reads a TOML config. Relative dataset and output paths resolve
    /// against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let defaults = Protocol::default();
        let methods = match raw.methods {
            Some(list) => list.iter().map(|m| m.parse()).collect::<Result<Vec<_>>>()?,
            None => defaults.methods,
        };
        let protocol = Protocol {
            methods,
            n_folds: raw.folds.unwrap_or(defaults.n_folds),
            seed: raw.seed.unwrap_or(defaults.seed),
            normalize: raw.normalize.unwrap_or(defaults.normalize),
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let datasets = raw
            .datasets
            .into_iter()
            .map(|d| {
                let label_column = match d.label_column {
                    None => LabelColumn::Last,
                    Some(toml::Value::Integer(i)) if i >= 0 => LabelColumn::Index(i as usize),
                    Some(toml::Value::String(s)) => s.parse().expect("infallible"),
                    Some(other) => return Err(Error::Config(format!("bad label_column {other}"))),
                };
                let name = d.name.unwrap_or_else(|| {
                    d.path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default()
                });
                Ok(DatasetSource {
                    name,
                    path: resolve(d.path),
                    label_column,
                    has_header: d.has_header,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            datasets,
            protocol,
            output_dir: resolve(raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets".into()));
        }
        if self.protocol.methods.is_empty() {
            return Err(Error::Config("no methods".into()));
        }
        if self.protocol.n_folds < 2 {
            return Err(Error::Config(format!(
                "folds must be at least 2, got {}",
                self.protocol.n_folds
            )));
        }
        Ok(())
    }
}
