//! Text dump of a trained model. See `docs/model-format.md` for the layout.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::enn::{BaseStatistic, EnnCore};
use super::graph::WeightedKnnGraph;
use super::models::{EnanModel, EnanOptions, EnnModel, ZeroFallback};
use super::stats::ClasswiseStats;
use crate::data_io::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::natural_neighbor::{NanSearchOptions, NaturalNeighborModel, NeighborCountRule};
use crate::spatial_index::{KdTree, Neighbor};

pub const FORMAT_MAGIC: &str = "ENAN-MODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Enan(EnanModel),
    Enn(EnnModel),
}

impl TrainedModel {
    pub fn core(&self) -> &EnnCore {
        match self {
            TrainedModel::Enan(m) => m.core(),
            TrainedModel::Enn(m) => m.core(),
        }
    }

    pub fn predict_one(&self, z: &[f64]) -> Result<usize> {
        match self {
            TrainedModel::Enan(m) => m.predict_one(z),
            TrainedModel::Enn(m) => m.predict_one(z),
        }
    }

    pub fn predict(&self, queries: &[f64]) -> Result<Vec<usize>> {
        match self {
            TrainedModel::Enan(m) => m.predict(queries),
            TrainedModel::Enn(m) => m.predict(queries),
        }
    }
}

/// A model plus the feature scaling its training data went through.
#[derive(Debug, Clone)]
pub struct SavedModel {
    pub model: TrainedModel,
    pub scaler: Option<MinMaxScaler>,
}

impl SavedModel {
    pub fn new(model: TrainedModel, scaler: Option<MinMaxScaler>) -> Self {
        SavedModel { model, scaler }
    }

    pub fn dim(&self) -> usize {
        self.model.core().dim()
    }

    pub fn class_names(&self) -> &[String] {
        self.model.core().data().class_names()
    }

    /// Predicts raw (unscaled) row-major queries.
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<usize>> {
        match &self.scaler {
            None => self.model.predict(queries),
            Some(s) => {
                let dim = self.dim();
                if !queries.len().is_multiple_of(dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: queries.len() % dim,
                    });
                }
                let scaled: Vec<f64> = queries.chunks_exact(dim).flat_map(|q| s.transform_point(q)).collect();
                self.model.predict(&scaled)
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        SavedModel::read_from(BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let core = self.model.core();
        let data = core.data();
        let graph = core.graph();
        writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
        let kind = match &self.model {
            TrainedModel::Enan(_) => "enan",
            TrainedModel::Enn(_) => "enn",
        };
        writeln!(out, "kind {kind}")?;
        writeln!(out, "name {}", data.name())?;
        writeln!(out, "dim {}", data.dim())?;
        writeln!(out, "points {}", data.len())?;
        writeln!(out, "classes {}", data.n_classes())?;
        for name in data.class_names() {
            writeln!(out, "class {name}")?;
        }
        writeln!(out, "k_max {}", graph.k_max())?;
        writeln!(out, "depth {}", graph.depth())?;
        if let TrainedModel::Enan(m) = &self.model {
            let nan = m.nan_model();
            write!(out, "nan_rounds")?;
            for z in nan.rounds_log() {
                write!(out, " {z}")?;
            }
            writeln!(out)?;
            writeln!(out, "nan_hit_cap {}", u8::from(nan.hit_cap()))?;
            let o = m.options();
            writeln!(
                out,
                "options count={} zero={} base={} max_lambda={} stable={}",
                match o.count_rule {
                    NeighborCountRule::Mutual => "mutual",
                    NeighborCountRule::Reverse => "reverse",
                },
                match o.zero_fallback {
                    ZeroFallback::Lambda => "lambda",
                    ZeroFallback::One => "one",
                },
                match o.base {
                    BaseStatistic::QueryK => "query",
                    BaseStatistic::TrainingK => "training",
                },
                o.nan.max_lambda,
                u8::from(o.nan.stable_fallback),
            )?;
        }
        match &self.scaler {
            None => writeln!(out, "scaling none")?,
            Some(s) => {
                writeln!(out, "scaling minmax")?;
                for (lo, range) in s.mins().iter().zip(s.ranges()) {
                    writeln!(out, "scale {lo} {range}")?;
                }
            }
        }
        for (i, p) in data.points().enumerate() {
            write!(out, "point {}", data.label(i))?;
            for v in p {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        for i in 0..graph.len() {
            write!(out, "edges {i}")?;
            for n in graph.neighbors(i) {
                write!(out, " {}:{}", n.id, n.dist2)?;
            }
            writeln!(out)?;
        }
        let stats = core.stats();
        for i in 0..graph.len() {
            write!(out, "hits {i}")?;
            for r in 1..=stats.depth() {
                write!(out, " {}", stats.hits(i, r))?;
            }
            writeln!(out)?;
        }
        writeln!(out, "end")
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = Lines::new(input);

        let header = lines.next_line()?;
        let mut head = header.split_whitespace();
        if head.next() != Some(FORMAT_MAGIC) {
            return Err(lines.err("not an ENaN model file"));
        }
        let version: u32 = lines.parse(head.next().unwrap_or(""))?;
        if version != FORMAT_VERSION {
            return Err(lines.err(format!("unsupported format version {version}")));
        }

        let kind = lines.field("kind")?;
        if kind != "enan" && kind != "enn" {
            return Err(lines.err(format!("unknown model kind {kind:?}")));
        }
        let name = lines.field("name")?;
        let dim: usize = lines.parse_field("dim")?;
        let m: usize = lines.parse_field("points")?;
        let n_classes: usize = lines.parse_field("classes")?;
        let class_names = (0..n_classes)
            .map(|_| lines.field("class"))
            .collect::<Result<Vec<_>>>()?;
        let k_max: usize = lines.parse_field("k_max")?;
        let depth: usize = lines.parse_field("depth")?;

        let mut enan_parts = None;
        if kind == "enan" {
            let rounds = lines.field("nan_rounds")?;
            let rounds = rounds
                .split_whitespace()
                .map(|t| lines.parse::<usize>(t))
                .collect::<Result<Vec<_>>>()?;
            let hit_cap = lines.parse_field::<u8>("nan_hit_cap")? != 0;
            let opts = lines.field("options")?;
            let mut options = EnanOptions::default();
            for kv in opts.split_whitespace() {
                let (key, value) = kv
                    .split_once('=')
                    .ok_or_else(|| lines.err(format!("bad option {kv:?}")))?;
                match (key, value) {
                    ("count", "mutual") => options.count_rule = NeighborCountRule::Mutual,
                    ("count", "reverse") => options.count_rule = NeighborCountRule::Reverse,
                    ("zero", "lambda") => options.zero_fallback = ZeroFallback::Lambda,
                    ("zero", "one") => options.zero_fallback = ZeroFallback::One,
                    ("base", "query") => options.base = BaseStatistic::QueryK,
                    ("base", "training") => options.base = BaseStatistic::TrainingK,
                    ("max_lambda", v) => {
                        options.nan = NanSearchOptions {
                            max_lambda: lines.parse(v)?,
                            ..options.nan
                        }
                    }
                    ("stable", v) => {
                        options.nan = NanSearchOptions {
                            stable_fallback: lines.parse::<u8>(v)? != 0,
                            ..options.nan
                        }
                    }
                    _ => return Err(lines.err(format!("unknown option {kv:?}"))),
                }
            }
            enan_parts = Some((rounds, hit_cap, options));
        }

        let scaling = lines.field("scaling")?;
        let scaler = match scaling.as_str() {
            "none" => None,
            "minmax" => {
                let mut mins = Vec::with_capacity(dim);
                let mut ranges = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let rest = lines.field("scale")?;
                    let vals = lines.floats(&rest)?;
                    if vals.len() != 2 {
                        return Err(lines.err("scale line needs min and range"));
                    }
                    mins.push(vals[0]);
                    ranges.push(vals[1]);
                }
                Some(MinMaxScaler::from_parts(mins, ranges))
            }
            other => return Err(lines.err(format!("unknown scaling {other:?}"))),
        };

        let mut values = Vec::with_capacity(m * dim);
        let mut labels = Vec::with_capacity(m);
        for _ in 0..m {
            let rest = lines.field("point")?;
            let (label, coords) = rest.split_once(' ').ok_or_else(|| lines.err("point line too short"))?;
            labels.push(lines.parse::<usize>(label)?);
            let coords = lines.floats(coords)?;
            if coords.len() != dim {
                return Err(lines.err(format!("point has {} coordinates, expected {dim}", coords.len())));
            }
            values.extend(coords);
        }
        let mut lists = Vec::with_capacity(m);
        for i in 0..m {
            let rest = lines.field("edges")?;
            let mut toks = rest.split_whitespace();
            if lines.parse::<usize>(toks.next().unwrap_or(""))? != i {
                return Err(lines.err(format!("expected edges of point {i}")));
            }
            let list = toks
                .map(|t| {
                    let (id, d2) = t.split_once(':').ok_or_else(|| lines.err(format!("bad edge {t:?}")))?;
                    Ok(Neighbor {
                        id: lines.parse(id)?,
                        dist2: lines.parse(d2)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if list.len() != depth {
                return Err(lines.err(format!("point {i} has {} edges, expected {depth}", list.len())));
            }
            lists.push(list);
        }
        let mut prefix_hits = Vec::with_capacity(m * depth);
        for i in 0..m {
            let rest = lines.field("hits")?;
            let mut toks = rest.split_whitespace();
            if lines.parse::<usize>(toks.next().unwrap_or(""))? != i {
                return Err(lines.err(format!("expected hits of point {i}")));
            }
            let row = toks.map(|t| lines.parse::<u32>(t)).collect::<Result<Vec<_>>>()?;
            if row.len() != depth {
                return Err(lines.err(format!("point {i} has {} prefix sums, expected {depth}", row.len())));
            }
            prefix_hits.extend(row);
        }
        if lines.next_line()? != "end" {
            return Err(lines.err("expected end"));
        }

        let wrap = |e: Error| lines.err(e.to_string());
        let data = Dataset::new(name, dim, values, labels, class_names).map_err(wrap)?;
        let index = KdTree::build(data.values(), dim).map_err(wrap)?;
        let graph = WeightedKnnGraph::from_lists(lists, data.labels().to_vec(), n_classes)
            .and_then(|g| g.with_k_max(k_max))
            .map_err(wrap)?;
        let stats = ClasswiseStats::from_prefix_hits(&graph, prefix_hits).map_err(wrap)?;
        let model = match enan_parts {
            Some((rounds, hit_cap, options)) => {
                let nan =
                    NaturalNeighborModel::from_parts(k_max, graph.lists().to_vec(), rounds, hit_cap).map_err(wrap)?;
                let core = EnnCore::from_parts(data, index, graph, stats);
                TrainedModel::Enan(EnanModel::from_parts(core, nan, options))
            }
            None => {
                let core = EnnCore::from_parts(data, index, graph, stats);
                TrainedModel::Enn(EnnModel::from_core(core, k_max))
            }
        };
        Ok(SavedModel { model, scaler })
    }
}

struct Lines<R> {
    input: R,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn new(input: R) -> Self {
        Lines {
            input,
            line_no: 0,
            buf: String::new(),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line_no,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<String> {
        self.buf.clear();
        let n = self.input.read_line(&mut self.buf).map_err(|e| Error::ModelFormat {
            line: self.line_no + 1,
            message: e.to_string(),
        })?;
        self.line_no += 1;
        if n == 0 {
            return Err(self.err("unexpected end of file"));
        }
        Ok(self.buf.trim_end_matches(['\n', '\r']).to_owned())
    }

    /// Reads a `key rest...` line and returns `rest`.
    fn field(&mut self, key: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.to_owned()),
            None if line == key => Ok(String::new()),
            _ => Err(self.err(format!("expected {key:?}"))),
        }
    }

    fn parse_field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        self.parse(&v)
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.trim().parse().map_err(|_| self.err(format!("cannot parse {s:?}")))
    }

    fn floats(&self, s: &str) -> Result<Vec<f64>> {
        s.split_whitespace().map(|t| self.parse(t)).collect()
    }
}
