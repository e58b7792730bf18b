use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use enan::classification::{train_enan, train_enn_fixed, SavedModel, TrainedModel};
use enan::data_io::{load_csv, load_features, Dataset, LabelColumn, MinMaxScaler};
use enan::harness::{export_nan_artifacts, run_benchmark, sweep_k, ExperimentConfig, Method, SweepMethod};
use enan::{Error, Result};

#[derive(Parser)]
#[command(name = "enan", version, about = "Natural-neighbor ENN classification and benchmarks")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate the configured methods on every configured dataset.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's fold count.
        #[arg(long)]
        folds: Option<usize>,
        /// Min-max scale features (fitted per training fold).
        #[arg(long)]
        normalize: bool,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated accuracy of KNN or ENN over a range of k.
    Sweep {
        #[command(flatten)]
        input: DataArgs,
        #[arg(long, default_value = "enn")]
        method: SweepMethod,
        /// `a..b` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "1..25", value_parser = parse_k_range)]
        k: KRange,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Train a model and save it.
    Train {
        #[command(flatten)]
        input: DataArgs,
        /// `enan` or `enn:<k>` (k may be `sqrt`).
        #[arg(long, default_value = "enan")]
        method: Method,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        model: PathBuf,
    },
    /// Label the rows of a CSV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        header: bool,
        /// Label column of the input; enables an accuracy line on stderr.
        #[arg(long, conflicts_with = "unlabeled")]
        label: Option<LabelColumn>,
        /// Every input column is a feature.
        #[arg(long)]
        unlabeled: bool,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the natural-neighbor graph of a dataset or saved ENaN model.
    ExportGraph {
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        model: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "last")]
        label: LabelColumn,
        #[arg(long)]
        header: bool,
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "last")]
    label: LabelColumn,
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        load_csv(&self.data, &self.label, self.header)
    }
}

#[derive(Clone, Debug)]
struct KRange(Vec<usize>);

fn parse_k_range(s: &str) -> std::result::Result<KRange, String> {
    let bad = || format!("bad k range {s:?}; expected a..b or a,b,c");
    let ks = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|k| k.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    if ks.is_empty() {
        return Err(bad());
    }
    Ok(KRange(ks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("enan: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Bench {
            config,
            seed,
            folds,
            normalize,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.protocol.seed = seed;
            }
            if let Some(folds) = folds {
                cfg.protocol.n_folds = folds;
            }
            cfg.protocol.normalize |= normalize;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let report = run_benchmark(&cfg)?;
            report.write_to_dir(&cfg.output_dir)?;
            print!("{}", report.render_text_body());
            eprintln!("wrote {}", cfg.output_dir.join("report.txt").display());
            Ok(())
        }
        Command::Sweep {
            input,
            method,
            k,
            seed,
            folds,
            normalize,
            out,
        } => {
            let ds = input.load()?;
            let result = sweep_k(&ds, method, &k.0, folds, seed, normalize)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join(format!("sweep_{}.csv", ds.name()));
            result.write_csv(&path)?;
            print!("{}", result.to_csv());
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Train {
            input,
            method,
            normalize,
            model,
        } => {
            let mut ds = input.load()?;
            let scaler = normalize.then(|| MinMaxScaler::fit(&ds));
            if let Some(s) = &scaler {
                ds = s.transform(&ds);
            }
            let m = ds.len();
            let trained = match method {
                Method::Enan => TrainedModel::Enan(train_enan(ds)?),
                Method::Enn(k) => TrainedModel::Enn(train_enn_fixed(ds, k.resolve(m))?),
                Method::Knn(_) => {
                    return Err(Error::InvalidArgument(
                        "knn models cannot be saved; use enan or enn:<k>".into(),
                    ))
                }
            };
            if let TrainedModel::Enan(e) = &trained {
                eprintln!("lambda {}", e.lambda());
            }
            SavedModel::new(trained, scaler).save(&model)?;
            eprintln!("wrote {}", model.display());
            Ok(())
        }
        Command::Predict {
            model,
            data,
            header,
            label,
            unlabeled,
            out,
        } => {
            let saved = SavedModel::load(&model)?;
            let (dim, queries, truth) = if unlabeled {
                let (dim, values) = load_features(&data, header)?;
                (dim, values, None)
            } else {
                let ds = load_csv(&data, &label.unwrap_or_default(), header)?;
                let truth: Vec<String> = ds.labels().iter().map(|&l| ds.class_name(l).to_owned()).collect();
                (ds.dim(), ds.values().to_vec(), Some(truth))
            };
            if dim != saved.dim() {
                return Err(Error::DimensionMismatch {
                    expected: saved.dim(),
                    found: dim,
                });
            }
            let predicted = saved.predict(&queries)?;
            let names = saved.class_names();
            let mut csv = String::from("row_index,predicted_label\n");
            for (i, &p) in predicted.iter().enumerate() {
                let _ = writeln!(csv, "{i},{}", names[p]);
            }
            write_or_print(out.as_deref(), &csv)?;
            if let Some(truth) = truth {
                let correct = predicted.iter().zip(&truth).filter(|(&p, t)| names[p] == **t).count();
                eprintln!(
                    "accuracy {:.2}% ({correct}/{})",
                    100.0 * correct as f64 / truth.len() as f64,
                    truth.len()
                );
            }
            Ok(())
        }
        Command::ExportGraph {
            model,
            data,
            label,
            header,
            normalize,
            out,
        } => {
            let enan_model = match (model, data) {
                (Some(path), _) => match SavedModel::load(&path)?.model {
                    TrainedModel::Enan(m) => m,
                    TrainedModel::Enn(_) => {
                        return Err(Error::InvalidArgument(format!("{}: not an ENaN model", path.display())))
                    }
                },
                (None, Some(path)) => {
                    let mut ds = load_csv(&path, &label, header)?;
                    if normalize {
                        ds = MinMaxScaler::fit(&ds).transform(&ds);
                    }
                    train_enan(ds)?
                }
                (None, None) => unreachable!("clap requires --model or --data"),
            };
            for path in export_nan_artifacts(&enan_model, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn write_or_print(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| Error::io(p, e)),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
