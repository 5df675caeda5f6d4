//! Command-line entry point: deterministic, scriptable runs of the whole
//! workflow. Flags override an optional key=value config file; the env var
//! `FIBERFORGE_SEED` is the fallback default seed. Every run echoes its
//! resolved configuration into a manifest file next to its outputs, and
//! identical invocations produce byte-identical files.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-data error, 4 numeric
//! failure (non-finite training loss).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use fiberforge::error::Error;
use fiberforge::evaluation::{
    emit_error_report, emit_loss_curve, emit_sweep_report, evaluate_design,
    evaluate_design_oracle, evaluate_predictive, evaluate_predictive_oracle, write_text,
    ErrorReport,
};
use fiberforge::neuralnet::NetworkConfig;
use fiberforge::pipelines::{
    degenerate_feature_names, sweep_batch_sizes_parallel, train_task, TaskKind, TaskModel,
};
use fiberforge::rng::{derive_seed, STREAM_MODEL, STREAM_SPLIT};
use fiberforge::synthdata::{
    generate_dataset, read_csv, split_dataset, write_csv, FiberFeatures, ManufacturingParams,
};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_PER_CELL: usize = 200;
const DEFAULT_SPLIT_N: usize = 479;
const SEED_ENV_VAR: &str = "FIBERFORGE_SEED";

#[derive(Parser)]
#[command(
    name = "fiberforge",
    version,
    about = "Synthetic-data-driven forward and inverse models for microfluidic fiber fabrication"
)]
struct Cli {
    /// Optional key=value config file; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV from the baseline statistics.
    Synth {
        /// Records per condition cell (the dataset has 6x this many rows).
        #[arg(long)]
        per_cell: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a dataset and train one predictive or design model.
    Train {
        #[command(flatten)]
        train: TrainArgs,
        /// Output model JSON path; the loss curve lands next to it.
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Train one model per batch size and evaluate each on the holdout.
    Sweep {
        #[command(flatten)]
        train: TrainArgs,
        /// Batch sizes: a comma list and/or A-B ranges (default 1-20).
        #[arg(long)]
        sizes: Option<String>,
        /// Output directory for models, reports, and charts.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a saved model on one input point and print labeled outputs.
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// Sheath flow rate, uL/min (predictive models).
        #[arg(long)]
        sheath: Option<f64>,
        /// Core flow rate, uL/min (predictive models).
        #[arg(long)]
        core: Option<f64>,
        /// Bath concentration, % (predictive models).
        #[arg(long)]
        bath: Option<f64>,
        /// Fiber length, um (design models).
        #[arg(long)]
        length: Option<f64>,
        /// Fiber width, um (design models).
        #[arg(long)]
        width: Option<f64>,
        /// Porosity, % (design models).
        #[arg(long)]
        porosity: Option<f64>,
        /// Young's modulus, MPa (design models).
        #[arg(long)]
        modulus: Option<f64>,
    },
    /// Evaluate a saved model against a holdout CSV.
    Eval {
        #[arg(long, conflicts_with = "oracle_means")]
        model: Option<PathBuf>,
        #[arg(long)]
        holdout: PathBuf,
        /// Output directory for the error report.
        #[arg(long)]
        out: PathBuf,
        /// Score a stub that returns the holdout reference values
        /// (all-zero errors); requires --task instead of --model.
        #[arg(long)]
        oracle_means: bool,
        /// Task direction for --oracle-means: predict or design.
        #[arg(long)]
        task: Option<String>,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Task direction: predict or design.
    #[arg(long)]
    task: String,
    /// Input dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Records assigned to the model (train+validation) set.
    #[arg(long)]
    split_n: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves 0 for --help/--version and 2 for usage errors.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) | Error::TaskMismatch { .. } => 2,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::ModelFormat { .. }
        | Error::EmptyCell { .. }
        | Error::ZeroReference => 3,
        Error::NonFiniteLoss { .. } => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file_config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth { per_cell, seed, out } => cmd_synth(&file_config, per_cell, seed, &out),
        Command::Train { train, model_out } => cmd_train(&file_config, &train, &model_out),
        Command::Sweep { train, sizes, out_dir } => cmd_sweep(&file_config, &train, sizes, &out_dir),
        Command::Infer { model, sheath, core, bath, length, width, porosity, modulus } => {
            cmd_infer(&model, sheath, core, bath, length, width, porosity, modulus)
        }
        Command::Eval { model, holdout, out, oracle_means, task } => {
            cmd_eval(model.as_deref(), &holdout, &out, oracle_means, task.as_deref())
        }
    }
}

/// Plain key=value config file ('#' starts a comment). Unknown keys are
/// usage errors so typos do not pass silently.
struct FileConfig(BTreeMap<String, String>);

const KNOWN_KEYS: [&str; 7] = ["per_cell", "seed", "split_n", "batch", "epochs", "lr", "sizes"];

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, Error> {
        let mut map = BTreeMap::new();
        let Some(path) = path else {
            return Ok(FileConfig(map));
        };
        let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "{}: line {}: expected key=value, got `{raw}`",
                    path.display(),
                    i + 1
                )));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::InvalidArgument(format!(
                    "{}: line {}: unknown config key `{key}`",
                    path.display(),
                    i + 1
                )));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key `{key}` has invalid value `{raw}`"))
            }),
        }
    }
}

/// Resolution order: flag, then config file, then (for the seed) the
/// env var, then the built-in default.
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, Error> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = file.get::<T>(key)? {
        return Ok(v);
    }
    Ok(default)
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, Error> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = file.get::<u64>("seed")? {
        return Ok(v);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw.parse::<u64>().map_err(|_| {
            Error::InvalidArgument(format!("{SEED_ENV_VAR} has invalid value `{raw}`"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_task(raw: &str) -> Result<TaskKind, Error> {
    TaskKind::parse(raw).ok_or_else(|| {
        Error::InvalidArgument(format!("task must be `predict` or `design`, got `{raw}`"))
    })
}

fn manifest_string(command: &str, entries: &[(&str, String)]) -> String {
    let mut out = format!("command={command}\n");
    for (key, value) in entries {
        let _ = writeln!(out, "{key}={value}");
    }
    out
}

fn sibling_manifest(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest");
    path.with_file_name(name)
}

fn cmd_synth(
    file: &FileConfig,
    per_cell: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Error> {
    let per_cell = resolve(per_cell, file, "per_cell", DEFAULT_PER_CELL)?;
    let seed = resolve_seed(seed, file)?;
    let ds = generate_dataset(per_cell, seed)?;
    write_csv(&ds, out)?;
    let manifest = manifest_string(
        "synth",
        &[
            ("per_cell", per_cell.to_string()),
            ("seed", seed.to_string()),
            ("out", out.display().to_string()),
        ],
    );
    write_text(&sibling_manifest(out), &manifest)?;
    println!("wrote {} records to {}", ds.len(), out.display());
    Ok(())
}

struct ResolvedTrain {
    task: TaskKind,
    split_n: usize,
    batch: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
}

impl ResolvedTrain {
    fn manifest_entries(&self, data: &Path) -> Vec<(&'static str, String)> {
        vec![
            ("task", self.task.as_str().to_string()),
            ("data", data.display().to_string()),
            ("split_n", self.split_n.to_string()),
            ("batch", self.batch.to_string()),
            ("epochs", self.epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Table-default config with this run's hyperparameters. The network
    /// seed and the split seed come from separate streams derived from the
    /// run seed.
    fn network_config(&self) -> NetworkConfig {
        let mut cfg = NetworkConfig::new(
            self.task.input_dim(),
            self.task.output_dim(),
            derive_seed(self.seed, STREAM_MODEL),
        );
        cfg.batch_size = self.batch;
        cfg.epochs = self.epochs;
        cfg.learning_rate = self.lr;
        cfg
    }
}

fn resolve_train(args: &TrainArgs, file: &FileConfig) -> Result<ResolvedTrain, Error> {
    let resolved = ResolvedTrain {
        task: parse_task(&args.task)?,
        split_n: resolve(args.split_n, file, "split_n", DEFAULT_SPLIT_N)?,
        batch: resolve(args.batch, file, "batch", 20)?,
        epochs: resolve(args.epochs, file, "epochs", 32)?,
        lr: resolve(args.lr, file, "lr", 0.001)?,
        seed: resolve_seed(args.seed, file)?,
    };
    if resolved.split_n == 0 {
        return Err(Error::InvalidArgument("split_n must be at least 1".into()));
    }
    if resolved.batch == 0 || resolved.epochs == 0 {
        return Err(Error::InvalidArgument("batch and epochs must be at least 1".into()));
    }
    if !(resolved.lr > 0.0 && resolved.lr.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            resolved.lr
        )));
    }
    Ok(resolved)
}

fn loss_stem(model_out: &Path) -> String {
    let stem = model_out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string());
    format!("{stem}.loss")
}

fn warn_degenerate_features(task: TaskKind, model_set: &fiberforge::synthdata::Dataset) {
    for name in degenerate_feature_names(task, &model_set.records) {
        eprintln!("warning: `{name}` is constant in the model set; standardization uses std 1");
    }
}

fn cmd_train(file: &FileConfig, args: &TrainArgs, model_out: &Path) -> Result<(), Error> {
    let r = resolve_train(args, file)?;
    let ds = read_csv(&args.data)?;
    let (model_set, _holdout) = split_dataset(&ds, r.split_n, derive_seed(r.seed, STREAM_SPLIT))?;
    warn_degenerate_features(r.task, &model_set);
    let (model, curve) = train_task(r.task, &model_set.records, &r.network_config())?;
    model.save(model_out)?;

    let dir = model_out.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let title = format!("{} task, batch size {}: loss per epoch", r.task.as_str(), r.batch);
    emit_loss_curve(&curve, &title, &dir, &loss_stem(model_out))?;

    let mut entries = r.manifest_entries(&args.data);
    entries.push(("model_out", model_out.display().to_string()));
    write_text(&sibling_manifest(model_out), &manifest_string("train", &entries))?;

    println!(
        "trained {} model on {} records; final training loss {:.6}, validation loss {:.6}",
        r.task.as_str(),
        model_set.len(),
        curve.training.last().unwrap(),
        curve.validation.last().unwrap()
    );
    println!("model written to {}", model_out.display());
    Ok(())
}

/// Parse batch sizes: comma-separated entries, each a number or an A-B range.
fn parse_sizes(raw: &str) -> Result<Vec<usize>, Error> {
    let bad = |detail: &str| {
        Error::InvalidArgument(format!("invalid --sizes `{raw}`: {detail}"))
    };
    let mut sizes = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((a, b)) = part.split_once('-') {
            let lo: usize = a.trim().parse().map_err(|_| bad("range start is not a number"))?;
            let hi: usize = b.trim().parse().map_err(|_| bad("range end is not a number"))?;
            if lo == 0 || hi < lo {
                return Err(bad("range must be ascending and start at 1 or above"));
            }
            sizes.extend(lo..=hi);
        } else {
            let v: usize = part.parse().map_err(|_| bad("entry is not a number"))?;
            if v == 0 {
                return Err(bad("batch sizes start at 1"));
            }
            sizes.push(v);
        }
    }
    if sizes.is_empty() {
        return Err(bad("no sizes given"));
    }
    Ok(sizes)
}

fn cmd_sweep(
    file: &FileConfig,
    args: &TrainArgs,
    sizes: Option<String>,
    out_dir: &Path,
) -> Result<(), Error> {
    let r = resolve_train(args, file)?;
    let sizes_raw = match sizes {
        Some(s) => s,
        None => file.get::<String>("sizes")?.unwrap_or_else(|| "1-20".to_string()),
    };
    let sizes = parse_sizes(&sizes_raw)?;
    let ds = read_csv(&args.data)?;
    let (model_set, holdout) = split_dataset(&ds, r.split_n, derive_seed(r.seed, STREAM_SPLIT))?;
    warn_degenerate_features(r.task, &model_set);

    let base_cfg = r.network_config();
    let sweep = sweep_batch_sizes_parallel(
        r.task,
        &model_set.records,
        &holdout.records,
        &base_cfg,
        &sizes,
    )?;

    fs::create_dir_all(out_dir).map_err(|e| Error::Io { path: out_dir.into(), source: e })?;
    for entry in &sweep.entries {
        entry.model.save(&out_dir.join(format!("model_b{:02}.json", entry.batch_size)))?;
    }
    emit_sweep_report(&sweep, out_dir)?;

    let mut entries = r.manifest_entries(&args.data);
    entries.push(("sizes", sizes_raw.clone()));
    entries.push(("out_dir", out_dir.display().to_string()));
    write_text(&out_dir.join("manifest.txt"), &manifest_string("sweep", &entries))?;

    println!(
        "swept {} batch sizes for the {} task; reports in {}",
        sweep.entries.len(),
        r.task.as_str(),
        out_dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_infer(
    model_path: &Path,
    sheath: Option<f64>,
    core: Option<f64>,
    bath: Option<f64>,
    length: Option<f64>,
    width: Option<f64>,
    porosity: Option<f64>,
    modulus: Option<f64>,
) -> Result<(), Error> {
    let model = TaskModel::load(model_path)?;
    let design_flags_given =
        length.is_some() || width.is_some() || porosity.is_some() || modulus.is_some();
    let predict_flags_given = sheath.is_some() || core.is_some() || bath.is_some();
    match model.task {
        TaskKind::Predict => {
            if design_flags_given || !(sheath.is_some() && core.is_some() && bath.is_some()) {
                return Err(Error::InvalidArgument(
                    "predictive model expects exactly --sheath, --core, --bath".into(),
                ));
            }
            let params = ManufacturingParams {
                sheath_flow: sheath.unwrap(),
                core_flow: core.unwrap(),
                bath_conc: bath.unwrap(),
            };
            params.validate()?;
            let f = model.predict_features(&params)?;
            println!("length_um = {}", f.length);
            println!("width_um = {}", f.width);
            println!("porosity_pct = {}", f.porosity);
            println!("youngs_mpa = {}", f.youngs_modulus);
        }
        TaskKind::Design => {
            if predict_flags_given
                || !(length.is_some() && width.is_some() && porosity.is_some() && modulus.is_some())
            {
                return Err(Error::InvalidArgument(
                    "design model expects exactly --length, --width, --porosity, --modulus".into(),
                ));
            }
            let features = FiberFeatures {
                length: length.unwrap(),
                width: width.unwrap(),
                porosity: porosity.unwrap(),
                youngs_modulus: modulus.unwrap(),
            };
            features.validate()?;
            let d = model.design_params(&features)?;
            println!("sheath_ul_min = {}", d.sheath_flow);
            println!("core_ul_min = {}", d.core_flow);
            println!("bath_pct_raw = {}", d.bath_raw);
            println!("bath_pct = {}", d.bath_conc);
        }
    }
    Ok(())
}

fn cmd_eval(
    model_path: Option<&Path>,
    holdout_path: &Path,
    out: &Path,
    oracle_means: bool,
    task: Option<&str>,
) -> Result<(), Error> {
    let holdout = read_csv(holdout_path)?;
    let (report, model_desc): (ErrorReport, String) = if oracle_means {
        let task = parse_task(task.ok_or_else(|| {
            Error::InvalidArgument("--oracle-means requires --task predict|design".into())
        })?)?;
        let report = match task {
            TaskKind::Predict => evaluate_predictive_oracle(&holdout.records)?,
            TaskKind::Design => evaluate_design_oracle(&holdout.records)?,
        };
        (report, format!("oracle-means:{}", task.as_str()))
    } else {
        let model_path = model_path.ok_or_else(|| {
            Error::InvalidArgument("--model is required unless --oracle-means is set".into())
        })?;
        let model = TaskModel::load(model_path)?;
        let report = match model.task {
            TaskKind::Predict => evaluate_predictive(&model, &holdout.records)?,
            TaskKind::Design => evaluate_design(&model, &holdout.records)?,
        };
        (report, model_path.display().to_string())
    };

    emit_error_report(&report, out)?;
    let manifest = manifest_string(
        "eval",
        &[
            ("model", model_desc),
            ("holdout", holdout_path.display().to_string()),
            ("out", out.display().to_string()),
        ],
    );
    write_text(&out.join("manifest.txt"), &manifest)?;

    match report.task {
        TaskKind::Predict => {
            for feature in fiberforge::evaluation::predict_feature_names() {
                println!(
                    "{feature}: mean |error| {:.3}%",
                    report.overall_abs(feature).unwrap()
                );
            }
        }
        TaskKind::Design => {
            for feature in fiberforge::evaluation::DESIGN_FEATURES {
                println!(
                    "{feature}: mean |error| {:.3}%",
                    report.overall_abs(feature).unwrap()
                );
            }
            if let Some(confusion) = &report.bath_confusion {
                println!("bath accuracy: {:.1}%", 100.0 * confusion.accuracy());
            }
        }
    }
    println!("report written to {}", out.display());
    Ok(())
}
