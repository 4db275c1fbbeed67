//! The `can` command: `adjust`, `tune` and `simulate`.
//!
//! Exit status is 0 on success, 1 for invalid input or usage, and 2 when the
//! numerics fail (degenerate rows, sampling exhaustion, undefined gain).
//! Every output is computed before the first file is written.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::apply::CanModel;
use super::io::{LabelFile, PredictionFile, TaskMode};
use super::priors::compute_priors;
use super::report::{self, SplitOutcome};
use super::tune::{grid_search, HyperGrid, Objective, DEFAULT_ALPHA_GRID, DEFAULT_DEPTH_GRID, DEFAULT_TAU_GRID};
use crate::error::{Error, Result};
use crate::simulation::{run_grid, SimulationConfig};
use crate::types::CanHyperParams;

#[derive(Debug, Parser)]
#[command(
    name = "can",
    version,
    about = "Re-adjust ambiguous classifier predictions by alternating normalization"
)]
pub struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a reference set on validation predictions and re-adjust test predictions.
    Adjust(AdjustArgs),
    /// Grid-search alpha, depth and tau on validation predictions.
    Tune(TuneArgs),
    /// Run the random-matrix simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub val_preds: PathBuf,
    #[arg(long)]
    pub val_labels: PathBuf,
    /// Training labels for the class priors.
    #[arg(long)]
    pub train_labels: PathBuf,
    #[arg(long, value_enum)]
    pub mode: TaskMode,
    /// Additive smoothing for the class priors.
    #[arg(long, default_value_t = 0.0)]
    pub prior_smoothing: f64,
    /// Largest k scanned by the top-k entropy; defaults to min(10, classes).
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AdjustArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub test_preds: PathBuf,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub depth: usize,
    #[arg(long)]
    pub tau: f64,
    /// Permit the reference set to come from the file being adjusted.
    #[arg(long)]
    pub allow_self_reference: bool,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = DEFAULT_ALPHA_GRID)]
    pub alpha_grid: String,
    #[arg(long, default_value = DEFAULT_DEPTH_GRID)]
    pub depth_grid: String,
    #[arg(long, default_value = DEFAULT_TAU_GRID)]
    pub tau_grid: String,
    #[arg(long, value_enum)]
    pub objective: Objective,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML simulation config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Adjust(args) => adjust(&args),
        Command::Tune(args) => tune(&args),
        Command::Simulate(args) => simulate(&args),
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn load_gold(path: &Path, preds: &PredictionFile) -> Result<Vec<std::collections::BTreeSet<usize>>> {
    LabelFile::load(path, &preds.class_names, preds.mode)?.aligned_to(&preds.ids)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn adjust(args: &AdjustArgs) -> Result<()> {
    let data = &args.data;
    if !args.allow_self_reference && same_file(&data.val_preds, &args.test_preds) {
        return Err(Error::invalid(
            "the reference set would come from the file being adjusted; pass --allow-self-reference to permit this",
        ));
    }
    let val = PredictionFile::load(&data.val_preds, data.mode)?;
    let test = PredictionFile::load(&args.test_preds, data.mode)?;
    if test.class_names != val.class_names {
        return Err(Error::invalid(format!(
            "class header mismatch between {} and {}",
            data.val_preds.display(),
            args.test_preds.display()
        )));
    }
    let val_gold = load_gold(&data.val_labels, &val)?;
    let test_gold = args.test_labels.as_deref().map(|p| load_gold(p, &test)).transpose()?;
    let priors = compute_priors(&data.train_labels, &val.class_names, data.mode, data.prior_smoothing)?;
    let mut hp = CanHyperParams::new(args.alpha, args.depth, args.tau)?;
    if let Some(k) = data.k_max {
        hp = hp.with_k_max(k)?;
    }

    let model = CanModel::fit(&val, &priors, hp)?;
    log::info!("reference set: {} units", model.reference().nrows());
    let val_out = model.adjust(&val)?;
    let test_out = model.adjust(&test)?;
    let splits = [
        SplitOutcome {
            name: "val",
            before: &val,
            after: &val_out,
            gold: Some(&val_gold),
        },
        SplitOutcome {
            name: "test",
            before: &test,
            after: &test_out,
            gold: test_gold.as_deref(),
        },
    ];

    let mut buffers: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut push = |name, f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        buffers.push((name, buf));
        Ok(())
    };
    push("adjusted_test.csv", &|b| test_out.file.to_writer(b))?;
    push("adjusted_val.csv", &|b| val_out.file.to_writer(b))?;
    push("units_test.csv", &|b| report::write_units(b, &test_out))?;
    push("units_val.csv", &|b| report::write_units(b, &val_out))?;
    push("metrics.csv", &|b| report::write_metrics(b, &splits))?;
    push("gain.csv", &|b| report::write_gain(b, &splits))?;
    write_all(&data.out, &buffers)
}

fn write_all(dir: &Path, buffers: &[(&str, Vec<u8>)]) -> Result<()> {
    ensure_dir(dir)?;
    for (name, bytes) in buffers {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn tune(args: &TuneArgs) -> Result<()> {
    let data = &args.data;
    let val = PredictionFile::load(&data.val_preds, data.mode)?;
    let gold = load_gold(&data.val_labels, &val)?;
    let priors = compute_priors(&data.train_labels, &val.class_names, data.mode, data.prior_smoothing)?;
    let grid = HyperGrid::parse(&args.alpha_grid, &args.depth_grid, &args.tau_grid)?.with_k_max(data.k_max);
    if let Some(k) = data.k_max {
        CanHyperParams::new(grid.alphas[0], grid.depths[0], grid.taus[0])?.with_k_max(k)?;
    }
    log::info!("evaluating {} combinations", grid.len());
    let result = grid_search(&val, &gold, &priors, &grid, args.objective)?;
    log::info!(
        "best alpha={} depth={} tau={} {}={}",
        result.best.alpha,
        result.best.depth,
        result.best.tau,
        args.objective,
        result.best_objective
    );
    let mut grid_csv = Vec::new();
    report::write_grid(&mut grid_csv, &result)?;
    let mut best_csv = Vec::new();
    report::write_best(&mut best_csv, &result, args.objective)?;
    write_all(&data.out, &[("grid.csv", grid_csv), ("best.csv", best_csv)])
}

/// Reads a TOML simulation config; missing keys keep their defaults.
pub fn load_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1) as u64),
        message: e.message().to_string(),
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_simulation_config(path)?,
        None => SimulationConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let report = run_grid(&cfg)?;
    let mut detail = Vec::new();
    report.write_csv(&mut detail)?;
    let mut summary = Vec::new();
    report.write_summary_csv(&mut summary)?;
    let meta = serde_json::json!({
        "rng_algorithm": report.rng_algorithm,
        "seed": report.seed,
        "config": cfg,
    });
    let mut meta_bytes = serde_json::to_vec_pretty(&meta).map_err(|e| Error::invalid(e.to_string()))?;
    meta_bytes.push(b'\n');
    write_all(
        &args.out,
        &[
            ("simulation.csv", detail),
            ("simulation_summary.csv", summary),
            ("simulation_meta.json", meta_bytes),
        ],
    )
}
