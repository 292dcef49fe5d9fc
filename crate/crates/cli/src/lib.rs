//! Batch front end for the pdilab Monte Carlo experiments.
//!
//! Each experiment subcommand reads a JSON config, runs the engine inside a
//! bounded rayon pool and writes CSV tables, a `results.json` envelope and a
//! `manifest.json` into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 enumeration capacity
//! exceeded, 4 runtime failure.

pub mod error;
pub mod output;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pdilab_core::montecarlo::{
    calibrate_thresholds, pd_vs_snr, phase_mse_sweep, run_roc, ExperimentSpec, PdSweepSpec,
    PhaseMseSpec,
};
use pdilab_core::{ComplexSample, CorrelatorBlock, DetectorContext, DetectorId, SearchOptions};
use serde::de::DeserializeOwned;
use serde::Serialize;

use error::io_error;
pub use error::CliError;
use output::{ResultsEnvelope, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "pdilab",
    version,
    about = "Post-detection integration detector experiments"
)]
pub struct Cli {
    /// Worker threads; output is identical for any value.
    #[arg(long, global = true, env = "PDILAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrated ROC curves, one roc_<detector>.csv per detector.
    Roc(ExperimentArgs),
    /// Detection probability against SNR at a fixed false-alarm rate.
    PdSweep(ExperimentArgs),
    /// Phase-estimator MSE against SNR with the Cramér-Rao bound.
    PhaseMse(ExperimentArgs),
    /// Threshold table only, written to thresholds.csv.
    Calibrate(ExperimentArgs),
    /// Applies one detector and threshold to blocks read from a CSV file.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV file with columns block_id,i,q.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub detector: DetectorId,

    /// Declares PRESENT when the statistic is strictly greater.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,

    /// Signal amplitude, required by bapdi, glrt and glrt-cf.
    #[arg(long)]
    pub amplitude: Option<f64>,

    /// Total complex noise variance, required with --amplitude.
    #[arg(long)]
    pub sigma_sq: Option<f64>,
}

/// Parses a JSON config, reporting syntax and schema errors by line and column.
pub fn parse_config<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

/// Runs `cli`, returning the paths written (or, for `detect`, nothing).
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    if let Command::Detect(a) = &cli.command {
        return detect(a, stdout).map(|_| Vec::new());
    }
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| io_error("thread pool", e))?;
    pool.install(|| match &cli.command {
        Command::Roc(a) => experiment(a, "roc", threads, roc_command),
        Command::PdSweep(a) => experiment(a, "pd-sweep", threads, pd_sweep_command),
        Command::PhaseMse(a) => experiment(a, "phase-mse", threads, phase_mse_command),
        Command::Calibrate(a) => experiment(a, "calibrate", threads, calibrate_command),
        Command::Detect(_) => unreachable!("handled above"),
    })
}

/// Outcome of one experiment body: the resolved spec and the files written.
struct Written {
    spec: serde_json::Value,
    files: Vec<String>,
}

fn experiment(
    args: &ExperimentArgs,
    subcommand: &str,
    threads: usize,
    body: fn(&ExperimentArgs, &str) -> Result<Written, CliError>,
) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_error(&format!("cannot create {}", args.out.display()), e))?;
    let written = body(args, subcommand)?;
    let manifest = RunManifest {
        subcommand: subcommand.to_string(),
        config_path: args.config.clone(),
        output_dir: args.out.clone(),
        spec: written.spec,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        files: written.files.clone(),
    };
    output::write_json(&args.out.join("manifest.json"), &manifest)?;
    let mut paths: Vec<PathBuf> = written.files.iter().map(|f| args.out.join(f)).collect();
    paths.push(args.out.join("manifest.json"));
    Ok(paths)
}

fn spec_value<T: Serialize>(spec: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(spec).map_err(|e| io_error("spec echo", e))
}

fn write_results<T: Serialize>(
    out: &Path,
    subcommand: &str,
    seed: u64,
    results: &T,
) -> Result<String, CliError> {
    let envelope = ResultsEnvelope {
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        results,
    };
    output::write_json(&out.join("results.json"), &envelope)?;
    Ok("results.json".into())
}

fn load_experiment(args: &ExperimentArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec: ExperimentSpec = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn roc_command(args: &ExperimentArgs, subcommand: &str) -> Result<Written, CliError> {
    let spec = load_experiment(args)?;
    let exp = run_roc(&spec)?;
    let mut files = Vec::new();
    for curve in &exp.curves {
        let name = format!("roc_{}.csv", curve.detector);
        output::write_csv(
            &args.out.join(&name),
            &output::ROC_HEADER,
            output::roc_rows(curve),
        )?;
        files.push(name);
    }
    files.push(write_results(&args.out, subcommand, spec.seed, &exp)?);
    Ok(Written {
        spec: spec_value(&spec)?,
        files,
    })
}

fn calibrate_command(args: &ExperimentArgs, subcommand: &str) -> Result<Written, CliError> {
    let spec = load_experiment(args)?;
    let table = calibrate_thresholds(&spec)?;
    let name = "thresholds.csv".to_string();
    output::write_csv(
        &args.out.join(&name),
        &output::THRESHOLD_HEADER,
        output::threshold_rows(&table),
    )?;
    let results = write_results(&args.out, subcommand, spec.seed, &table)?;
    Ok(Written {
        spec: spec_value(&spec)?,
        files: vec![name, results],
    })
}

fn pd_sweep_command(args: &ExperimentArgs, subcommand: &str) -> Result<Written, CliError> {
    let mut spec: PdSweepSpec = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let points = pd_vs_snr(&spec)?;
    let name = "pd_vs_snr.csv".to_string();
    output::write_csv(
        &args.out.join(&name),
        &output::PD_SWEEP_HEADER,
        output::pd_sweep_rows(&points),
    )?;
    let results = write_results(&args.out, subcommand, spec.seed, &points)?;
    Ok(Written {
        spec: spec_value(&spec)?,
        files: vec![name, results],
    })
}

fn phase_mse_command(args: &ExperimentArgs, subcommand: &str) -> Result<Written, CliError> {
    let mut spec: PhaseMseSpec = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let points = phase_mse_sweep(&spec)?;
    let name = "phase_mse.csv".to_string();
    output::write_csv(
        &args.out.join(&name),
        &output::PHASE_MSE_HEADER,
        output::phase_mse_rows(&points),
    )?;
    let results = write_results(&args.out, subcommand, spec.seed, &points)?;
    Ok(Written {
        spec: spec_value(&spec)?,
        files: vec![name, results],
    })
}

/// Blocks of a `block_id,i,q` CSV in order of first appearance.
pub fn read_blocks(path: &Path) -> Result<Vec<(String, CorrelatorBlock)>, CliError> {
    let origin = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {origin}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{origin}: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["block_id", "i", "q"] {
        return Err(CliError::Config(format!(
            "{origin}: expected header block_id,i,q, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut order: Vec<(String, Vec<ComplexSample>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| CliError::Config(format!("{origin}:{line}: {e}")))?;
        let num = |k: usize, name: &str| -> Result<f64, CliError> {
            record[k].parse::<f64>().map_err(|e| {
                CliError::Config(format!("{origin}:{line}: bad {name} `{}`: {e}", &record[k]))
            })
        };
        let sample = ComplexSample::new(num(1, "i")?, num(2, "q")?);
        let id = record[0].to_string();
        let k = *index.entry(id.clone()).or_insert_with(|| {
            order.push((id, Vec::new()));
            order.len() - 1
        });
        order[k].1.push(sample);
    }
    if order.is_empty() {
        return Err(CliError::Config(format!("{origin}: no blocks")));
    }
    order
        .into_iter()
        .map(|(id, samples)| {
            let block = CorrelatorBlock::new(samples)
                .map_err(|e| CliError::Config(format!("{origin}: block `{id}`: {e}")))?;
            Ok((id, block))
        })
        .collect()
}

/// Writes `block_id,statistic,decision` for every block of the input.
pub fn detect(args: &DetectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !args.threshold.is_finite() {
        return Err(CliError::Config("--threshold must be finite".into()));
    }
    let ctx = match (args.amplitude, args.sigma_sq) {
        (Some(a), Some(s)) => Some(DetectorContext::new(a, s)?),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "--amplitude and --sigma-sq must be given together".into(),
            ))
        }
    };
    if args.detector.needs_context() && ctx.is_none() {
        return Err(CliError::Config(format!(
            "detector `{}` requires --amplitude and --sigma-sq",
            args.detector
        )));
    }
    let blocks = read_blocks(&args.input)?;
    let opts = SearchOptions::default();
    let err = |e| io_error("stdout", e);
    writeln!(out, "block_id,statistic,decision").map_err(err)?;
    for (id, block) in &blocks {
        let stat = args.detector.evaluate(block, ctx.as_ref(), &opts)?;
        let decision = if stat > args.threshold {
            "PRESENT"
        } else {
            "ABSENT"
        };
        writeln!(out, "{id},{},{decision}", output::fmt_f64(stat)).map_err(err)?;
    }
    Ok(())
}
