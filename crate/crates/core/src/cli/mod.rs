//! Command line front end: subcommands, config merging, artifact output
//! and exit statuses.

pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;

use crate::error::{Error, Result};
use crate::seeding::SAMPLER_SCHEME;
use clap::{Args, Parser, Subcommand};
use config::{one_line, Experiment, ExperimentConfig, Seed, ENV_OUTPUT_DIR, ENV_THREADS};
use output::{ArtifactWriter, FileRecord, SCHEMA_VERSION};
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "rmf-lab", version, about = "Experiments on partial sums of random multiplicative functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo, exact or brute-force moments E|M(T)|^{2k}.
    Moments(CommonArgs),
    /// Tail curve P(|M(T)| > e^V) with Wilson intervals.
    Tails(CommonArgs),
    /// Maxima of independent copies of |M(T)|.
    Extremes(CommonArgs),
    /// Checkpointed sample paths and almost-sure growth statistics.
    Trajectory(CommonArgs),
    /// Hypercontractive inequality with common random numbers.
    Weissler(CommonArgs),
    /// Parseval identity for random finite Dirichlet series.
    Parseval(CommonArgs),
    /// Replicas of the prime statistic Sigma_T and its normal fit.
    #[command(name = "sigma-t")]
    SigmaT(CommonArgs),
    /// The full small-scale invariant battery.
    #[command(name = "verify-all")]
    VerifyAll(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<String>,
    /// Decimal or 0x-prefixed hexadecimal.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long, visible_alias = "threads")]
    pub parallel_width: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Override any config key, e.g. `--set t_grid=[100,1000]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, CommonArgs) {
        match self {
            Command::Moments(a) => (Experiment::Moments, a),
            Command::Tails(a) => (Experiment::Tails, a),
            Command::Extremes(a) => (Experiment::Extremes, a),
            Command::Trajectory(a) => (Experiment::Trajectory, a),
            Command::Weissler(a) => (Experiment::Weissler, a),
            Command::Parseval(a) => (Experiment::Parseval, a),
            Command::SigmaT(a) => (Experiment::SigmaT, a),
            Command::VerifyAll(a) => (Experiment::VerifyAll, a),
        }
    }
}

/// Reads the config file (TOML, or the `config` object of a manifest) and
/// applies flag overrides.
pub fn merged_config(experiment: Experiment, args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut table = match &args.config {
        None => toml::Table::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            if path.extension().is_some_and(|x| x == "json") {
                let manifest: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| Error::Config(one_line(&e.to_string())))?;
                let cfg = manifest
                    .get("config")
                    .ok_or_else(|| Error::Config("manifest has no config object".into()))?;
                let cfg: ExperimentConfig =
                    serde_json::from_value(cfg.clone()).map_err(|e| Error::Config(one_line(&e.to_string())))?;
                match toml::Value::try_from(&cfg).map_err(|e| Error::Config(one_line(&e.to_string())))? {
                    toml::Value::Table(t) => t,
                    _ => unreachable!("config serialises to a table"),
                }
            } else {
                text.parse::<toml::Table>().map_err(|e| Error::Config(one_line(&e.to_string())))?
            }
        }
    };
    for item in &args.set {
        let parsed = item
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("bad --set {item:?}: {}", one_line(&e.to_string()))))?;
        table.extend(parsed);
    }
    let mut cfg = ExperimentConfig::from_toml_table(table)?;
    if let Some(e) = cfg.experiment {
        if e != experiment {
            return Err(Error::Config(format!("config is for experiment {e}, not {experiment}")));
        }
    }
    cfg.experiment = Some(experiment);
    if let Some(k) = &args.kind {
        cfg.kind = Some(k.parse()?);
    }
    if let Some(s) = &args.seed {
        cfg.seed = Some(Seed::parse(s)?);
    }
    if args.replicas.is_some() {
        cfg.replicas = args.replicas;
    }
    if args.parallel_width.is_some() {
        cfg.parallel_width = args.parallel_width;
    }
    if args.output_dir.is_some() {
        cfg.output_dir.clone_from(&args.output_dir);
    }
    Ok(cfg)
}

fn env_defaults() -> Result<(Option<PathBuf>, Option<usize>)> {
    let dir = std::env::var_os(ENV_OUTPUT_DIR).filter(|v| !v.is_empty()).map(PathBuf::from);
    let threads = match std::env::var(ENV_THREADS) {
        Ok(v) if !v.is_empty() => Some(
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("{ENV_THREADS}={v:?} is not a thread count")))?,
        ),
        _ => None,
    };
    Ok((dir, threads))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    schema: &'static str,
    sampler_scheme: &'static str,
    experiment: Experiment,
    config: &'a ExperimentConfig,
    started_at: String,
    finished_at: String,
    files: &'a [FileRecord],
}

/// Name of the manifest file written into the output directory.
pub const MANIFEST_NAME: &str = "manifest.json";

/// Validates `cfg`, runs the experiment, and writes its artifacts plus the
/// manifest. Nothing is written if validation fails.
pub fn run(cfg: ExperimentConfig) -> Result<PathBuf> {
    let (env_dir, env_threads) = env_defaults()?;
    let cfg = cfg.resolve(env_dir, env_threads)?;
    let started = chrono::Utc::now();
    let mut failures = Vec::new();
    let files = match cfg.experiment() {
        Experiment::Moments => experiments::moments(&cfg)?,
        Experiment::Tails => experiments::tails(&cfg)?,
        Experiment::Extremes => experiments::extremes(&cfg)?,
        Experiment::Trajectory => experiments::trajectory_run(&cfg)?,
        Experiment::Weissler => experiments::weissler(&cfg)?,
        Experiment::Parseval => experiments::parseval(&cfg)?,
        Experiment::SigmaT => experiments::sigma_t(&cfg)?,
        Experiment::VerifyAll => {
            let checks = verify::battery(cfg.seed(), cfg.width())?;
            failures = checks.iter().filter(|c| !c.passed).map(|c| c.check).collect();
            vec![("verify_all.jsonl".to_string(), verify::render(&checks)?)]
        }
    };
    let dir = cfg.output_dir.clone().unwrap_or_default();
    let mut writer = ArtifactWriter::new(&dir)?;
    for (name, body) in &files {
        writer.write(name, body)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema: SCHEMA_VERSION,
        sampler_scheme: SAMPLER_SCHEME,
        experiment: cfg.experiment(),
        config: &cfg,
        started_at: started.to_rfc3339(),
        finished_at: chrono::Utc::now().to_rfc3339(),
        files: writer.records(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invariant(e.to_string()))?;
    output::write_atomic(&dir.join(MANIFEST_NAME), format!("{json}\n").as_bytes())?;
    if !failures.is_empty() {
        return Err(Error::Invariant(format!("failed checks: {}", failures.join(","))));
    }
    Ok(dir)
}

/// Single-line error report.
pub fn error_line(e: &Error) -> String {
    format!("error: kind={} exit={} reason={}", e.kind(), e.exit_code(), one_line(&e.to_string()))
}

/// Parses `args`, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("error: kind=usage exit=2 reason={}", one_line(&e.to_string()));
                return 2;
            }
            print!("{e}");
            return 0;
        }
    };
    let (experiment, args) = cli.command.split();
    match merged_config(experiment, &args).and_then(run) {
        Ok(dir) => {
            println!("wrote {}", dir.join(MANIFEST_NAME).display());
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            e.exit_code()
        }
    }
}
