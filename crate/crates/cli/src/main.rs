//! `pcapass` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{parse_config_text, ConfigError, RawConfig, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pcapass",
    version,
    about = "PCA-compressed neighborhood aggregation for node classification"
)]
struct Cli {
    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides `threads`.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Overrides `out`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides any config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Generate a synthetic stochastic-block-model dataset into OUT.
    Gen,
    /// Embed the dataset; writes embeddings.csv, embeddings.bin and per-hop PCA models.
    Embed,
    /// Train the classifier; writes model.pgbm, model.txt and metrics.json.
    Train,
    /// Score a trained model on every split; writes eval_metrics.json.
    Eval,
    /// Over-smoothing sweep; writes sweep.csv and sweep_summary.json.
    Sweep,
    /// Random hyperparameter search; writes hpo.csv and hpo_summary.json.
    Hpo,
}

pub enum CliError {
    Config(String),
    Core(pcapass::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<pcapass::Error> for CliError {
    fn from(e: pcapass::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind_and_code(&self) -> (&'static str, u8) {
        match self {
            CliError::Config(_) => ("config", EXIT_CONFIG),
            CliError::Core(pcapass::Error::InvalidParameter(_)) => ("config", EXIT_CONFIG),
            CliError::Core(e) if e.is_data_error() => ("data", EXIT_DATA),
            CliError::Core(_) => ("runtime", EXIT_RUNTIME),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_config_text(&text, path)? {
            raw.set(&k, &v)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        raw.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    if let Some(threads) = cli.threads {
        raw.set("threads", &threads.to_string())?;
    }
    if let Some(out) = &cli.out {
        let s = out
            .to_str()
            .ok_or_else(|| ConfigError("--out must be valid UTF-8".into()))?;
        raw.set("out", s)?;
    }
    Ok(RunConfig::from_raw(&raw)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::Gen => commands::gen(&cfg),
        Command::Embed => commands::embed(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Eval => commands::eval(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Hpo => commands::hpo(&cfg),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(config::keys_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = e.kind_and_code();
            let msg = e.message().replace(['\n', '\r'], " ");
            eprintln!("error[{kind}]: {msg}");
            ExitCode::from(code)
        }
    }
}
