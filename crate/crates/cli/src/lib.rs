//! `depsel` command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 for
//! numeric or runtime failures. `DEPSEL_THREADS` caps the worker pool.

pub mod bench;
pub mod commands;
pub mod config;
mod output;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use commands::{cmd_featurize, cmd_ingest, cmd_inspect, cmd_run, cmd_select, cmd_stat};
pub use config::{Options, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<depsel::Error> for CliError {
    fn from(e: depsel::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "depsel",
    version,
    about = "Review classification with dependence-driven feature selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preprocess, collapse and rebalance a review CSV into corpus.json
    Ingest,
    /// Write bag-of-words, TF-IDF and word-vector feature CSVs
    Featurize,
    /// Reduce a feature CSV with greedy RDC, greedy MMD and PCA
    Select,
    /// Cross-validate every featurizer/reducer/classifier combination
    Run,
    /// Per-comment agreement table for documents of a finished run
    Inspect {
        /// Document ids to show
        ids: Vec<usize>,
    },
    /// Corpus and word-vector coverage statistics
    Stat,
    /// Prediction latency with and without reduction, and RDC scaling
    Bench,
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.options)?;
    match &cli.command {
        Command::Ingest => {
            let s = cmd_ingest(&cfg)?;
            println!(
                "read {} rows, {} left after preprocessing, {} after rebalancing",
                s.rows_read,
                s.after_preprocessing,
                s.categories_after_rebalance.values().sum::<usize>()
            );
            for (c, n) in &s.categories_after_rebalance {
                println!("  {c}: {n}");
            }
        }
        Command::Featurize => print_json(&cmd_featurize(&cfg)?)?,
        Command::Select => print_json(&cmd_select(&cfg)?)?,
        Command::Run => {
            let report = cmd_run(&cfg)?;
            print!("{}", depsel::evaluate::markdown_table(&report));
            println!("artifacts written to {}", cfg.out.display());
        }
        Command::Inspect { ids } => print!("{}", cmd_inspect(&cfg, ids)?),
        Command::Stat => print_json(&cmd_stat(&cfg)?)?,
        Command::Bench => {
            let latency = bench::latency_benchmark(
                cfg.seed,
                300,
                cfg.target_dim,
                600,
                1000,
                depsel::evaluate::Reducer::GreedyRdc,
                5,
            )?;
            let rdc_scaling = bench::rdc_scaling(cfg.seed, &[2000, 4000, 8000, 16000], 5)?;
            let report = bench::BenchReport { latency, rdc_scaling };
            output::write_json(&cfg.out.join("bench.json"), &report)?;
            print_json(&report)?;
        }
    }
    Ok(())
}

/// Apply `DEPSEL_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DEPSEL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Input(format!("DEPSEL_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot size the worker pool: {e}")))
}

/// Parse arguments, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    if let Err(e) = configure_threads().and_then(|_| execute(&cli)) {
        eprintln!("depsel: error: {e}");
        return e.exit_code();
    }
    0
}
