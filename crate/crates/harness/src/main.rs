use std::path::PathBuf;
use std::process::ExitCode;

use adaptfuse_harness::{ablation_csv, load_records, run_suite, schedule_csv, summary_csv, write_artifacts};
use adaptfuse_harness::{Backend, RunSummary, SuiteConfig};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "adaptfuse",
    version,
    about = "Run and summarize preference-learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (variant, seed) pair in a suite config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Comma-separated seeds; overrides the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Chat-completions base URL for the http backend.
        #[arg(long)]
        base_url: Option<String>,
    },
    /// Print a CSV table built from a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Table::Rounds)]
        table: Table,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Synthetic,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Rounds,
    Ablation,
    Schedule,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            backend,
            base_url,
        } => {
            let mut cfg = SuiteConfig::from_path(&config)?;
            if let Some(seeds) = seeds {
                cfg.seeds = Some(seeds);
                cfg.seed_count = None;
            }
            if let Some(b) = backend {
                cfg.backend = match b {
                    BackendArg::Synthetic => Backend::Synthetic,
                    BackendArg::Http => Backend::Http,
                };
            }
            if let Some(url) = base_url {
                cfg.http.base_url = url;
            }
            let result = run_suite(&cfg)?;
            let summary =
                write_artifacts(&result, &out).with_context(|| format!("writing results to {}", out.display()))?;
            eprintln!(
                "{} episodes written; summary at {}",
                result.records.len(),
                summary.display()
            );
        }
        Command::Report { input, table } => {
            let records = load_records(&input)?;
            let csv = match table {
                Table::Rounds => summary_csv(&RunSummary::from_records(&records))?,
                Table::Ablation => ablation_csv(&records)?,
                Table::Schedule => schedule_csv(&records)?,
            };
            print!("{csv}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
