//! `signphon`: command-line front end.
//!
//! Exit status is 0 on success, 1 when the run found violations (or had
//! nothing usable to fit), and 2 when inputs could not be read or were out of
//! range. Results go to standard output; diagnostics to standard error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{GlobalArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] signphon::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a command concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Findings,
}

#[derive(Debug, Parser)]
#[command(name = "signphon", version, about = "Handshape statistics, well-formedness checks and re-ranking for ASL glosses")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every lexicon entry against the two-hand conditions; corpora given are parsed too.
    Validate,
    /// Count start/end handshape pairs on the dominant hand of the corpora.
    Fit {
        /// Where to write the statistics file; standard output when absent.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Frequency chart of a statistics file.
    Report,
    /// Scan corpora for handshape coarticulation.
    Coartic {
        /// Also list every coarticulated token.
        #[arg(long)]
        records: bool,
    },
    /// Interpret each hand-activity segment as one- or two-handed.
    Disambiguate,
    /// Simulate noisy recognizer output and compare accuracy with and without the prior.
    RerankSim {
        /// Number of synthetic samples.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Also save the synthetic dataset (JSON Lines).
        #[arg(long)]
        dataset_out: Option<std::path::PathBuf>,
    },
    /// Score a saved dataset with the prior at the configured lambda.
    Evaluate {
        #[arg(long)]
        dataset: std::path::PathBuf,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::resolve(cli.global)?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Validate => commands::validate(&cfg, &mut out),
        Command::Fit { out: path } => commands::fit(&cfg, path.as_deref(), &mut out),
        Command::Report => commands::report(&cfg, &mut out),
        Command::Coartic { records } => commands::coartic(&cfg, records, &mut out),
        Command::Disambiguate => commands::disambiguate(&cfg, &mut out),
        Command::RerankSim { n, dataset_out } => commands::rerank_sim(&cfg, n, dataset_out.as_deref(), &mut out),
        Command::Evaluate { dataset } => commands::evaluate(&cfg, &dataset, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Findings) => ExitCode::from(1),
        Err(e) => {
            eprintln!("signphon: {e}");
            ExitCode::from(2)
        }
    }
}
