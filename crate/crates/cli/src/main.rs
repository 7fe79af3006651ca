use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use su11_cli::config::parse_cc;
use su11_cli::{run, ExperimentConfig, Mode, Source};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Verify,
    Ratio,
    Ledger,
    Search,
    Sweep,
    Probe,
}

/// Discrete SU(1,1) nonlinear Fourier transform: identity checks,
/// Hausdorff-Young ratios, proof ledgers and extremizer searches.
///
/// Exit status: 0 when every check holds, 2 when an inequality failed
/// (counterexample.json is written), 1 on usage or input errors.
#[derive(Debug, Parser)]
#[command(name = "su11", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// `c,gamma,eta`.
    #[arg(long)]
    cc: Option<String>,
    #[arg(long = "l1-cap")]
    l1_cap: Option<f64>,
    /// Sequence file (`.json` or plain text).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mode = match cli.command {
        Command::Verify => Mode::Verify,
        Command::Ratio => Mode::Ratio,
        Command::Ledger => Mode::Ledger,
        Command::Search => Mode::Search,
        Command::Sweep => Mode::Sweep,
        Command::Probe => Mode::Probe,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(mode, &text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::defaults(mode),
    };
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.rel_tol {
        cfg.quadrature.rel_tol = tol;
    }
    if let Some(cc) = &cli.cc {
        cfg.cc = parse_cc(cc)?;
    }
    if let Some(cap) = cli.l1_cap {
        cfg.search.l1_cap = cap;
    }
    if let Some(input) = &cli.input {
        cfg.source = Some(Source::File(input.clone()));
    }
    if let Some(output) = &cli.output {
        cfg.output = output.clone();
    }
    cfg.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = build_config(&cli).and_then(|cfg| run(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
