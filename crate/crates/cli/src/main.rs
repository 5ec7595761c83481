//! `ehrhart-lab`: seeded experiments over exact Ehrhart data.
//!
//! Exit codes: 0 when the run succeeds, 1 on errors, and — only under
//! `--check` — 2 when the run succeeded but a reported claim failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehrhart_lab::experiments::{self, dimension, gorenstein, markov, quasiperiod, volume};
use ehrhart_lab::RunConfig;

#[derive(Parser)]
#[command(
    name = "ehrhart-lab",
    about = "Exact Ehrhart data for rational polytopes, and experiments on it",
    version
)]
struct Cli {
    /// Master seed for dataset generation, splits, and training.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Highest dilation index kept as a feature (default depends on the
    /// subcommand).
    #[arg(long, global = true)]
    terms: Option<usize>,

    /// Directory for reports, datasets, and plot CSVs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Extra key=value setting, repeatable (e.g. --config per_class=50).
    #[arg(long = "config", global = true, value_name = "KEY=VALUE")]
    config: Vec<String>,

    /// Enforce the report's claims: exit 2 if any fails.  Sizes are not
    /// affected; shrink runs with --config (per_class=..., draws=...).
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset CSV (see --config kind/dims/rho/per_class).
    Generate,
    /// Classify ambient dimension from dilation counts.
    Dimension,
    /// Regress normalized volume from dilation counts.
    Volume,
    /// Classify the quasi-period of rational polytopes.
    Quasiperiod,
    /// Probe whether polar counts determine the Gorenstein index.
    Gorenstein,
    /// Verify the Markov-triple collapse exactly.
    Markov,
    /// Analyze one polytope from a vertex file (one vertex per line,
    /// whitespace-separated rational coordinates like `1/2`).
    Ehrhart { vertex_file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut cfg = RunConfig::new(cli.seed, cli.out);
    cfg.terms = cli.terms;
    cfg.check = cli.check;
    cfg.overrides = RunConfig::parse_overrides(&cli.config)?;
    std::fs::create_dir_all(&cfg.out)?;

    let report = match cli.command {
        Command::Generate => experiments::run_generate(&cfg)?,
        Command::Dimension => {
            let dataset = experiments::lattice_dataset(&cfg)?;
            dimension::run(&cfg, &dataset)?
        }
        Command::Volume => {
            let dataset = experiments::lattice_dataset(&cfg)?;
            volume::run(&cfg, &dataset)?
        }
        Command::Quasiperiod => quasiperiod::run(&cfg)?,
        Command::Gorenstein => gorenstein::run(&cfg)?,
        Command::Markov => markov::run(&cfg)?,
        Command::Ehrhart { vertex_file } => {
            let doc = ehrhart_lab::analyze::analyze_vertex_file(&vertex_file, cfg.terms)?;
            println!("{}", serde_json::to_string_pretty(&doc)?);
            return Ok(true);
        }
    };
    let path = report.write(&cfg.out)?;
    println!("{} (report: {})", report.summary_line(), path.display());
    Ok(report.passed || !cfg.check)
}
