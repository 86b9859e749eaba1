//! Command-line entry point: exact certificates, evolution runs, the
//! exact-vs-discrete crosscheck and the full selftest.

mod config;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{parse_config, Mode, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "ehrenfest",
    version,
    about = "Expectation-value dynamics workbench: exact rational certificates for a hermitean observable that blows up along a unitary orbit, and spectral-grid verification of d/dt⟨A⟩ = i⟨[H,A]⟩ for self-adjoint observables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario configuration file (key = value); defaults apply if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "ehrenfest-out")]
    out: PathBuf,
    /// Seed for randomized test-vector generation (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output; errors still go to stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the exact bump system and emit its zero-tolerance certificate.
    Counterexample,
    /// Evolve a wavepacket and verify the expectation identity.
    Evolve,
    /// Compare discrete expectations of the exact observable against the
    /// rational values.
    Crosscheck,
    /// Run the full acceptance suite.
    Selftest,
}

#[derive(Serialize)]
struct SelftestSummary {
    tool_version: String,
    seed: u64,
    criteria: Vec<SelftestCriterion>,
    passed: bool,
}

#[derive(Serialize)]
struct SelftestCriterion {
    id: u32,
    name: String,
    passed: bool,
    seconds: f64,
    details: String,
}

fn load_config(cli: &Cli, mode: Mode) -> anyhow::Result<ScenarioConfig> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => String::new(),
    };
    let mut config = match parse_config(&text, mode) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            anyhow::bail!("{} configuration error(s)", errors.len());
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run_mode(cli: &Cli, mode: Mode) -> anyhow::Result<bool> {
    let config = load_config(cli, mode)?;
    let manifest = run::run(&config, &cli.out, cli.quiet)?;
    if !manifest.passed {
        for check in manifest.checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {} — {}", check.name, check.details);
        }
    }
    Ok(manifest.passed)
}

fn run_selftest(cli: &Cli) -> anyhow::Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    let reports = ehrenfest_core::acceptance::run_all(seed);
    for report in &reports {
        println!("{}", report.line());
    }
    let passed = reports.iter().all(|r| r.passed);
    std::fs::create_dir_all(&cli.out)?;
    let summary = SelftestSummary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        criteria: reports
            .iter()
            .map(|r| SelftestCriterion {
                id: r.id,
                name: r.name.to_string(),
                passed: r.passed,
                seconds: r.seconds,
                details: r.details.clone(),
            })
            .collect(),
        passed,
    };
    let path = cli.out.join("selftest.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    if !cli.quiet {
        println!(
            "selftest: {} — summary at {}",
            if passed {
                "all criteria passed"
            } else {
                "CRITERIA FAILED"
            },
            path.display()
        );
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Counterexample => run_mode(&cli, Mode::Counterexample),
        Command::Evolve => run_mode(&cli, Mode::Evolve),
        Command::Crosscheck => run_mode(&cli, Mode::Crosscheck),
        Command::Selftest => run_selftest(&cli),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
