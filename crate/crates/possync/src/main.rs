use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use possync::commands::{cmd_bounds, cmd_check, cmd_simulate, cmd_simulate_batch, cmd_solve};
use possync::scenario::{GraphSpec, LoadedScenario};

/// Certify and simulate linear-regulator synchronization of positive multi-agent systems.
///
/// Exit status: 0 when every verdict holds, 1 when a verdict fails, 2 on errors.
#[derive(Debug, Parser)]
#[command(name = "possync", version)]
struct Cli {
    /// Scenario file, or a preset name (paper-d5, paper-d7).
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Overrides the graph and initial-condition seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to the scenario's `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the protocol hypotheses.
    Check,
    /// Solve the regulator LP and write solution.json.
    Solve,
    /// Certify every Laplacian mode, simulate, and write trajectory.csv, metrics.json and summary.json.
    Simulate {
        /// Run k seeded repetitions (seeds s, s+1, ...) concurrently.
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Report Laplacian spectral bounds of a graph.
    Bounds {
        /// Edge-list file or inline spec such as `random_regular:n=150,d=5,seed=1`.
        #[arg(long)]
        graph: Option<String>,
        /// Lower end of the eigenvalue family; with --gamma, checks beta <= lambda_2 and lambda_N <= gamma
        #[arg(long, requires = "gamma")]
        beta: Option<f64>,
        /// Upper end of the eigenvalue family
        #[arg(long, requires = "beta")]
        gamma: Option<f64>,
    },
}

fn load(cli: &Cli) -> Result<LoadedScenario> {
    let Some(name) = &cli.scenario else {
        bail!("--scenario is required for this command")
    };
    let mut loaded = LoadedScenario::load(name)?;
    if let Some(seed) = cli.seed {
        loaded.scenario = loaded.scenario.with_seed(seed);
    }
    Ok(loaded)
}

fn out_dir(cli: &Cli, loaded: &LoadedScenario) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| loaded.scenario.outputs.dir.clone())
}

fn run(cli: &Cli) -> Result<bool> {
    let mut stdout = io::stdout().lock();
    match &cli.command {
        Command::Check => Ok(cmd_check(&load(cli)?, &mut stdout)?.all_hold()),
        Command::Solve => {
            let loaded = load(cli)?;
            cmd_solve(&loaded, &out_dir(cli, &loaded), &mut stdout)?;
            Ok(true)
        }
        Command::Simulate { batch: None } => {
            let loaded = load(cli)?;
            Ok(cmd_simulate(&loaded, &out_dir(cli, &loaded), &mut stdout)?
                .verdicts
                .all_hold())
        }
        Command::Simulate { batch: Some(k) } => {
            let loaded = load(cli)?;
            let base = cli
                .seed
                .or(loaded.scenario.graph.seed())
                .or(loaded.scenario.init_seed())
                .unwrap_or(0);
            Ok(
                cmd_simulate_batch(&loaded, &out_dir(cli, &loaded), base, *k, &mut stdout)?
                    .all_hold(),
            )
        }
        Command::Bounds { graph, beta, gamma } => {
            let g = match graph {
                Some(spec) if std::path::Path::new(spec).exists() => {
                    GraphSpec::File { path: spec.into() }.build(std::path::Path::new(""))?
                }
                Some(spec) => GraphSpec::parse_inline(spec)?.build(std::path::Path::new(""))?,
                None => load(cli)?.graph()?,
            };
            let family = beta.zip(*gamma);
            let report = cmd_bounds(&g, family, &mut stdout)?;
            Ok(report.in_family.unwrap_or(true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
