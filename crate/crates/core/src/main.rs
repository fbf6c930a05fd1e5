use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use heatcov::mission::{run_mission, Algorithm, MissionConfig, RunSummary};
use heatcov::{output, scenario};

/// Multi-agent coverage missions driven by heat-field gradients.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm (or all three) and write the configured outputs.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        #[arg(long)]
        config: String,
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        /// Output directory (overrides the scenario's).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all three algorithms and write `compare.csv`.
    Compare {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        config: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    #[value(name = "1")]
    One,
    #[value(name = "3")]
    Three,
    #[value(name = "central")]
    Central,
    #[value(name = "all")]
    All,
}

fn algorithms(arg: Option<AlgoArg>, cfg: &MissionConfig) -> Vec<Algorithm> {
    match arg {
        None => vec![cfg.mission.algorithm],
        Some(AlgoArg::One) => vec![Algorithm::Algo1],
        Some(AlgoArg::Three) => vec![Algorithm::Algo3],
        Some(AlgoArg::Central) => vec![Algorithm::Centralized],
        Some(AlgoArg::All) => Algorithm::ALL.to_vec(),
    }
}

fn run_all(cfg: &MissionConfig, algos: &[Algorithm], out: &Path) -> heatcov::Result<Vec<RunSummary>> {
    let mut runs = Vec::new();
    for &algo in algos {
        let mut cfg = cfg.clone();
        cfg.mission.algorithm = algo;
        let summary = run_mission(&cfg)?;
        output::write_run(&summary, &cfg.output, out)?;
        println!("{}", output::summary_line(&summary));
        runs.push(summary);
    }
    Ok(runs)
}

fn exit_for(runs: &[RunSummary]) -> ExitCode {
    if runs.iter().all(|r| r.completed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => scenario::load(&config).map(|cfg| {
            println!("ok: {} agents, spacing {}", cfg.num_agents(), cfg.region.spacing);
            ExitCode::SUCCESS
        }),
        Command::Run { config, algo, out } => scenario::load(&config).and_then(|cfg| {
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
            run_all(&cfg, &algorithms(algo, &cfg), &out).map(|runs| exit_for(&runs))
        }),
        Command::Compare { config, out } => scenario::load(&config).and_then(|cfg| {
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
            let runs = run_all(&cfg, &Algorithm::ALL, &out)?;
            output::write_compare(&runs, &out.join("compare.csv"))?;
            Ok(exit_for(&runs))
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
