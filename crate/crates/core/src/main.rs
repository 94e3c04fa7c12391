use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evopp::io::{run, Command, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "evopp", version, about = "Simulate, fit and compare evolutionary point processes")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a point pattern by thinning
    Simulate(Args),
    /// Fit one model by adaptive MCMC
    Fit(Args),
    /// Fit several models and compare them on shared windows
    Compare(Args),
    /// Run a replicate simulation study
    Study(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for studies (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Study(a) => (Command::Study, a),
    };
    let opts = RunOptions {
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    let result = ExperimentConfig::load(&args.config).and_then(|cfg| run(command, &cfg, &opts));
    match result {
        Ok(summary) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("evopp {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
