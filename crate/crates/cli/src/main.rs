use std::path::PathBuf;
use std::process::ExitCode;

use bqclab::config::{load_config, Subcommand};
use bqclab::run::{execute, write_outputs};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Energy,
    Equilibrate,
    GhostForce,
    CriticalStrain,
    ModelingAudit,
    Convergence,
    PatchTest,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Energy => Subcommand::Energy,
            Command::Equilibrate => Subcommand::Equilibrate,
            Command::GhostForce => Subcommand::GhostForce,
            Command::CriticalStrain => Subcommand::CriticalStrain,
            Command::ModelingAudit => Subcommand::ModelingAudit,
            Command::Convergence => Subcommand::Convergence,
            Command::PatchTest => Subcommand::PatchTest,
        }
    }
}

/// Blended quasicontinuum experiments on a periodic chain.
///
/// Set BQCLAB_THREADS to cap sweep concurrency (0 or unset = all cores).
#[derive(Debug, Parser)]
#[command(name = "bqclab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override a configuration key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("BQCLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("BQCLAB_THREADS must be a nonnegative integer, found '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("thread pool: {e}"))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let subcommand = Subcommand::from(args.command);
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: read_config failed: {}: {e}", args.config.display());
            return ExitCode::FAILURE;
        }
    };
    let cfg = match load_config(&text, Some(subcommand), &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: parse_config failed: {}: {e}", args.config.display());
            return ExitCode::FAILURE;
        }
    };
    let out = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {subcommand}: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = write_outputs(&out) {
        eprintln!("error: {subcommand}: {e}");
        return ExitCode::FAILURE;
    }
    for line in &out.summary {
        println!("{line}");
    }
    match out.failure {
        Some(e) => {
            eprintln!("error: {subcommand}: {e}");
            ExitCode::FAILURE
        }
        None => ExitCode::SUCCESS,
    }
}
