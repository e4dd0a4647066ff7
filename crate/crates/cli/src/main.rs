use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onsager_cli::{
    cmd_converge, cmd_estimate_gate, cmd_kernel_eval, cmd_sample, cmd_verify_all, exit, CliResult, ConfigDocument,
};

/// Thermodynamic fluctuation theory and its quantum-mechanical dictionary:
/// verification, sampling and convergence studies.
///
/// Exit status: 0 success, 1 verification failure, 2 usage or configuration error.
#[derive(Debug, Parser)]
#[command(name = "onsager", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration document; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every correspondence identity and process invariant.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured seed.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Replaces every configured tolerance.
        #[arg(long, value_name = "X")]
        tol: Option<f64>,
    },
    /// Sample a path ensemble as CSV (path_id, time, value).
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Time-slicing convergence table as CSV.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a propagator or transition density on a list of points.
    KernelEval {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of a cumulative gate probability.
    EstimateGate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> CliResult<u8> {
    let load = |c: &Common| ConfigDocument::load(c.config.as_deref());
    match cli.command {
        Command::VerifyAll { common, seed, tol } => {
            let doc = load(&common)?;
            let passed = cmd_verify_all(doc.verify_all, seed, tol, common.out.as_deref())?;
            return Ok(if passed { exit::SUCCESS } else { exit::VERIFICATION_FAILED });
        }
        Command::Sample { common, seed } => cmd_sample(load(&common)?.sample, seed, common.out.as_deref())?,
        Command::Converge { common } => cmd_converge(load(&common)?.converge, common.out.as_deref())?,
        Command::KernelEval { common } => cmd_kernel_eval(load(&common)?.kernel_eval, common.out.as_deref())?,
        Command::EstimateGate { common, seed } => {
            cmd_estimate_gate(load(&common)?.estimate_gate, seed, common.out.as_deref())?
        }
    }
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("onsager: {e}");
            ExitCode::from(exit::USAGE)
        }
    }
}
