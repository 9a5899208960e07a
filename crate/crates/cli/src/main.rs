use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinfac::{Execution, DEFAULT_TOLERANCE};
use spinfac_cli::{cmd_fuzz, cmd_verify, exit_code, CliError, ERROR_EXIT};

#[derive(Parser)]
#[command(
    name = "spinfac",
    version,
    about = "Check Dirac operator factorization identities on submersion frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one frame: a catalog name (hopf, heisenberg, warped, flat_torus:<n_v>,<n_h>) or a JSON file.
    Verify {
        target: String,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the identity suite on random frames and report the worst residual per identity.
    Fuzz {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Evaluate cases on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, json) = match cli.command {
        Command::Verify {
            target,
            tolerance,
            json,
        } => (cmd_verify(&target, tolerance), json),
        Command::Fuzz {
            count,
            seed,
            tolerance,
            json,
            sequential,
        } => {
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::default()
            };
            (cmd_fuzz(count, seed, tolerance, exec), json)
        }
    };
    match result {
        Ok(report) => {
            println!("{report}");
            if let Some(path) = json {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(ERROR_EXIT as u8);
                }
            }
            ExitCode::from(exit_code(&report) as u8)
        }
        Err(e) => {
            let prefix = if matches!(e, CliError::Usage(_)) {
                "usage error"
            } else {
                "error"
            };
            for (n, line) in e.details().into_iter().enumerate() {
                if n == 0 {
                    eprintln!("{prefix}: {line}");
                } else {
                    eprintln!("{line}");
                }
            }
            ExitCode::from(ERROR_EXIT as u8)
        }
    }
}
