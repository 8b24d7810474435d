use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use argmin_lab::{run, Command, Invocation};
use clap::Parser;

/// Convex M-estimation lab.
///
/// Exit codes: 0 ok, 2 input error, 3 estimation error, 4 too many failed
/// replications, 5 property violation.
#[derive(Debug, Parser)]
#[command(name = "argmin-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment description (JSON).
    config: PathBuf,
    /// Report path; overrides the config's `output`. Without either the
    /// report goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = Invocation {
        command: cli.command,
        config: cli.config,
        output: cli.output,
        seed: cli.seed,
    };
    match run(&inv) {
        Ok(done) => {
            if done.written.is_none() {
                let _ = std::io::stdout().write_all(&done.bytes);
            }
            if done.exit_code != 0 {
                eprintln!("error: property violations found");
            }
            ExitCode::from(done.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
