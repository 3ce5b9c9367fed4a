use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kfield::cli::{run, RunOptions};

#[derive(Parser)]
#[command(name = "kfield", version, about = "Geodesic k-fields and Newton's law for parameterized submanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write report.txt and CSV artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory (created when missing).
        #[arg(long)]
        out: PathBuf,
        /// Replace existing output files.
        #[arg(long)]
        overwrite: bool,
        /// Seed for randomized check points (overrides the scenario).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Command::Run { scenario, out, overwrite, seed } = cli.command;
    match run(&RunOptions { scenario, out, overwrite, seed }) {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
