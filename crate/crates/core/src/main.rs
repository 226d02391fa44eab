use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kwidth::cli::{run, RunOptions};

#[derive(Parser)]
#[command(name = "kwidth", version, about = "Entropy numbers and Kolmogorov widths with certified brackets")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        quiet: bool,
        /// Record per-granule wall-clock times in results.csv.
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Run { config, out, seed, jobs, quiet, timings } = args.command;
    let opts = RunOptions { out, seed, jobs, quiet, timings };
    match run(&config, &opts) {
        Ok(summary) => ExitCode::from(summary.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
