use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod run;
mod socket;

use run::RunArgs;

#[derive(Parser)]
#[command(name = "nopsys", version, about = "Run the simulated multinode machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boot a system from a configuration file and attach the console.
    Run {
        config: PathBuf,
        /// Feed the lines of this file to the console, then end the input.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Print the event trace to standard error.
        #[arg(long)]
        trace: bool,
        /// Stop with an error after this many engine steps.
        #[arg(long, value_name = "N")]
        max_ticks: Option<u64>,
        /// Accept a socket link peer on this address (repeatable).
        #[arg(long, value_name = "ADDR")]
        listen: Vec<String>,
        /// Connect a socket link to this address (repeatable).
        #[arg(long, value_name = "ADDR")]
        connect: Vec<String>,
        /// Print processor numbers, step count and trace hash to standard error.
        #[arg(long)]
        summary: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Run { config, script, trace, max_ticks, listen, connect, summary } = Cli::parse().command;
    let args = RunArgs { config, script, trace, max_ticks, listen, connect, summary };
    match run::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nopsys: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
