mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;

use args::{Cli, Command};
use error::CliResult;

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Extract { pcap, labels, out } => commands::extract(&pcap, labels.as_deref(), &out),
        Command::Run(args) => commands::run(&args),
        Command::Train { input, labels, model, epochs, out } => {
            commands::train(&input, labels.as_deref(), &model, epochs, &out)
        }
        Command::Rank { checkpoint, top_k, format } => commands::rank(&checkpoint, top_k, format),
        Command::Compare { csv, k, methods, train_frac, bins, seed, out } => {
            commands::compare_cmd(&csv, k, &methods, train_frac, bins, seed, out.as_deref())
        }
        Command::SynthGenerate(args) => commands::synth_generate(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("STREAMRANK_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not failures.
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
