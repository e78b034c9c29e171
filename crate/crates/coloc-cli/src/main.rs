use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use coloc_cli::args::{Cli, Command};
use coloc_cli::commands;
use coloc_cli::error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    if cli.threads > 0 {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(args) => {
            let rendered = commands::run_analyze(args)?;
            emit(args.out.as_deref(), &rendered)
        }
        Command::NullDist(args) => {
            let rendered = commands::run_null_dist(args)?;
            emit(args.out.as_deref(), &rendered)
        }
        Command::Power(args) => {
            let rendered = commands::run_power(args)?;
            emit(args.out.as_deref(), &rendered)
        }
        Command::Simulate(args) => {
            commands::run_simulate(args)?;
            Ok(())
        }
    }
}

fn emit(out: Option<&Path>, rendered: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{rendered}");
            Ok(())
        }
    }
}
