//! `levyheat` command-line front end.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "levyheat", version, about = "Stable heat kernels, Lévy noise tails, Monte Carlo checks and growth tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every integrability condition of a model
    Validate(commands::ValidateArgs),
    /// Sample a tail functional on a grid of levels
    Tails(commands::TailsArgs),
    /// Monte Carlo exceedance frequencies of a functional
    McTail(commands::McTailArgs),
    /// Suprema of one realized field over growing balls
    SupGrowth(commands::SupGrowthArgs),
    /// Integral-test verdicts for a test function f
    Classify(commands::ClassifyArgs),
    /// Aggregate run manifests into one summary
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Tails(a) => commands::tails(a),
        Command::McTail(a) => commands::mc_tail(a),
        Command::SupGrowth(a) => commands::sup_growth(a),
        Command::Classify(a) => commands::classify(a),
        Command::Report(a) => commands::report(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("levyheat: {e}");
            if let levyheat::Error::Refused { reports, .. } = &e {
                if let Ok(s) = serde_json::to_string_pretty(reports) {
                    eprintln!("{s}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
