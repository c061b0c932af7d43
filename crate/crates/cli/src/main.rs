//! `lesion-harness`: batch front-end for phantom cohorts, lesion extraction,
//! label concordance, prediction evaluation and intensity standardization.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod args;
mod cmd;
mod config;
mod run;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::GlobalArgs;

#[derive(Debug, Parser)]
#[command(name = "lesion-harness", version, about = "Volumetric label processing and lesion-level evaluation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded phantom cohort.
    Phantom(cmd::phantom::Args),
    /// Extract graded lesions from one label source of every patient.
    Lesions(cmd::lesions::Args),
    /// Partition each prostate mask into sextants.
    Sextants(cmd::sextants::Args),
    /// Dice and lesion ROC-AUC of label sources against a reference source.
    Concordance(cmd::concordance::Args),
    /// Score probability predictions against truth label sources.
    Evaluate(cmd::evaluate::Args),
    /// Derive pathologist/radiologist labels and simulated predictions.
    Simulate(cmd::simulate::Args),
    /// Fit and apply landmark standardization and z-scores.
    Standardize(cmd::standardize::Args),
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let (cli, echo) = match config::parse_with_config::<Cli>(raw) {
        Ok(parsed) => parsed,
        Err(config::ParseFailure::Clap(e)) => {
            // --help and --version exit 0, usage errors 2
            e.exit();
        }
        Err(config::ParseFailure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let ctx = match run::Context::new(&cli.global, echo) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Phantom(a) => cmd::phantom::run(&ctx, a),
        Command::Lesions(a) => cmd::lesions::run(&ctx, a),
        Command::Sextants(a) => cmd::sextants::run(&ctx, a),
        Command::Concordance(a) => cmd::concordance::run(&ctx, a),
        Command::Evaluate(a) => cmd::evaluate::run(&ctx, a),
        Command::Simulate(a) => cmd::simulate::run(&ctx, a),
        Command::Standardize(a) => cmd::standardize::run(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lesion_harness::lesions::LesionParams;
    use lesion_harness::synth::{DegradationSpec, PhantomSpec};

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from([&["lesion-harness"], args].concat()).unwrap().command
    }

    #[test]
    fn flag_defaults_match_library_defaults() {
        let Command::Phantom(a) = parse(&["phantom", "--out", "x"]) else { unreachable!() };
        assert_eq!(a.spec().unwrap(), PhantomSpec::default());
        assert_eq!(a.lesion.params().unwrap(), LesionParams::default());
        let Command::Simulate(a) = parse(&["simulate", "--cohort", "x"]) else { unreachable!() };
        assert_eq!(a.spec().unwrap(), DegradationSpec::default());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
