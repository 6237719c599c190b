//! `nci` — sweeps of quantized-pairing experiments over parameter grids and
//! disorder realizations.
//!
//! Usage:
//!   nci <experiment> --config <path> [--threads K] [--resume]
//!   nci validate --config <path>
//!
//! Exit codes: 0 success, 1 configuration error, 2 partial task failures.

mod config;
mod experiments;
mod record;
mod sweep;

use clap::{Arg, ArgAction, Command};
use config::{validate_config_file, Experiment, EXPERIMENT_NAMES};
use std::path::PathBuf;
use std::process::ExitCode;

fn experiment_subcommand(name: &'static str) -> Command {
    Command::new(name)
        .about(format!("run the {name} experiment from a config file"))
        .arg(
            Arg::new("config")
                .long("config")
                .required(true)
                .value_parser(clap::value_parser!(PathBuf)),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .value_parser(clap::value_parser!(usize)),
        )
        .arg(Arg::new("resume").long("resume").action(ArgAction::SetTrue))
}

fn main() -> ExitCode {
    let mut cmd = Command::new("nci")
        .about("quantized cyclic-cocycle pairings on Delone patterns")
        .subcommand_required(true)
        .subcommand(
            Command::new("validate").about("validate a sweep config").arg(
                Arg::new("config")
                    .long("config")
                    .required(true)
                    .value_parser(clap::value_parser!(PathBuf)),
            ),
        );
    for (name, _) in EXPERIMENT_NAMES {
        cmd = cmd.subcommand(experiment_subcommand(name));
    }
    let matches = cmd.get_matches();

    let (sub, sub_matches) = matches.subcommand().expect("subcommand required");
    let config_path = sub_matches.get_one::<PathBuf>("config").expect("--config");

    let config = match validate_config_file(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    if sub == "validate" {
        println!(
            "ok: {} with {} grid point(s) x {} seed(s)",
            config.experiment.name(),
            config.grid_points().len(),
            config.seeds.len()
        );
        return ExitCode::SUCCESS;
    }

    let requested = Experiment::parse(sub).expect("subcommand names match experiments");
    if requested != config.experiment {
        eprintln!(
            "config declares experiment `{}` but the `{}` subcommand was invoked",
            config.experiment.name(),
            sub
        );
        return ExitCode::from(1);
    }

    let threads = sub_matches
        .get_one::<usize>("threads")
        .copied()
        .or_else(|| std::env::var("NCI_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0); // 0 = rayon default
    let resume = sub_matches.get_flag("resume");

    match sweep::run_sweep(&config, threads, resume) {
        Ok(report) => {
            eprintln!(
                "{}: {} task(s) executed, {} skipped (resume), {} failed; records at {}, summary at {}",
                config.experiment.name(),
                report.executed,
                report.skipped,
                report.failures,
                config.output.display(),
                report.summary_path.display()
            );
            if report.failures > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("sweep failed: {e}");
            ExitCode::from(2)
        }
    }
}
