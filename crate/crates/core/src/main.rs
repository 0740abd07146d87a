use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use lifelong_irl::experiment::config::{BOOLEAN_KEYS, KEYS};
use lifelong_irl::experiment::{emit_plot_data, run_experiment, ExperimentConfig};
use lifelong_irl::Result;

fn cli() -> Command {
    let mut run = Command::new("run")
        .about("Train MaxEnt and the lifelong learner over task streams and evaluate at checkpoints")
        .arg(Arg::new("config").long("config").value_name("PATH").help("key = value config file"));
    for (key, help) in KEYS {
        let mut arg = Arg::new(*key).long(*key).help(*help).value_name("VALUE").action(ArgAction::Set);
        if BOOLEAN_KEYS.contains(key) {
            arg = arg.num_args(0..=1).default_missing_value("true");
        }
        run = run.arg(arg);
    }
    let plot = Command::new("plot-data")
        .about("Aggregate metrics.csv into plot-ready CSVs")
        .arg(Arg::new("metrics").long("metrics").value_name("PATH").required(true))
        .arg(Arg::new("out").long("out").value_name("DIR").required(true));
    Command::new("elirl")
        .about("Lifelong inverse reinforcement learning experiments")
        .subcommand_required(true)
        .subcommand(run)
        .subcommand(plot)
}

fn run(m: &ArgMatches) -> Result<bool> {
    let mut config = match m.get_one::<String>("config") {
        Some(path) => ExperimentConfig::from_file(&PathBuf::from(path))?,
        None => ExperimentConfig::default(),
    };
    for (key, _) in KEYS {
        if let Some(value) = m.get_one::<String>(key) {
            config.set(key, value)?;
        }
    }
    config.validate()?;
    let outcome = run_experiment(&config)?;
    eprintln!(
        "completed {} of {} trials; artifacts in {}",
        outcome.trials.len(),
        config.num_trials,
        config.output_dir.display()
    );
    for (trial, err) in &outcome.failures {
        eprintln!("trial {trial} failed: {err}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("run", m)) => run(m),
        Some(("plot-data", m)) => {
            let metrics = PathBuf::from(m.get_one::<String>("metrics").expect("required"));
            let out = PathBuf::from(m.get_one::<String>("out").expect("required"));
            emit_plot_data(&metrics, &out).map(|_| true)
        }
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
