use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use statcontract::config::{ConfigError, Experiment, ExperimentConfig};
use statcontract::experiments::{run, EXIT_CONFIG};

/// Experiments on incentive-aligned statistical contracts.
#[derive(Parser)]
#[command(name = "statcontract", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Principal utility against strategic agents, aligned vs status quo.
    Welfare(Common),
    /// Expected value of a placebo under simplified approval protocols.
    FdaAudit(Common),
    /// Growth of the likelihood-ratio e-value with sample size.
    EvalueGrowth(Common),
    /// Multi-round profit license against one-round agents.
    Multiround(Common),
    /// Neyman-Pearson best response across cost ratios.
    BestResponse(Common),
    /// List the configuration keys of an experiment.
    Keys { experiment: String },
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    reps: Option<u64>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(experiment: Experiment, common: &Common) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::defaults(experiment);
    if let Some(path) = &common.config {
        config.apply_file(path)?;
    }
    for (i, item) in common.set.iter().enumerate() {
        let (key, value) =
            item.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: item.clone() })?;
        config.set(key.trim(), value)?;
    }
    if let Some(seed) = common.seed {
        config.set("seed", &seed.to_string())?;
    }
    if let Some(reps) = common.reps {
        config.set("reps", &reps.to_string())?;
    }
    if let Some(out) = &common.out {
        config.set("out", &out.to_string_lossy())?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::Welfare(c) => (Experiment::Welfare, c),
        Command::FdaAudit(c) => (Experiment::FdaAudit, c),
        Command::EvalueGrowth(c) => (Experiment::EvalueGrowth, c),
        Command::Multiround(c) => (Experiment::Multiround, c),
        Command::BestResponse(c) => (Experiment::BestResponse, c),
        Command::Keys { experiment } => {
            return match experiment.parse::<Experiment>() {
                Ok(e) => {
                    for (key, default, doc) in e.keys() {
                        println!("{key} = {default}    # {doc}");
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(EXIT_CONFIG as u8)
                }
            };
        }
    };
    let config = match resolve(experiment, common) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            for file in &outcome.files {
                println!("{}", outcome.dir.join(file).display());
            }
            for d in &outcome.deviations {
                eprintln!("deviation: {d}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
