use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wardrop_cli::{cmd_certify, cmd_enumerate, cmd_experiment, cmd_solve, load, CertifyOutcome, CliError, Overrides};

#[derive(Parser)]
#[command(name = "wardrop", version, about = "Scenario-certified Wardrop equilibria under uncertain demand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true, default_value = "experiment.toml")]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Proceed even if the cost model fails the monotonicity check.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate paths and write a summary.
    Enumerate,
    /// Estimate the equilibrium set under K scenarios.
    Solve {
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Certify the nominal cloud for every K in the config's list.
    Certify,
    /// Run the whole pipeline and write all tables.
    Experiment,
}

fn report(outcome: &CertifyOutcome) -> ExitCode {
    for (k, row) in &outcome.rows {
        match row {
            Some(r) => println!("K={k} iota={} epsilon={} v_max={} v_avg={}", r.iota, r.epsilon, r.v_max, r.v_avg),
            None => eprintln!("K={k}: filtered equilibrium cloud is empty"),
        }
    }
    if outcome.empty_ks().is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(5)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let problem = load(&cli.config, &Overrides { seed: cli.seed, out: cli.out, force: cli.force })?;
    match cli.command {
        Command::Enumerate => {
            let s = cmd_enumerate(&problem)?;
            println!("m={} l={} e={} truncated={}", s.m, s.l, s.e, s.truncated);
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { k } => {
            let est = cmd_solve(&problem, k)?;
            println!("K={k}: {} distinct equilibria", est.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify => Ok(report(&cmd_certify(&problem)?)),
        Command::Experiment => Ok(report(&cmd_experiment(&problem)?)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
