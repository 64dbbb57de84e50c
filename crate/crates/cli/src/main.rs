//! `rml`: run augmented-state RML chains, tabulate quadrature oracles and
//! validate the numerical kernels.

mod config;
mod oracle_cmd;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ProblemConfig, RunConfig};

#[derive(Parser)]
#[command(name = "rml", version, about = "Augmented-state randomized maximum likelihood sampler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more chains and write trace, summary and histogram files.
    Run(RunCmd),
    /// Tabulate the marginal target (and optionally joint densities) on a grid.
    Oracle(OracleCmd),
    /// Run the numerical property suite and print a pass/fail table.
    Validate(ValidateCmd),
}

#[derive(Args)]
struct RunCmd {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `chain.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of chains; chain `i` uses seed `splitmix64(seed + i)` and
    /// writes to `<out>/chain_<i>`.
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Args)]
struct OracleCmd {
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    config: Option<PathBuf>,
    /// Built-in problem name, instead of a config file.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write joint (x, d) target and proposal grids (scalar problems).
    #[arg(long)]
    joint: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.4,0.9")]
    gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,0.99")]
    rhos: Vec<f64>,
}

#[derive(Args)]
struct ValidateCmd {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Chain length for each value of the Example 2 rho sweep.
    #[arg(long, default_value_t = 40_000)]
    sweep_steps: usize,
    /// Negate every forward Jacobian before the derivative checks (the
    /// derivative rows are then expected to fail).
    #[arg(long)]
    corrupt_jacobian: bool,
}

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(a) => {
            let cfg = match RunConfig::from_file(&a.config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let args = run::RunArgs {
                seed: a.seed,
                out: a.out,
                chains: a.chains,
            };
            match run::cmd_run(cfg, &args) {
                Ok(outcomes) => {
                    let mut failed = false;
                    for o in &outcomes {
                        match &o.result {
                            Ok(s) => println!(
                                "{}: seed {}, acceptance {:.4} ({} of {}), optimizer failures {}",
                                o.dir.display(),
                                o.seed,
                                s.acceptance_rate,
                                s.n_accepted,
                                s.n_steps,
                                s.n_optfail
                            ),
                            Err(e) => {
                                failed = true;
                                eprintln!("{}: seed {} failed: {e}", o.dir.display(), o.seed);
                            }
                        }
                    }
                    if failed {
                        ExitCode::FAILURE
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Oracle(a) => {
            let mut cfg = match (&a.config, &a.problem) {
                (Some(path), _) => match RunConfig::from_file(path) {
                    Ok(c) => c,
                    Err(e) => return config_error(e),
                },
                (None, Some(name)) => RunConfig {
                    problem: ProblemConfig {
                        name: Some(name.clone()),
                        linear: None,
                    },
                    hyperparams: Default::default(),
                    optimizer: Default::default(),
                    chain: Default::default(),
                    output: Default::default(),
                },
                (None, None) => unreachable!("clap requires --config or --problem"),
            };
            if let Some(o) = a.out {
                cfg.output.dir = o;
            }
            if let Err(e) = cfg.validate() {
                return config_error(e);
            }
            let args = oracle_cmd::OracleArgs {
                joint: a.joint,
                gammas: a.gammas,
                rhos: a.rhos,
            };
            match oracle_cmd::cmd_oracle(&cfg, &args) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate(a) => {
            let args = validate::ValidateArgs {
                seed: a.seed,
                sweep_steps: a.sweep_steps,
                corrupt_jacobian: a.corrupt_jacobian,
            };
            match validate::cmd_validate(&args) {
                Ok(rows) => {
                    validate::print_table(&rows);
                    if rows.iter().all(|r| r.pass) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
