//! `quoter`: closed-form quotes, Bellman solves, simulation and verification
//! for the inventory-aware market-making model.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quoter_core::oracle::Perturbation;

use crate::config::{parse_arms, parse_range, ConfigMap, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "quoter", version, about = "Inventory-aware market-making toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for simulation and verification sweeps
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a configuration key, e.g. `--set model.A=0`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reservation prices, optimal offsets and spread at one state
    Quotes {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<i64>,
        #[arg(long)]
        t: Option<f64>,
        /// Inventory range `a..b`, one CSV row per level
        #[arg(long, allow_hyphen_values = true)]
        sweep_q: Option<String>,
    },
    /// Solve the Bellman system (or one coefficient equation with --order)
    Solve {
        #[arg(long)]
        order: Option<usize>,
    },
    /// Monte Carlo comparison of strategy arms
    Simulate {
        /// Comma-separated arms: asymptotic, symmetric, frozen, grid
        #[arg(long)]
        arms: Option<String>,
    },
    /// Randomized oracle sweep; exits 4 if any check fails
    Verify {
        /// Inject a failure: `reservation <amount>`
        #[arg(long, num_args = 2, value_names = ["TARGET", "AMOUNT"], allow_hyphen_values = true)]
        perturb: Option<Vec<String>>,
    },
    /// Grid refinement study of the finite-difference solvers
    Convergence,
}

fn init_threads() -> CliResult {
    let Ok(raw) = std::env::var("QUOTER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Config(format!("QUOTER_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn run(cli: Cli) -> CliResult {
    init_threads()?;
    let mut map = match &cli.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };
    for pair in &cli.overrides {
        map.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        map.set("sim.seed", &seed.to_string())?;
        map.set("verify.seed", &seed.to_string())?;
    }
    if let Command::Quotes { s, q, t, .. } = &cli.command {
        for (key, v) in [("state.s", s.map(|v| v.to_string())), ("state.t", t.map(|v| v.to_string())), ("state.q", q.map(|v| v.to_string()))] {
            if let Some(v) = v {
                map.set(key, &v)?;
            }
        }
    }
    let cfg = RunConfig::from_map(&map)?;
    let out = cli.out.as_ref();

    match &cli.command {
        Command::Quotes { sweep_q, .. } => {
            let range = match sweep_q {
                Some(text) => Some(parse_range::<i64>(text).map_err(|m| CliError::Config(format!("--sweep-q: {m}")))?),
                None => None,
            };
            commands::quotes(&cfg, range, out)
        }
        Command::Solve { order } => commands::solve(&cfg, *order, out),
        Command::Simulate { arms } => {
            let arms = match arms {
                Some(list) => parse_arms(list)?,
                None => cfg.arms.clone(),
            };
            commands::simulate(&cfg, &arms, out)
        }
        Command::Verify { perturb } => {
            let perturbation = match perturb.as_deref() {
                None => None,
                Some([target, amount]) if target == "reservation" => {
                    let amount: f64 = amount
                        .parse()
                        .map_err(|_| CliError::Config(format!("--perturb: cannot parse amount `{amount}`")))?;
                    Some(Perturbation::Reservation(amount))
                }
                Some(other) => return Err(CliError::Config(format!("--perturb: unknown target {other:?}"))),
            };
            commands::verify(&cfg, perturbation, out)
        }
        Command::Convergence => commands::convergence(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quoter: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
