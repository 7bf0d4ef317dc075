//! `flowtoll` command-line front end.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 demand infeasible,
//! 3 certificate or oracle check failed (or an internal invariant broke).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "flowtoll",
    version,
    about = "Optimal flows over time with departure choice, and the tolls that enforce them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write flow.json, schedule.json, decomposition.json, summary.json and per-arc rate CSVs.
    Solve(Io),
    /// Solve with the earliest-arrival cost `ρ(θ) = −αθ` (θ <= 0), `+∞` (θ > 0).
    Eaf(Io),
    /// Solve, build potentials and tolls, and check the optimality certificate.
    Tolls {
        #[command(flatten)]
        io: Io,
        /// Random (node, time) samples for the toll equilibrium check.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Seed for the equilibrium sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write curve.json: the piecewise linear map from horizon C to value Q(C) and its inverse.
    Curve(Io),
    /// Compare with the discrete time-expanded optimum at each step size.
    Oracle {
        #[command(flatten)]
        io: Io,
        /// Comma-separated step sizes, each dividing every arc delay.
        #[arg(long, default_value = "1,1/2,1/4")]
        deltas: String,
    },
    /// Re-check a written flow and its potentials against the instance without solving.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Flow JSON as written by `solve` (default: <dir>/flow.json).
        #[arg(long)]
        flow: Option<PathBuf>,
        /// Potentials JSON as written by `tolls` (default: <dir>/potentials.json).
        #[arg(long)]
        potentials: Option<PathBuf>,
        /// Directory holding the artifacts; the report goes to stdout unless --out is given.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve(io) => commands::cmd_solve(&commands::load_instance(&io.instance)?, &io.out),
        Command::Eaf(io) => {
            let instance = commands::with_earliest_arrival(commands::load_instance(&io.instance)?)?;
            commands::cmd_solve(&instance, &io.out)
        }
        Command::Tolls { io, samples, seed } => {
            commands::cmd_tolls(&commands::load_instance(&io.instance)?, &io.out, samples, seed)
        }
        Command::Curve(io) => commands::cmd_curve(&commands::load_instance(&io.instance)?, &io.out),
        Command::Oracle { io, deltas } => {
            let deltas = commands::parse_deltas(&deltas)?;
            commands::cmd_oracle(&commands::load_instance(&io.instance)?, &io.out, &deltas)
        }
        Command::Verify {
            instance,
            flow,
            potentials,
            dir,
            out,
        } => {
            let flow = flow.unwrap_or_else(|| dir.join("flow.json"));
            let potentials = potentials.unwrap_or_else(|| dir.join("potentials.json"));
            commands::cmd_verify(&commands::load_instance(&instance)?, &flow, &potentials, out.as_deref())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<flowtoll::Error>()) {
        Some(flowtoll::Error::DemandInfeasible(_)) => 2,
        Some(flowtoll::Error::Invariant(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
