// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! `qdock`: docking, embedding, pulse optimization and learned-parameter
//! experiments on a simulated neutral-atom array.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdock::optimize::{Family, OptimizerKind};
use qdock::ErrorKind;

use config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qdock", version, about = "Graph docking on simulated Rydberg atom arrays")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Integration step, ns.
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    rounds: Option<usize>,
    /// `nm` or `tpe`.
    #[arg(long, global = true)]
    optimizer: Option<OptimizerKind>,
    /// `simple` or `complex`.
    #[arg(long, global = true)]
    family: Option<Family>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Binding interaction graph of a ligand and a receptor, and its complement.
    Dock {
        #[arg(long)]
        ligand: PathBuf,
        #[arg(long)]
        receptor: PathBuf,
        /// Attraction table; the built-in table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Flexibility tolerance, Å.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Atom register for a graph, with quantum links where needed.
    Embed { graph: PathBuf },
    /// Variational search for pulse parameters on a register.
    Vqaa {
        register: PathBuf,
        /// Reuse the trial log already in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Success probability over a grid of fixed pulse parameters.
    Sweep {
        register: PathBuf,
        /// Comma-separated Ω values, rad/µs.
        #[arg(long)]
        omega: String,
        /// Comma-separated δ values, rad/µs.
        #[arg(long)]
        delta: String,
        /// Comma-separated durations, ns.
        #[arg(long)]
        time: String,
    },
    /// VQAA over the geometric corpus at several round budgets.
    Benchmark {
        /// Comma-separated budgets, replacing `benchmark_rounds`.
        #[arg(long)]
        rounds_list: Option<String>,
    },
    /// Generates and labels the geometric training corpus.
    Dataset,
    /// Trains one regressor per pulse parameter.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Where to write the model files; `<out>/models` by default.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Predicts pulse parameters for a register from trained models.
    Predict {
        #[arg(long)]
        models: PathBuf,
        register: PathBuf,
    },
    /// Learned parameters against a short VQAA run on the held-out split.
    #[command(name = "mlqaa-eval")]
    MlqaaEval {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Exact maximum-weight independent sets of a graph.
    Oracle { graph: PathBuf },
}

fn parse_rounds(s: &str) -> qdock::Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| qdock::Error::InvalidParameter(format!("`{t}` is not a round count")))
        })
        .collect()
}

fn run(cli: Cli) -> qdock::Result<()> {
    let g = cli.global;
    let overrides = Overrides {
        seed: g.seed,
        shots: g.shots,
        dt: g.dt,
        rounds: g.rounds,
        optimizer: g.optimizer,
        family: g.family,
        out: g.out,
    };
    let mut cfg = RunConfig::load(g.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Dock { tau: Some(t), .. } => cfg.tau = *t,
        Command::Benchmark { rounds_list: Some(r) } => cfg.benchmark_rounds = parse_rounds(r)?,
        _ => {}
    }
    cfg.validate()?;
    match cli.command {
        Command::Dock {
            ligand,
            receptor,
            table,
            ..
        } => commands::dock(&cfg, &ligand, &receptor, table.as_deref()),
        Command::Embed { graph } => commands::embed(&cfg, &graph),
        Command::Vqaa { register, resume } => commands::vqaa(&cfg, &register, resume),
        Command::Sweep {
            register,
            omega,
            delta,
            time,
        } => commands::sweep(&cfg, &register, &omega, &delta, &time),
        Command::Benchmark { .. } => commands::benchmark(&cfg),
        Command::Dataset => commands::dataset(&cfg),
        Command::Train { dataset, models } => commands::train(&cfg, &dataset, models.as_deref()),
        Command::Predict { models, register } => commands::predict(&cfg, &models, &register),
        Command::MlqaaEval { models, dataset } => commands::mlqaa_eval(&cfg, &models, &dataset),
        Command::Oracle { graph } => commands::oracle(&cfg, &graph),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Infeasible => 3,
                ErrorKind::Numerical => 4,
            })
        }
    }
}
