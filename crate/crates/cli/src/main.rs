//! `gibbslab`: config-driven experiments on Patterson-Sullivan-Gibbs measures.
//!
//! Exit codes: 0 when every criterion passes, 2 when a criterion fails, 3 on
//! health or infrastructure failures (bad config or arguments, cache corruption,
//! empty shadows).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::cache::OrbitCache;
use crate::commands::Context;
use crate::config::ExperimentConfig;
use crate::output::RunDir;

const EXIT_INFRASTRUCTURE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gibbslab", version, about = "Patterson-Sullivan-Gibbs measures on the Poincare disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the orbit table, or confirm the cached one.
    EnumOrbit(Common),
    /// Estimate the critical exponent from annulus sums.
    EstimateDelta(Common),
    /// Build the atomic Patterson-Gibbs measure and export its atoms.
    BuildMeasure(Common),
    /// Compare measure ratios with the Gibbs cocycle and check equivariance.
    CocycleCheck(Common),
    /// Shadow decay slopes against -delta + lambda.
    DecayExperiment(Common),
    /// Cone mass, shadow inclusion, north-south and bounded-difference checks.
    LemmaChecks(Common),
    /// Birkhoff and quadrature estimates of the Liouville mean of the potential.
    LambdaEstimate(Common),
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Experiment config: TOML with dotted keys, or JSON for `.json` files.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `<output_dir>/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EnumOrbit(_) => "enum-orbit",
            Command::EstimateDelta(_) => "estimate-delta",
            Command::BuildMeasure(_) => "build-measure",
            Command::CocycleCheck(_) => "cocycle-check",
            Command::DecayExperiment(_) => "decay-experiment",
            Command::LemmaChecks(_) => "lemma-checks",
            Command::LambdaEstimate(_) => "lambda-estimate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::EnumOrbit(c)
            | Command::EstimateDelta(c)
            | Command::BuildMeasure(c)
            | Command::CocycleCheck(c)
            | Command::DecayExperiment(c)
            | Command::LemmaChecks(c)
            | Command::LambdaEstimate(c) => c,
        }
    }
}

fn run(command: &Command) -> Result<i32> {
    let common = command.common();
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| config.output_dir.join(command.name()));
    let run = RunDir::open(&out)?;
    let mut ctx = Context::new(command.name(), config, OrbitCache::from_env(), run)?;
    let step = match command {
        Command::EnumOrbit(_) => commands::enum_orbit(&mut ctx),
        Command::EstimateDelta(_) => commands::estimate_delta(&mut ctx),
        Command::BuildMeasure(_) => commands::build_measure(&mut ctx),
        Command::CocycleCheck(_) => commands::cocycle_check(&mut ctx),
        Command::DecayExperiment(_) => commands::decay_experiment(&mut ctx),
        Command::LemmaChecks(_) => commands::lemma_checks(&mut ctx),
        Command::LambdaEstimate(_) => commands::lambda_estimate(&mut ctx),
    };
    if let Err(e) = step {
        ctx.summary.health.push(format!("{e:#}"));
    }
    for v in &ctx.summary.criteria {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for h in &ctx.summary.health {
        eprintln!("health: {h}");
    }
    let dir = ctx.run.path().to_path_buf();
    let code = ctx.finish()?;
    eprintln!("results in {}", dir.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INFRASTRUCTURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INFRASTRUCTURE)
        }
    }
}
