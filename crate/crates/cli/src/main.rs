//! `pesp`: choose which demands to observe before planning facilities.
//!
//! Exit status is 0 on success, 2 when a budget cut a run short (its
//! results are written and flagged), and 1 on any error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::*;
use report::RunStatus;

#[derive(Parser)]
#[command(
    name = "pesp",
    version,
    about = "Probing-enhanced stochastic programs: exact, sampled and heuristic probe selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random facility location instance.
    Generate(GenerateArgs),
    /// Branch-and-bound with exact expectations (finite supports).
    SolveExact(SolveExactArgs),
    /// Replicated sample average approximation with a confidence bound.
    SolveSaa(SolveSaaArgs),
    /// Branch-and-bound with nested sampling at every node.
    SolveInternal(SolveInternalArgs),
    /// Greedy probing with statistical lower bounds on its best sets.
    Heuristic(HeuristicArgs),
    /// Statistical lower bound on the net value of one probe set.
    Evaluate(EvaluateArgs),
    /// Write the nonanticipative big-M model as MPS (no seed needed).
    EmitNaMip(EmitArgs),
    /// Re-run the configuration stored in a summary file.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ReplayArgs {
    /// A `summary.json` written by an earlier run.
    #[arg(long)]
    summary: PathBuf,
    /// Where to write the new outputs.
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads for the rerun.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn resolve<A: serde::Serialize, C: serde::de::DeserializeOwned>(args: &A, file: &Option<PathBuf>) -> Result<C> {
    merge(args, file.as_deref())
}

fn build(command: Command) -> Result<RunConfig> {
    let mut cfg = match command {
        Command::Generate(a) => RunConfig::Generate(resolve(&a, &a.common.config)?),
        Command::SolveExact(a) => RunConfig::SolveExact(resolve(&a, &a.common.config)?),
        Command::SolveSaa(a) => RunConfig::SolveSaa(resolve(&a, &a.common.config)?),
        Command::SolveInternal(a) => RunConfig::SolveInternal(resolve(&a, &a.common.config)?),
        Command::Heuristic(a) => RunConfig::Heuristic(resolve(&a, &a.common.config)?),
        Command::Evaluate(a) => RunConfig::Evaluate(resolve(&a, &a.common.config)?),
        Command::EmitNaMip(mut a) => {
            // Nothing here is random; the seed only fills the summary.
            a.common.seed.get_or_insert(0);
            RunConfig::EmitNaMip(resolve(&a, &a.common.config)?)
        }
        Command::Replay(r) => {
            let text =
                std::fs::read_to_string(&r.summary).with_context(|| format!("reading {}", r.summary.display()))?;
            let summary: Value = serde_json::from_str(&text).context("parsing summary")?;
            let command = summary["command"].as_str().context("summary has no command")?;
            let mut cfg = RunConfig::from_parts(command, summary["config"].clone())?;
            let common = cfg.common_mut();
            common.out_dir = r.out_dir;
            common.workers = r.workers;
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig) -> Result<RunStatus> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.common().workers)
        .build_global()
        .context("starting the worker pool")?;
    let started = Instant::now();
    let out = commands::run(cfg)?;
    report::write(&cfg.common().out_dir, cfg, &out, started.elapsed().as_secs_f64())?;
    Ok(out.status)
}

fn diagnostic(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            diagnostic("usage", e.render().to_string().trim());
            return ExitCode::from(1);
        }
    };
    let cfg = match build(cli.command) {
        Ok(c) => c,
        Err(e) => {
            diagnostic("config", &format!("{e:#}"));
            return ExitCode::from(1);
        }
    };
    match execute(&cfg) {
        Ok(RunStatus::Ok) => ExitCode::SUCCESS,
        Ok(RunStatus::BudgetLimited) => ExitCode::from(2),
        Err(e) => {
            diagnostic("run", &format!("{e:#}"));
            ExitCode::from(1)
        }
    }
}
