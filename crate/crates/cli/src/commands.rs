//! One function per subcommand. Each returns its results without touching
//! the output directory; `report::write` does that afterwards.

use std::collections::BTreeMap;
use std::sync::Mutex;

use anyhow::{Context, Result};
use pesp_core::bnb::{run_bnb_counted, NodeLogEntry, SearchMode};
use pesp_core::bounds::{alpha, f_exact};
use pesp_core::heuristic::{finalize_candidates, greedy_run, GreedySpec};
use pesp_core::instance::GeneratorParams;
use pesp_core::mipgen::{build_na_mip, fix_probes};
use pesp_core::rng::{derive_seed, tag};
use pesp_core::sampling::{saa_replicate, stat_lb, ReplicationOutcome};
use pesp_core::work::WorkCounter;
use pesp_core::{BnbConfig, Instance, ProbeSet, SampleSpec, SearchReport, SearchStatus};
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::report::{Detail, InstanceInfo, Outcome, RunStatus};

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg {
        RunConfig::Generate(c) => generate(c),
        RunConfig::SolveExact(c) => solve_exact(c),
        RunConfig::SolveSaa(c) => solve_saa(c),
        RunConfig::SolveInternal(c) => solve_internal(c),
        RunConfig::Heuristic(c) => heuristic(c),
        RunConfig::Evaluate(c) => evaluate(c),
        RunConfig::EmitNaMip(c) => emit_na_mip(c),
    }
}

fn load(path: &std::path::Path) -> Result<(Instance, InstanceInfo)> {
    let inst = Instance::load(path).with_context(|| format!("loading instance {}", path.display()))?;
    let info = InstanceInfo {
        path: path.display().to_string(),
        name: inst.meta.name.clone(),
        facilities: inst.n_facilities(),
        customers: inst.n_customers(),
    };
    Ok((inst, info))
}

fn indices(set: ProbeSet) -> Vec<usize> {
    set.iter().collect()
}

fn search_config(
    mode: SearchMode,
    search: &SearchConfig,
    budget: &BudgetConfig,
    solver: &SolverConfig,
    seed: u64,
) -> BnbConfig {
    let mut bc = BnbConfig::new(mode, search.branching.into());
    bc.score = search.score.option();
    bc.budget = budget.budget();
    bc.seed = seed;
    bc.backend = solver.backend();
    bc
}

fn status_of(rep: &SearchReport) -> RunStatus {
    match rep.status {
        SearchStatus::BudgetExhausted => RunStatus::BudgetLimited,
        _ => RunStatus::Ok,
    }
}

fn node_log(log: &[NodeLogEntry]) -> Result<Detail> {
    Detail::csv("nodes.csv", log)
}

fn generate(c: &GenerateConfig) -> Result<Outcome> {
    let mut inst = GeneratorParams::new(c.facilities, c.configs, c.customers, c.kind.into()).generate(c.common.seed);
    if inst.meta.name.is_empty() {
        inst.meta.name = format!("gen-{}x{}-{}-{}", c.facilities, c.configs, c.customers, c.common.seed);
    }
    let info = InstanceInfo {
        path: "instance.json".into(),
        name: inst.meta.name.clone(),
        facilities: inst.n_facilities(),
        customers: inst.n_customers(),
    };
    let mut text = inst.to_json();
    text.push('\n');
    Ok(Outcome {
        status: RunStatus::Ok,
        instance: Some(info),
        results: json!({
            "total_probe_cost": inst.probe_costs().iter().sum::<f64>(),
            "finite_support": inst.is_finite(),
        }),
        counters: None,
        details: vec![Detail::text("instance.json", text)],
    })
}

fn solve_exact(c: &SolveExactConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let bc = search_config(SearchMode::Exact, &c.search, &c.budget, &c.solver, c.common.seed);
    let work = WorkCounter::new();
    let rep = run_bnb_counted(&inst, &bc, &work)?;
    let cost = alpha(&inst, rep.best_set);
    Ok(Outcome {
        status: status_of(&rep),
        instance: Some(info),
        results: json!({
            "search_status": rep.status,
            "z_pesp": rep.best_lb.mean,
            "best_set": indices(rep.best_set),
            "f_best": rep.best_lb.mean + cost,
            "alpha_best": cost,
            "upper_bound": rep.upper_bound,
            "gap": rep.upper_bound - rep.best_lb.mean,
            "perfect_information": rep.root_ub.mean,
            "nodes": rep.nodes,
        }),
        counters: Some(rep.work),
        details: vec![node_log(&rep.log)?],
    })
}

#[derive(Serialize)]
struct ReplicationCsv {
    replication: usize,
    v: f64,
    #[serde(rename = "N")]
    n: usize,
    seed: u64,
    work_units: u64,
    solved: bool,
    best_set: String,
    nodes: u64,
    memo_hits: u64,
    memo_lookups: u64,
}

fn solve_saa(c: &SolveSaaConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let extra: Mutex<BTreeMap<usize, (ProbeSet, u64, u64, u64, pesp_core::work::WorkSnapshot)>> =
        Mutex::new(BTreeMap::new());
    let summary =
        saa_replicate(&inst, c.n, c.replications, c.sample_mode.into(), c.common.seed, c.alpha, |l, sample| {
            let seed = derive_seed(c.common.seed, &[tag::REPLICATION, l as u64, tag::BRANCH]);
            let mut bc = search_config(
                SearchMode::ExternalSample { sample: sample.to_vec() },
                &c.search,
                &c.budget,
                &c.solver,
                seed,
            );
            bc.memo_capacity = c.memo_capacity;
            let work = WorkCounter::new();
            let rep = run_bnb_counted(&inst, &bc, &work)?;
            let solved = rep.status == SearchStatus::Optimal;
            let memo = rep.memo.unwrap_or_default();
            extra.lock().unwrap().insert(l, (rep.best_set, rep.nodes, memo.hits, memo.hits + memo.misses, rep.work));
            Ok(ReplicationOutcome {
                // A stopped search reports its tree's upper bound.
                value: if solved { rep.best_lb.mean } else { rep.upper_bound },
                solved,
                work_units: rep.work.work_units(),
            })
        })?;
    let extra = extra.into_inner().unwrap();
    let rows: Vec<ReplicationCsv> = summary
        .rows
        .iter()
        .map(|r| {
            let (set, nodes, hits, lookups, _) = extra[&r.replication];
            ReplicationCsv {
                replication: r.replication,
                v: r.v,
                n: r.n,
                seed: r.seed,
                work_units: r.work_units,
                solved: r.solved,
                best_set: set.encode(),
                nodes,
                memo_hits: hits,
                memo_lookups: lookups,
            }
        })
        .collect();
    let total = extra.values().fold(pesp_core::work::WorkSnapshot::default(), |acc, e| acc.add(&e.4));
    let (hits, lookups) = rows.iter().fold((0, 0), |(h, n), r| (h + r.memo_hits, n + r.memo_lookups));
    let all_solved = summary.rows.iter().all(|r| r.solved);
    Ok(Outcome {
        status: if all_solved { RunStatus::Ok } else { RunStatus::BudgetLimited },
        instance: Some(info),
        results: json!({
            "replications": summary.rows.len(),
            "n": c.n,
            "mean": summary.mean,
            "std": summary.std,
            "alpha": summary.alpha,
            "ci_upper": summary.ci_upper,
            "all_solved": all_solved,
            "memo_hit_rate": if lookups == 0 { 0.0 } else { hits as f64 / lookups as f64 },
        }),
        counters: Some(total),
        details: vec![Detail::csv("replications.csv", &rows)?],
    })
}

#[derive(Serialize)]
struct LeafCsv {
    state: String,
    offset: f64,
    mu: f64,
    s: f64,
    batches: usize,
}

fn lower_spec(l: &LowerBoundConfig, mode: ModeArg, seed: u64) -> SampleSpec {
    SampleSpec {
        n1: l.lb_n1,
        n2: l.lb_n2,
        n3: l.lb_n3,
        batches: 1,
        mode: mode.into(),
        seed: derive_seed(seed, &[tag::EVAL]),
    }
}

fn solve_internal(c: &SolveInternalConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let spec = SampleSpec {
        n1: c.n1,
        n2: c.n2,
        n3: c.n2,
        batches: c.batches,
        mode: c.sample_mode.into(),
        seed: c.common.seed,
    };
    let mut bc = search_config(SearchMode::InternalSample { spec }, &c.search, &c.budget, &c.solver, c.common.seed);
    bc.alpha = c.alpha;
    bc.priority_sigma = c.priority_sigma;
    bc.enum_batches = c.enum_batches;
    bc.enum_max_probes = Some(c.enum_max_probes);
    bc.enum_max_support = (c.enum_max_support > 0).then_some(c.enum_max_support as u128);
    if c.enum_max_probes == 0 {
        // A support cap of zero excludes every set, the empty one included.
        bc.enum_max_support = Some(0);
    }
    let work = WorkCounter::new();
    let rep = run_bnb_counted(&inst, &bc, &work)?;
    let lb =
        stat_lb(&inst, rep.best_set, &lower_spec(&c.lower, c.sample_mode, c.common.seed), &bc.backend, c.alpha, &work)?;
    let cost = alpha(&inst, rep.best_set);
    let leaves: Vec<LeafCsv> = rep
        .leaves
        .iter()
        .map(|l| LeafCsv {
            state: l.state.encode(),
            offset: l.offset,
            mu: l.bound.mu,
            s: l.bound.s,
            batches: l.bound.batches,
        })
        .collect();
    let pi = rep.root_ub;
    Ok(Outcome {
        status: status_of(&rep),
        instance: Some(info),
        results: json!({
            "search_status": rep.status,
            "global_ub": rep.upper_bound,
            "alpha": c.alpha,
            "perfect_information_mean": pi.mean,
            "perfect_information_stderr": pi.stderr,
            "best_set": indices(rep.best_set),
            "best_node_estimate": rep.best_lb.mean,
            "best_node_stderr": rep.best_lb.stderr,
            "alpha_best": cost,
            "lb_net_mean": lb.estimate.mean - cost,
            "lb_net_stderr": lb.estimate.stderr,
            "lb_net_lower": lb.lower - cost,
            "nodes": rep.nodes,
            "open_leaves": rep.leaves.len(),
        }),
        counters: Some(work.snapshot()),
        details: vec![node_log(&rep.log)?, Detail::csv("leaves.csv", &leaves)?],
    })
}

#[derive(Serialize)]
struct PoolCsv {
    iterate: usize,
    set: String,
    approx_f: f64,
    net: f64,
    wall_secs: f64,
    work_units: u64,
}

#[derive(Serialize)]
struct FinalCsv {
    rank: usize,
    set: String,
    approx_net: f64,
    f_mean: f64,
    f_stderr: f64,
    f_lower: f64,
    alpha: f64,
    net_mean: f64,
    net_lower: f64,
}

fn heuristic(c: &HeuristicConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let backend = c.solver.backend();
    let spec = GreedySpec {
        n1: c.n1,
        n2: c.n2,
        n3: c.n3,
        k: c.k,
        weighted: c.weighted,
        mode: c.sample_mode.into(),
        seed: c.common.seed,
    };
    let work = WorkCounter::new();
    let pool = greedy_run(&inst, &spec, &backend, &work)?;
    let finals = finalize_candidates(
        &inst,
        &pool,
        c.top,
        &lower_spec(&c.lower, c.sample_mode, c.common.seed),
        &backend,
        c.alpha,
        &work,
    )?;
    let pool_rows: Vec<PoolCsv> = pool
        .entries
        .iter()
        .map(|e| PoolCsv {
            iterate: e.iterate,
            set: e.set.encode(),
            approx_f: e.approx_f,
            net: e.net,
            wall_secs: e.wall_secs,
            work_units: e.work_units,
        })
        .collect();
    let final_rows: Vec<FinalCsv> = finals
        .iter()
        .enumerate()
        .map(|(rank, f)| FinalCsv {
            rank,
            set: f.set.encode(),
            approx_net: f.approx_net,
            f_mean: f.lb.estimate.mean,
            f_stderr: f.lb.estimate.stderr,
            f_lower: f.lb.lower,
            alpha: alpha(&inst, f.set),
            net_mean: f.net_mean,
            net_lower: f.net_lower,
        })
        .collect();
    let best = &finals[0];
    Ok(Outcome {
        status: RunStatus::Ok,
        instance: Some(info),
        results: json!({
            "best_set": indices(best.set),
            "net_mean": best.net_mean,
            "net_stderr": best.lb.estimate.stderr,
            "net_lower": best.net_lower,
            "alpha": c.alpha,
            "pool_size": pool.entries.len(),
            "finalized": finals.len(),
        }),
        counters: Some(work.snapshot()),
        details: vec![Detail::csv("pool.csv", &pool_rows)?, Detail::csv("finalized.csv", &final_rows)?],
    })
}

#[derive(Serialize)]
struct ValueCsv {
    draw: usize,
    value: f64,
}

fn evaluate(c: &EvaluateConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let set = parse_set(&c.set)?;
    if let Some(j) = set.iter().find(|&j| j >= inst.n_customers()) {
        anyhow::bail!("customer {j} is out of range for an instance with {} customers", inst.n_customers());
    }
    let backend = c.solver.backend();
    let work = WorkCounter::new();
    let spec = lower_spec(&c.lower, c.sample_mode, c.common.seed);
    let lb = stat_lb(&inst, set, &spec, &backend, c.alpha, &work)?;
    let cost = alpha(&inst, set);
    let exact = if c.exact { Some(f_exact(&inst, set, &backend)?.mean) } else { None };
    let rows: Vec<ValueCsv> = lb.values.iter().enumerate().map(|(draw, &value)| ValueCsv { draw, value }).collect();
    Ok(Outcome {
        status: RunStatus::Ok,
        instance: Some(info),
        results: json!({
            "set": indices(set),
            "alpha_set": cost,
            "f_mean": lb.estimate.mean,
            "f_stderr": lb.estimate.stderr,
            "f_lower": lb.lower,
            "net_mean": lb.estimate.mean - cost,
            "net_lower": lb.lower - cost,
            "alpha": c.alpha,
            "f_exact": exact,
            "net_exact": exact.map(|f| f - cost),
        }),
        counters: Some(work.snapshot()),
        details: vec![Detail::csv("values.csv", &rows)?],
    })
}

fn emit_na_mip(c: &EmitConfig) -> Result<Outcome> {
    let (inst, info) = load(&c.instance)?;
    let mut na = build_na_mip(&inst, c.outcome_cap)?;
    let fixed = match &c.fix {
        Some(s) => {
            let set = parse_set(s)?;
            fix_probes(&mut na.model, inst.n_customers(), set);
            Some(indices(set))
        }
        None => None,
    };
    let meta = serde_json::to_value(&na.meta)?;
    Ok(Outcome {
        status: RunStatus::Ok,
        instance: Some(info),
        results: json!({ "model_file": "model.mps", "fixed_probes": fixed, "meta": meta }),
        counters: None,
        details: vec![Detail::text("model.mps", na.model.to_mps())],
    })
}
