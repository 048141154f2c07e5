//! Two-stage stochastic program solves over finite scenario lists.

mod exhaustive;
pub mod external;
pub mod memo;
mod price_lp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{merge_scenarios, Instance, Scenario};
use crate::recourse::{
    emit_extensive_form, expected_recourse, first_stage_cost, solution_from_values, FirstStageSolution,
};
use crate::work::WorkCounter;

pub use exhaustive::DEFAULT_NODE_CAP;
pub use external::ExternalSolver;
pub use memo::{Memo, MemoKey, MemoStats, DEFAULT_MEMO_CAPACITY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    /// Built-in exact search; refuses problems needing more than `node_cap` nodes.
    Exhaustive { node_cap: u64 },
    /// Extensive form handed to an external MIP solver.
    ExternalMip(ExternalSolver),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Exhaustive { node_cap: DEFAULT_NODE_CAP }
    }
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Exhaustive { .. } => BackendKind::Exhaustive,
            Backend::ExternalMip(_) => BackendKind::ExternalMip,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Exhaustive,
    ExternalMip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStageResult {
    /// Expected revenue minus first-stage cost of `solution`.
    pub value: f64,
    pub solution: FirstStageSolution,
    /// Number of distinct scenarios after merging duplicates.
    pub scenario_count: usize,
    pub backend: BackendKind,
}

/// Optimal plan for the weighted scenario list. The reported value is
/// recomputed in closed form for the returned plan.
pub fn solve_two_stage(inst: &Instance, scenarios: &[Scenario], backend: &Backend) -> Result<TwoStageResult> {
    if scenarios.is_empty() {
        return Err(Error::InvalidArgument("no scenarios to solve over".into()));
    }
    let total: f64 = scenarios.iter().map(|s| s.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("scenario weights sum to {total}, not 1")));
    }
    let merged = merge_scenarios(scenarios);
    let solution = match backend {
        Backend::Exhaustive { node_cap } => exhaustive::solve(inst, &merged, *node_cap)?.solution,
        Backend::ExternalMip(solver) => {
            let model = emit_extensive_form(inst, &merged)?;
            let values = solver.solve(&model)?;
            solution_from_values(inst, &model, &values)
        }
    };
    let value = expected_recourse(inst, &solution, &merged) - first_stage_cost(inst, &solution)?;
    Ok(TwoStageResult { value, solution, scenario_count: merged.len(), backend: backend.kind() })
}

/// Runs the built-in search and also reports how many nodes it visited.
#[doc(hidden)]
pub fn exhaustive_with_nodes(
    inst: &Instance,
    scenarios: &[Scenario],
    node_cap: u64,
) -> Result<(FirstStageSolution, u64)> {
    let out = exhaustive::solve(inst, &merge_scenarios(scenarios), node_cap)?;
    Ok((out.solution, out.nodes))
}

/// [`solve_two_stage`] that also charges the solve to `work`.
pub fn solve_counted(
    inst: &Instance,
    scenarios: &[Scenario],
    backend: &Backend,
    work: &WorkCounter,
) -> Result<TwoStageResult> {
    let res = solve_two_stage(inst, scenarios, backend)?;
    work.add_solve(res.scenario_count);
    Ok(res)
}
