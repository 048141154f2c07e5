//! Machine-independent effort accounting.
//!
//! One work unit is one closed-form recourse evaluation; a two-stage solve
//! costs as many units as it has (distinct) scenarios. Counters are atomic so
//! parallel evaluations can share one.

use std::sync::atomic::{AtomicU64, Ordering::Relaxed};
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Default)]
pub struct WorkCounter {
    subproblem_solves: AtomicU64,
    subproblem_units: AtomicU64,
    recourse_evals: AtomicU64,
    nodes: AtomicU64,
    f_evals: AtomicU64,
}

/// A point-in-time copy of a [`WorkCounter`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkSnapshot {
    pub subproblem_solves: u64,
    pub subproblem_units: u64,
    pub recourse_evals: u64,
    pub nodes: u64,
    pub f_evals: u64,
}

impl WorkSnapshot {
    pub fn work_units(&self) -> u64 {
        self.subproblem_units + self.recourse_evals
    }

    pub fn since(&self, earlier: &WorkSnapshot) -> WorkSnapshot {
        WorkSnapshot {
            subproblem_solves: self.subproblem_solves - earlier.subproblem_solves,
            subproblem_units: self.subproblem_units - earlier.subproblem_units,
            recourse_evals: self.recourse_evals - earlier.recourse_evals,
            nodes: self.nodes - earlier.nodes,
            f_evals: self.f_evals - earlier.f_evals,
        }
    }

    pub fn add(&self, other: &WorkSnapshot) -> WorkSnapshot {
        WorkSnapshot {
            subproblem_solves: self.subproblem_solves + other.subproblem_solves,
            subproblem_units: self.subproblem_units + other.subproblem_units,
            recourse_evals: self.recourse_evals + other.recourse_evals,
            nodes: self.nodes + other.nodes,
            f_evals: self.f_evals + other.f_evals,
        }
    }
}

impl WorkCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one two-stage solve over `scenarios` scenarios.
    pub fn add_solve(&self, scenarios: usize) {
        self.subproblem_solves.fetch_add(1, Relaxed);
        self.subproblem_units.fetch_add(scenarios as u64, Relaxed);
    }

    pub fn add_recourse(&self, count: u64) {
        self.recourse_evals.fetch_add(count, Relaxed);
    }

    pub fn add_node(&self) {
        self.nodes.fetch_add(1, Relaxed);
    }

    pub fn add_f_eval(&self) {
        self.f_evals.fetch_add(1, Relaxed);
    }

    pub fn snapshot(&self) -> WorkSnapshot {
        WorkSnapshot {
            subproblem_solves: self.subproblem_solves.load(Relaxed),
            subproblem_units: self.subproblem_units.load(Relaxed),
            recourse_evals: self.recourse_evals.load(Relaxed),
            nodes: self.nodes.load(Relaxed),
            f_evals: self.f_evals.load(Relaxed),
        }
    }
}

/// Limits on a search. Whichever limit triggers first stops it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkBudget {
    pub max_work_units: Option<u64>,
    pub max_nodes: Option<u64>,
    pub max_f_evals: Option<u64>,
    pub max_wall_secs: Option<f64>,
}

impl WorkBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn work_units(units: u64) -> Self {
        WorkBudget { max_work_units: Some(units), ..Self::default() }
    }

    pub fn nodes(nodes: u64) -> Self {
        WorkBudget { max_nodes: Some(nodes), ..Self::default() }
    }

    /// Whether `used` (measured since `started`) has reached any limit.
    pub fn exhausted(&self, used: &WorkSnapshot, started: Instant) -> bool {
        self.max_work_units.is_some_and(|m| used.work_units() >= m)
            || self.max_nodes.is_some_and(|m| used.nodes >= m)
            || self.max_f_evals.is_some_and(|m| used.f_evals >= m)
            || self.max_wall_secs.is_some_and(|m| started.elapsed().as_secs_f64() >= m)
    }
}
