//! Probe costs, node restrictions, exact `F(S)` and the node bound formulas.
//!
//! A search node restricts which probe sets are admissible. Every admissible
//! set `S` avoids `S0`, so `S ⊆ [n] \ S0` and by monotonicity of information
//! `F(S) <= F([n] \ S0)`. The lower bound comes from actually probing
//! everything allowed; the upper bound charges only the probes that any
//! admissible set must pay for.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{enumerate_conditional_support, enumerate_support_projection, Instance};
use crate::probe::ProbeSet;
use crate::stochprog::{solve_counted, Backend, MemoStats};
use crate::work::WorkCounter;

/// Modular probe cost `alpha(S) = sum_{j in S} alpha_j`.
pub fn alpha(inst: &Instance, set: ProbeSet) -> f64 {
    set.iter().fold(0.0, |acc, j| acc + inst.customers[j].probe_cost)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Exact,
    Statistical,
}

/// A value of an `F`-type quantity, exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub mean: f64,
    /// Standard error; always zero in exact mode.
    pub stderr: f64,
    pub batches: usize,
    pub mode: EstimateMode,
}

impl BoundEstimate {
    pub fn exact(value: f64) -> Self {
        BoundEstimate { mean: value, stderr: 0.0, batches: 1, mode: EstimateMode::Exact }
    }

    pub fn statistical(mean: f64, stderr: f64, batches: usize) -> Self {
        BoundEstimate { mean, stderr: stderr.max(0.0), batches, mode: EstimateMode::Statistical }
    }

    /// The same estimate moved by a deterministic amount.
    pub fn shifted(self, delta: f64) -> Self {
        BoundEstimate { mean: self.mean + delta, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    SingleElement,
    MultiElement,
}

/// Restrictions at a search node.
///
/// Single-element nodes fix some indices out (`s0`) and some in (`s1`).
/// Multi-element nodes fix `s0` out and require at least one probe from each
/// of the disjoint `groups`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeState {
    pub kind: StateKind,
    pub s0: ProbeSet,
    pub s1: ProbeSet,
    pub groups: Vec<ProbeSet>,
}

impl ProbeState {
    pub fn root(kind: StateKind) -> Self {
        ProbeState { kind, s0: ProbeSet::empty(), s1: ProbeSet::empty(), groups: Vec::new() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let all = ProbeSet::full(n);
        let mut seen = self.s0;
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("probe state: {msg}")));
        if !self.s0.is_subset(all) || !self.s1.is_subset(all) {
            return bad("index out of range");
        }
        match self.kind {
            StateKind::SingleElement if !self.groups.is_empty() => return bad("groups in single-element mode"),
            StateKind::MultiElement if !self.s1.is_empty() => return bad("forced probes in multi-element mode"),
            _ => {}
        }
        if !self.s1.is_disjoint(seen) {
            return bad("S0 and S1 overlap");
        }
        seen = seen | self.s1;
        for g in &self.groups {
            if g.is_empty() || !g.is_subset(all) || !g.is_disjoint(seen) {
                return bad("groups must be nonempty, in range and disjoint");
            }
            seen = seen | *g;
        }
        Ok(())
    }

    /// The largest admissible probe set, `[n] \ S0`.
    pub fn full_probe(&self, n: usize) -> ProbeSet {
        self.s0.complement(n)
    }

    /// Probe cost every admissible set must pay at least.
    pub fn ub_penalty(&self, inst: &Instance) -> f64 {
        match self.kind {
            StateKind::SingleElement => alpha(inst, self.s1),
            StateKind::MultiElement => self
                .groups
                .iter()
                .map(|g| g.iter().map(|j| inst.customers[j].probe_cost).fold(f64::INFINITY, f64::min))
                .sum(),
        }
    }

    pub fn admits(&self, set: ProbeSet) -> bool {
        set.is_disjoint(self.s0) && self.s1.is_subset(set) && self.groups.iter().all(|g| !g.is_disjoint(set))
    }

    /// Indices whose status is still open.
    pub fn candidates(&self, n: usize) -> ProbeSet {
        match self.kind {
            StateKind::SingleElement => ProbeSet::full(n).difference(self.s0 | self.s1),
            StateKind::MultiElement => {
                self.groups.iter().filter(|g| g.len() > 1).fold(ProbeSet::empty(), |acc, g| acc | *g)
            }
        }
    }

    /// A node is a leaf once exactly one probe set is admissible. The
    /// multi-element root has no groups yet and is never a leaf.
    pub fn is_leaf(&self, n: usize) -> bool {
        match self.kind {
            StateKind::SingleElement => (self.s0 | self.s1) == ProbeSet::full(n),
            StateKind::MultiElement => {
                let covered = self.groups.iter().fold(self.s0, |acc, g| acc | *g);
                covered == ProbeSet::full(n) && self.groups.iter().all(|g| g.len() == 1)
            }
        }
    }

    /// Text form for logs: `s0/s1/groups`, groups separated by `|`.
    pub fn encode(&self) -> String {
        let groups = if self.groups.is_empty() {
            "-".to_string()
        } else {
            self.groups.iter().map(|g| g.encode()).collect::<Vec<_>>().join("|")
        };
        format!("{}/{}/{}", self.s0.encode(), self.s1.encode(), groups)
    }
}

/// One term of an `F(S)` evaluation: an observed `eta_S` (unprobed
/// coordinates hold 0), its weight, and the conditional recourse value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub eta: Vec<f64>,
    pub weight: f64,
    pub value: f64,
}

/// An `F(S)` value plus the per-outcome terms behind it, which the search
/// reuses to score branching candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct FEvaluation {
    pub estimate: BoundEstimate,
    pub points: Vec<EvalPoint>,
}

/// Strategy for evaluating `F(S)` at search nodes.
pub trait FEvaluator: Send + Sync {
    /// `node` names the calling node so that sampling evaluators can draw a
    /// fresh, reproducible sample per node.
    fn evaluate(&self, inst: &Instance, set: ProbeSet, node: u64, work: &WorkCounter) -> Result<FEvaluation>;

    fn mode(&self) -> EstimateMode;

    fn memo_stats(&self) -> Option<MemoStats> {
        None
    }
}

/// Exact `F(S)` by enumerating the support. Only for finite supports.
#[derive(Clone, Debug, Default)]
pub struct ExactEvaluator {
    pub backend: Backend,
}

impl FEvaluator for ExactEvaluator {
    fn evaluate(&self, inst: &Instance, set: ProbeSet, _node: u64, work: &WorkCounter) -> Result<FEvaluation> {
        work.add_f_eval();
        f_exact_detailed(inst, set, &self.backend, work)
    }

    fn mode(&self) -> EstimateMode {
        EstimateMode::Exact
    }
}

/// `F(S) = sum over outcomes of P(eta_S) R(eta_S)`, each `R` solved exactly.
pub fn f_exact(inst: &Instance, set: ProbeSet, backend: &Backend) -> Result<BoundEstimate> {
    Ok(f_exact_detailed(inst, set, backend, &WorkCounter::new())?.estimate)
}

pub fn f_exact_detailed(inst: &Instance, set: ProbeSet, backend: &Backend, work: &WorkCounter) -> Result<FEvaluation> {
    let outcomes = enumerate_support_projection(inst, set)?;
    let points: Vec<EvalPoint> = outcomes
        .into_par_iter()
        .map(|(obs, p)| -> Result<EvalPoint> {
            let scenarios = enumerate_conditional_support(inst, &obs)?;
            let r = solve_counted(inst, &scenarios, backend, work)?;
            Ok(EvalPoint { eta: obs.iter().map(|v| v.unwrap_or(0.0)).collect(), weight: p, value: r.value })
        })
        .collect::<Result<_>>()?;
    let value = points.iter().map(|pt| pt.weight * pt.value).sum();
    Ok(FEvaluation { estimate: BoundEstimate::exact(value), points })
}

/// Node bounds given `F([n] \ S0)`:
/// `lb = F - alpha([n] \ S0)` and `ub = F - penalty`, where the penalty is
/// `alpha(S1)` for single-element nodes and the sum of the cheapest probe of
/// each group for multi-element nodes.
pub fn bounds_from_f(inst: &Instance, state: &ProbeState, f_full: BoundEstimate) -> (BoundEstimate, BoundEstimate) {
    let full = state.full_probe(inst.n_customers());
    (f_full.shifted(-alpha(inst, full)), f_full.shifted(-state.ub_penalty(inst)))
}

pub fn node_bounds_single(
    inst: &Instance,
    state: &ProbeState,
    eval: &dyn FEvaluator,
    work: &WorkCounter,
) -> Result<(BoundEstimate, BoundEstimate)> {
    if state.kind != StateKind::SingleElement {
        return Err(Error::InvalidArgument("expected a single-element state".into()));
    }
    state.validate(inst.n_customers())?;
    let f = eval.evaluate(inst, state.full_probe(inst.n_customers()), 0, work)?;
    Ok(bounds_from_f(inst, state, f.estimate))
}

pub fn node_bounds_multi(
    inst: &Instance,
    state: &ProbeState,
    eval: &dyn FEvaluator,
    work: &WorkCounter,
) -> Result<(BoundEstimate, BoundEstimate)> {
    if state.kind != StateKind::MultiElement {
        return Err(Error::InvalidArgument("expected a multi-element state".into()));
    }
    state.validate(inst.n_customers())?;
    let f = eval.evaluate(inst, state.full_probe(inst.n_customers()), 0, work)?;
    Ok(bounds_from_f(inst, state, f.estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DistributionKind, Scenario};
    use crate::stochprog::solve_two_stage;
    use proptest::prelude::*;

    fn small(n: usize, seed: u64) -> Instance {
        generate_instance(2, 2, n, DistributionKind::Bernoulli, seed)
    }

    #[test]
    fn alpha_is_modular() {
        let mut inst = small(3, 1);
        inst.customers[0].probe_cost = 5.0;
        inst.customers[1].probe_cost = 7.0;
        assert_eq!(alpha(&inst, ProbeSet::empty()), 0.0);
        assert_eq!(alpha(&inst, [0, 1].into_iter().collect()), 12.0);
    }

    proptest! {
        #[test]
        fn alpha_adds_over_disjoint_sets(a in 0u64..64, b in 0u64..64) {
            let inst = small(6, 2);
            let s = ProbeSet::from_bits(a);
            let t = ProbeSet::from_bits(b).difference(s);
            prop_assert!((alpha(&inst, s) + alpha(&inst, t) - alpha(&inst, s | t)).abs() < 1e-9);
        }
    }

    #[test]
    fn f_extremes_match_direct_solves() {
        let inst = small(3, 4);
        let b = Backend::default();
        let all = enumerate_conditional_support(&inst, &[None, None, None]).unwrap();
        let none = f_exact(&inst, ProbeSet::empty(), &b).unwrap();
        let direct = solve_two_stage(&inst, &all, &b).unwrap().value;
        assert!((none.mean - direct).abs() < 1e-9);
        assert_eq!(none.stderr, 0.0);

        let pi: f64 = all
            .iter()
            .map(|s| {
                let one = Scenario { demand: s.demand.clone(), weight: 1.0 };
                s.weight * solve_two_stage(&inst, &[one], &b).unwrap().value
            })
            .sum();
        let full = f_exact(&inst, ProbeSet::full(3), &b).unwrap();
        assert!((full.mean - pi).abs() < 1e-9);

        let mid = f_exact(&inst, ProbeSet::singleton(0), &b).unwrap().mean;
        let two = f_exact(&inst, [0, 1].into_iter().collect(), &b).unwrap().mean;
        assert!(none.mean <= mid + 1e-9 && mid <= two + 1e-9);
    }

    #[test]
    fn continuous_coordinates_refuse_enumeration() {
        let inst = generate_instance(1, 1, 2, DistributionKind::MixedTriangular, 3);
        assert!(matches!(f_exact(&inst, ProbeSet::singleton(0), &Backend::default()), Err(Error::InfiniteSupport(_))));
    }

    #[test]
    fn single_element_bounds() {
        let inst = small(3, 5);
        let ev = ExactEvaluator::default();
        let w = WorkCounter::new();
        let fpi = f_exact(&inst, ProbeSet::full(3), &ev.backend).unwrap().mean;

        let root = ProbeState::root(StateKind::SingleElement);
        let (lb, ub) = node_bounds_single(&inst, &root, &ev, &w).unwrap();
        assert!((ub.mean - fpi).abs() < 1e-9);
        assert!((lb.mean - (fpi - alpha(&inst, ProbeSet::full(3)))).abs() < 1e-9);

        let leaf = ProbeState { s0: ProbeSet::singleton(1), s1: [0, 2].into_iter().collect(), ..root.clone() };
        assert!(leaf.is_leaf(3));
        let (lb, ub) = node_bounds_single(&inst, &leaf, &ev, &w).unwrap();
        assert!((lb.mean - ub.mean).abs() < 1e-9);

        let mut free = inst.clone();
        for c in &mut free.customers {
            c.probe_cost = 0.0;
        }
        let mid = ProbeState { s1: ProbeSet::singleton(2), ..root };
        let (lb, ub) = node_bounds_single(&free, &mid, &ev, &w).unwrap();
        assert_eq!(lb.mean, ub.mean);
    }

    #[test]
    fn multi_element_penalties() {
        let mut inst = small(3, 6);
        inst.customers[0].probe_cost = 5.0;
        inst.customers[1].probe_cost = 7.0;
        let ev = ExactEvaluator::default();
        let w = WorkCounter::new();
        let root = ProbeState::root(StateKind::MultiElement);
        let (_, ub) = node_bounds_multi(&inst, &root, &ev, &w).unwrap();
        let fpi = f_exact(&inst, ProbeSet::full(3), &ev.backend).unwrap().mean;
        assert!((ub.mean - fpi).abs() < 1e-9);

        let pair = ProbeState { groups: vec![[0, 1].into_iter().collect()], ..root.clone() };
        assert_eq!(pair.ub_penalty(&inst), 5.0);

        let one = ProbeState { groups: vec![ProbeSet::singleton(2)], ..root };
        let single = ProbeState {
            kind: StateKind::SingleElement,
            s1: ProbeSet::singleton(2),
            ..ProbeState::root(StateKind::SingleElement)
        };
        let (_, a) = node_bounds_multi(&inst, &one, &ev, &w).unwrap();
        let (_, b) = node_bounds_single(&inst, &single, &ev, &w).unwrap();
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn state_validation_and_admission() {
        let st = ProbeState {
            kind: StateKind::MultiElement,
            s0: ProbeSet::singleton(0),
            s1: ProbeSet::empty(),
            groups: vec![[1, 2].into_iter().collect(), ProbeSet::singleton(3)],
        };
        st.validate(4).unwrap();
        assert!(st.admits([1, 3].into_iter().collect()));
        assert!(!st.admits([0, 1, 3].into_iter().collect()));
        assert!(!st.admits(ProbeSet::singleton(3)));
        assert_eq!(st.candidates(4), [1, 2].into_iter().collect());
        assert_eq!(st.encode(), "0/-/1;2|3");

        let overlap = ProbeState { groups: vec![[0, 1].into_iter().collect()], ..st.clone() };
        assert!(overlap.validate(4).is_err());
        let stray = ProbeState { s1: ProbeSet::singleton(1), ..st };
        assert!(stray.validate(4).is_err());
    }

    /// At every node the admissible optimum lies between the bounds.
    #[test]
    fn bounds_sandwich_restricted_optimum() {
        let inst = small(3, 8);
        let b = Backend::default();
        let f: Vec<f64> = (0..8u64).map(|m| f_exact(&inst, ProbeSet::from_bits(m), &b).unwrap().mean).collect();
        let states = [
            ProbeState::root(StateKind::SingleElement),
            ProbeState {
                s0: ProbeSet::singleton(1),
                s1: ProbeSet::singleton(0),
                ..ProbeState::root(StateKind::SingleElement)
            },
            ProbeState { groups: vec![[0, 1, 2].into_iter().collect()], ..ProbeState::root(StateKind::MultiElement) },
            ProbeState {
                s0: ProbeSet::singleton(2),
                groups: vec![ProbeSet::singleton(0), ProbeSet::singleton(1)],
                ..ProbeState::root(StateKind::MultiElement)
            },
        ];
        for st in &states {
            let best = (0..8u64)
                .map(ProbeSet::from_bits)
                .filter(|&s| st.admits(s))
                .map(|s| f[s.bits() as usize] - alpha(&inst, s))
                .fold(f64::NEG_INFINITY, f64::max);
            let full = st.full_probe(3);
            let (lb, ub) = bounds_from_f(&inst, st, BoundEstimate::exact(f[full.bits() as usize]));
            assert!(lb.mean <= best + 1e-9 && best <= ub.mean + 1e-9, "{}", st.encode());
        }
    }
}
