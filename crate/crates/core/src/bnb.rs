//! Branch-and-bound over probe sets.
//!
//! Nodes carry a [`ProbeState`]; their bounds come from one evaluation of
//! `F([n] \ S0)` through an injected [`FEvaluator`]. Children that keep `S0`
//! reuse the parent's evaluation, so only the branches that forbid more
//! probes cost a new `F` evaluation.
//!
//! With exact evaluators (full enumeration, or a fixed external sample) the
//! search is best-bound with fathoming. With internal sampling node bounds
//! are noisy: nodes are never fathomed, the most promising one by
//! `mean + k * stderr` is expanded next, and the final bound combines all
//! open nodes.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    alpha, bounds_from_f, BoundEstimate, EstimateMode, EvalPoint, ExactEvaluator, FEvaluation, FEvaluator, ProbeState,
    StateKind,
};
use crate::error::{Error, Result};
use crate::instance::{DistributionKind, Instance, SampleSpec, Scenario};
use crate::probe::ProbeSet;
use crate::rng::{stream, tag};
use crate::sampling::{global_stat_ub, InternalEvaluator, NodeStatBound, SaaEvaluator};
use crate::stochprog::{Backend, Memo, MemoStats, DEFAULT_MEMO_CAPACITY};
use crate::work::{WorkBudget, WorkCounter, WorkSnapshot};

/// Absolute tolerance for bound comparisons.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branching {
    /// Single-element branching on a uniformly random candidate.
    Random,
    /// Single-element branching on the best-scored candidate.
    Single,
    /// Multi-element branching with scored group splits.
    Multi,
}

/// How the effect of not probing `j` is estimated when scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreOption {
    /// `E[R | d_j high] - E[R | d_j = 0]`; meant for two-point demands.
    Difference,
    /// Covariance of `d_j` with `R`.
    Covariance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exact,
    ExternalSample { sample: Vec<Scenario> },
    InternalSample { spec: SampleSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnbConfig {
    pub mode: SearchMode,
    pub branching: Branching,
    /// `None` picks the difference score when every demand is two-point
    /// and the covariance score otherwise.
    pub score: Option<ScoreOption>,
    pub budget: WorkBudget,
    pub seed: u64,
    pub backend: Backend,
    pub memo_capacity: usize,
    /// Internal sampling: node priority is `mean + priority_sigma * stderr`.
    pub priority_sigma: f64,
    /// Significance level of the final internal-sampling bound.
    pub alpha: f64,
    /// Internal sampling: batches per enumerated outcome.
    pub enum_batches: usize,
    pub enum_max_probes: Option<usize>,
    pub enum_max_support: Option<u128>,
}

impl BnbConfig {
    pub fn new(mode: SearchMode, branching: Branching) -> Self {
        BnbConfig {
            mode,
            branching,
            score: None,
            budget: WorkBudget::unlimited(),
            seed: 0,
            backend: Backend::default(),
            memo_capacity: DEFAULT_MEMO_CAPACITY,
            priority_sigma: 2.0,
            alpha: 0.05,
            enum_batches: 30,
            enum_max_probes: Some(8),
            enum_max_support: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// Exact or external mode: the incumbent is proven optimal.
    Optimal,
    /// A budget limit stopped the search.
    BudgetExhausted,
    /// Internal mode: every open node is a leaf.
    TreeExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeLogEntry {
    pub id: u64,
    pub parent: Option<u64>,
    pub depth: usize,
    pub state: String,
    pub ub: f64,
    pub ub_stderr: f64,
    pub lb: f64,
    pub lb_stderr: f64,
    /// `created`, `fathomed` or `leaf`.
    pub event: String,
    pub incumbent: f64,
    /// Best known bound on the optimum at this point (exact modes only).
    pub global_ub: Option<f64>,
    pub work_units: u64,
    pub f_evals: u64,
    pub wall_secs: f64,
}

/// A probe set met during the search with its node lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub set: ProbeSet,
    pub lb: BoundEstimate,
}

/// An open node at the end of an internal-sampling search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafBound {
    pub state: ProbeState,
    /// Deterministic part of the node bound, `-penalty`.
    pub offset: f64,
    pub bound: NodeStatBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub status: SearchStatus,
    pub mode: EstimateMode,
    pub best_set: ProbeSet,
    pub best_lb: BoundEstimate,
    /// Exact modes: proven bound on the optimum. Internal mode: the global
    /// statistical bound at level `1 - alpha`.
    pub upper_bound: f64,
    /// Root bound, i.e. the perfect information value.
    pub root_ub: BoundEstimate,
    pub candidates: Vec<Candidate>,
    pub leaves: Vec<LeafBound>,
    pub log: Vec<NodeLogEntry>,
    pub work: WorkSnapshot,
    pub memo: Option<MemoStats>,
    pub nodes: u64,
    pub wall_secs: f64,
}

/// Runs the search described by `cfg`.
pub fn run_bnb(inst: &Instance, cfg: &BnbConfig) -> Result<SearchReport> {
    let work = WorkCounter::new();
    run_bnb_counted(inst, cfg, &work)
}

/// [`run_bnb`] charging all effort to `work`.
pub fn run_bnb_counted(inst: &Instance, cfg: &BnbConfig, work: &WorkCounter) -> Result<SearchReport> {
    match &cfg.mode {
        SearchMode::Exact => {
            let ev = ExactEvaluator { backend: cfg.backend.clone() };
            run_with_evaluator(inst, &ev, cfg, work)
        }
        SearchMode::ExternalSample { sample } => {
            let ev = SaaEvaluator::new(sample.clone(), Memo::new(cfg.memo_capacity), cfg.backend.clone());
            run_with_evaluator(inst, &ev, cfg, work)
        }
        SearchMode::InternalSample { spec } => {
            let mut ev = InternalEvaluator::new(spec.clone(), cfg.backend.clone());
            ev.enum_batches = cfg.enum_batches;
            ev.enum_max_probes = cfg.enum_max_probes;
            ev.enum_max_support = cfg.enum_max_support;
            run_with_evaluator(inst, &ev, cfg, work)
        }
    }
}

struct Node {
    id: u64,
    depth: usize,
    state: ProbeState,
    f: Arc<FEvaluation>,
    ub: BoundEstimate,
    priority: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap on priority; older nodes first among ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority).then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    inst: &'a Instance,
    eval: &'a dyn FEvaluator,
    cfg: &'a BnbConfig,
    work: &'a WorkCounter,
    start: Instant,
    next_id: u64,
    statistical: bool,
    score: ScoreOption,
    heap: BinaryHeap<Node>,
    leaves: Vec<Node>,
    incumbent: Option<Candidate>,
    candidates: HashMap<ProbeSet, BoundEstimate>,
    candidate_order: Vec<ProbeSet>,
    log: Vec<NodeLogEntry>,
}

impl Search<'_> {
    fn priority(&self, ub: &BoundEstimate) -> f64 {
        if self.statistical {
            ub.mean + self.cfg.priority_sigma * ub.stderr
        } else {
            ub.mean
        }
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::NEG_INFINITY, |c| c.lb.mean)
    }

    fn global_ub(&self) -> Option<f64> {
        if self.statistical {
            return None;
        }
        let open = self.heap.peek().map_or(f64::NEG_INFINITY, |n| n.ub.mean);
        Some(open.max(self.incumbent_value()))
    }

    fn evaluate(&mut self, set: ProbeSet) -> Result<(u64, Arc<FEvaluation>)> {
        let id = self.next_id;
        self.next_id += 1;
        Ok((id, Arc::new(self.eval.evaluate(self.inst, set, id, self.work)?)))
    }

    /// Bounds a new node, records its candidate and queues it.
    fn add_node(&mut self, id: u64, parent: Option<u64>, depth: usize, state: ProbeState, f: Arc<FEvaluation>) {
        let n = self.inst.n_customers();
        self.work.add_node();
        let (lb, ub) = bounds_from_f(self.inst, &state, f.estimate);
        let full = state.full_probe(n);
        if !self.candidates.contains_key(&full) {
            self.candidates.insert(full, lb);
            self.candidate_order.push(full);
        }
        if lb.mean > self.incumbent_value() + BOUND_TOL {
            self.incumbent = Some(Candidate { set: full, lb });
        }

        let leaf = state.is_leaf(n);
        let fathom = !self.statistical && ub.mean <= self.incumbent_value() + BOUND_TOL;
        let node = Node { id, depth, priority: self.priority(&ub), state, f, ub };
        let event = if fathom {
            "fathomed"
        } else if leaf {
            "leaf"
        } else {
            "created"
        };
        let snap = self.work.snapshot();
        let mut entry = NodeLogEntry {
            id,
            parent,
            depth,
            state: node.state.encode(),
            ub: ub.mean,
            ub_stderr: ub.stderr,
            lb: lb.mean,
            lb_stderr: lb.stderr,
            event: event.into(),
            incumbent: self.incumbent_value(),
            global_ub: None,
            work_units: snap.work_units(),
            f_evals: snap.f_evals,
            wall_secs: self.start.elapsed().as_secs_f64(),
        };
        if !fathom {
            if leaf {
                if self.statistical {
                    self.leaves.push(node);
                }
            } else {
                self.heap.push(node);
            }
        }
        entry.global_ub = self.global_ub();
        self.log.push(entry);
    }

    fn choose_single(&self, node: &Node) -> usize {
        let cands = node.state.candidates(self.inst.n_customers());
        match self.cfg.branching {
            Branching::Random => {
                let list: Vec<usize> = cands.iter().collect();
                let mut rng = stream(self.cfg.seed, &[tag::BRANCH, node.id]);
                list[rng.random_range(0..list.len())]
            }
            _ => select_branching(&score_candidates(self.inst, cands, &node.f.points, self.score)),
        }
    }

    fn expand(&mut self, node: Node) -> Result<()> {
        let parent = Some(node.id);
        let depth = node.depth + 1;
        match node.state.kind {
            StateKind::SingleElement => {
                let j = self.choose_single(&node);
                let (plus, minus) = branch_single(&node.state, j);
                let (id, f) = self.evaluate(minus.full_probe(self.inst.n_customers()))?;
                self.add_node(id, parent, depth, minus, f);
                let id = self.next_id;
                self.next_id += 1;
                self.add_node(id, parent, depth, plus, Arc::clone(&node.f));
            }
            StateKind::MultiElement if node.state.groups.is_empty() => {
                let [none, some] = branch_multi_root(&node.state, self.inst.n_customers());
                let (id, f) = self.evaluate(ProbeSet::empty())?;
                self.add_node(id, parent, depth, none, f);
                let id = self.next_id;
                self.next_id += 1;
                self.add_node(id, parent, depth, some, Arc::clone(&node.f));
            }
            StateKind::MultiElement => {
                let t = largest_group(&node.state.groups);
                let group = node.state.groups[t];
                let scores = score_candidates(self.inst, group, &node.f.points, self.score);
                let k = partition_group(&scores);
                let [c1, c2, c3] = branch_multi(&node.state, t, k);
                for child in [c1, c2] {
                    let (id, f) = self.evaluate(child.full_probe(self.inst.n_customers()))?;
                    self.add_node(id, parent, depth, child, f);
                }
                let id = self.next_id;
                self.next_id += 1;
                self.add_node(id, parent, depth, c3, Arc::clone(&node.f));
            }
        }
        Ok(())
    }
}

/// Searches with a caller-supplied evaluator.
pub fn run_with_evaluator(
    inst: &Instance,
    eval: &dyn FEvaluator,
    cfg: &BnbConfig,
    work: &WorkCounter,
) -> Result<SearchReport> {
    inst.validate()?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in (0, 1)".into()));
    }
    let n = inst.n_customers();
    let statistical = eval.mode() == EstimateMode::Statistical;
    let score =
        cfg.score.unwrap_or(if inst.customers.iter().all(|c| c.distribution.kind() == DistributionKind::Bernoulli) {
            ScoreOption::Difference
        } else {
            ScoreOption::Covariance
        });
    let kind = match cfg.branching {
        Branching::Multi => StateKind::MultiElement,
        _ => StateKind::SingleElement,
    };
    let start = Instant::now();
    let base = work.snapshot();
    let mut s = Search {
        inst,
        eval,
        cfg,
        work,
        start,
        next_id: 0,
        statistical,
        score,
        heap: BinaryHeap::new(),
        leaves: Vec::new(),
        incumbent: None,
        candidates: HashMap::new(),
        candidate_order: Vec::new(),
        log: Vec::new(),
    };

    let root_state = ProbeState::root(kind);
    let (id, f) = s.evaluate(ProbeSet::full(n))?;
    let root_ub = bounds_from_f(inst, &root_state, f.estimate).1;
    s.add_node(id, None, 0, root_state, f);

    let mut status = if statistical { SearchStatus::TreeExhausted } else { SearchStatus::Optimal };
    loop {
        if s.heap.is_empty() {
            break;
        }
        let used = work.snapshot().since(&base);
        if cfg.budget.exhausted(&used, start) {
            status = SearchStatus::BudgetExhausted;
            break;
        }
        let node = s.heap.pop().expect("nonempty heap");
        if !statistical && node.ub.mean <= s.incumbent_value() + BOUND_TOL {
            continue;
        }
        s.expand(node)?;
    }

    let upper_bound = if statistical {
        let open: Vec<(f64, NodeStatBound)> = s
            .heap
            .iter()
            .chain(s.leaves.iter())
            .map(|nd| (nd.ub.mean - nd.f.estimate.mean, stat_bound(&nd.f.estimate)))
            .collect();
        global_stat_ub(&open, cfg.alpha)
    } else {
        s.global_ub().unwrap_or(f64::NEG_INFINITY)
    };
    let mut leaves: Vec<LeafBound> = s
        .heap
        .into_sorted_vec()
        .into_iter()
        .rev()
        .chain(s.leaves)
        .filter(|_| statistical)
        .map(|nd| LeafBound {
            offset: nd.ub.mean - nd.f.estimate.mean,
            bound: stat_bound(&nd.f.estimate),
            state: nd.state,
        })
        .collect();
    leaves.sort_by(|a, b| (b.offset + b.bound.mu).total_cmp(&(a.offset + a.bound.mu)));

    let incumbent = s.incumbent.expect("root always yields a candidate");
    let candidates = s.candidate_order.iter().map(|set| Candidate { set: *set, lb: s.candidates[set] }).collect();
    let used = work.snapshot().since(&base);
    Ok(SearchReport {
        status,
        mode: eval.mode(),
        best_set: incumbent.set,
        best_lb: incumbent.lb,
        upper_bound,
        root_ub,
        candidates,
        leaves,
        log: s.log,
        work: used,
        memo: eval.memo_stats(),
        nodes: used.nodes,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

fn stat_bound(b: &BoundEstimate) -> NodeStatBound {
    NodeStatBound { mu: b.mean, s: b.stderr, batches: b.batches }
}

/// Single-element children `(plus, minus)`: `j` forced in or forced out.
pub fn branch_single(state: &ProbeState, j: usize) -> (ProbeState, ProbeState) {
    debug_assert!(!state.s0.contains(j) && !state.s1.contains(j));
    let plus = ProbeState { s1: state.s1.with(j), ..state.clone() };
    let minus = ProbeState { s0: state.s0.with(j), ..state.clone() };
    (plus, minus)
}

/// The first multi-element split: probe nothing, or at least one of `[n]`.
pub fn branch_multi_root(state: &ProbeState, n: usize) -> [ProbeState; 2] {
    let none = ProbeState { s0: ProbeSet::full(n), ..state.clone() };
    let some = ProbeState { groups: vec![ProbeSet::full(n)], ..state.clone() };
    [none, some]
}

/// Trichotomy on group `groups[t] = T` with `K ⊂ T`: none of `K` but some
/// of `T \ K`; none of `T \ K` but some of `K`; some of both.
pub fn branch_multi(state: &ProbeState, t: usize, k: ProbeSet) -> [ProbeState; 3] {
    let group = state.groups[t];
    let rest = group.difference(k);
    debug_assert!(!k.is_empty() && !rest.is_empty() && k.is_subset(group));
    let others: Vec<ProbeSet> = state.groups.iter().enumerate().filter(|&(i, _)| i != t).map(|(_, g)| *g).collect();
    let with = |extra: &[ProbeSet]| {
        let mut g = others.clone();
        g.extend_from_slice(extra);
        g.sort_by_key(|s| s.min_element());
        g
    };
    [
        ProbeState { s0: state.s0 | k, groups: with(&[rest]), ..state.clone() },
        ProbeState { s0: state.s0 | rest, groups: with(&[k]), ..state.clone() },
        ProbeState { groups: with(&[k, rest]), ..state.clone() },
    ]
}

/// Index of the group with the most elements; earliest group among ties.
pub fn largest_group(groups: &[ProbeSet]) -> usize {
    let mut best = 0;
    for (i, g) in groups.iter().enumerate() {
        if g.len() > groups[best].len() {
            best = i;
        }
    }
    best
}

/// Rescales to `[0, 1]`; a constant vector maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Estimated drop in `F` from not observing `j`, computed from the terms of
/// the current node's evaluation.
pub fn delta_minus(j: usize, points: &[EvalPoint], option: ScoreOption) -> f64 {
    match option {
        ScoreOption::Difference => {
            let (mut wh, mut vh, mut wl, mut vl) = (0.0, 0.0, 0.0, 0.0);
            for p in points {
                if p.eta[j] > 0.0 {
                    wh += p.weight;
                    vh += p.weight * p.value;
                } else {
                    wl += p.weight;
                    vl += p.weight * p.value;
                }
            }
            if wh > 0.0 && wl > 0.0 {
                vh / wh - vl / wl
            } else {
                0.0
            }
        }
        ScoreOption::Covariance => {
            let total: f64 = points.iter().map(|p| p.weight).sum();
            if total <= 0.0 {
                return 0.0;
            }
            let m = points.iter().map(|p| p.weight * p.eta[j]).sum::<f64>() / total;
            let f = points.iter().map(|p| p.weight * p.value).sum::<f64>() / total;
            points.iter().map(|p| p.weight * (p.eta[j] - m) * (p.value - f)).sum::<f64>() / total
        }
    }
}

/// Branching score `psi_j` for each candidate, in index order.
pub fn score_candidates(
    inst: &Instance,
    candidates: ProbeSet,
    points: &[EvalPoint],
    option: ScoreOption,
) -> Vec<(usize, f64)> {
    let idx: Vec<usize> = candidates.iter().collect();
    let plus: Vec<f64> = idx.iter().map(|&j| -alpha(inst, ProbeSet::singleton(j))).collect();
    let minus: Vec<f64> = idx.iter().map(|&j| delta_minus(j, points, option)).collect();
    let zp = min_max_normalize(&plus);
    let zm = min_max_normalize(&minus);
    idx.into_iter().zip(zp.iter().zip(&zm).map(|(a, b)| a + b)).collect()
}

/// Highest-scored index; the lowest index wins ties.
pub fn select_branching(scores: &[(usize, f64)]) -> usize {
    let mut best = scores[0];
    for &(j, s) in &scores[1..] {
        if s > best.1 || (s == best.1 && j < best.0) {
            best = (j, s);
        }
    }
    best.0
}

/// Odd-ranked elements (first, third, ...) after sorting by score
/// descending, ties by index.
pub fn partition_group(scores: &[(usize, f64)]) -> ProbeSet {
    assert!(scores.len() >= 2, "cannot split a group of fewer than two elements");
    let mut order = scores.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.iter().step_by(2).map(|&(j, _)| j).collect()
}
