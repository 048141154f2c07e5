//! Sampling estimators of `F(S)` and of the overall optimum.
//!
//! * External sampling fixes one joint sample and solves the sampled problem
//!   exactly; replications give a confidence upper bound on the optimum.
//! * Internal sampling draws a fresh nested sample at every node. Node
//!   values are biased upward, so they are statistical upper bounds.
//! * [`stat_lb`] evaluates a probe set by selecting plans on one sample and
//!   scoring them on another, which is biased downward.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundEstimate, EstimateMode, EvalPoint, FEvaluation, FEvaluator};
use crate::error::{Error, Result};
use crate::instance::{
    enumerate_support_projection, project, projection_support_size, sample_conditional, sample_joint, Instance,
    SampleMode, SampleSpec, Scenario,
};
use crate::probe::ProbeSet;
use crate::recourse::plan_value;
use crate::rng::{stream, tag};
use crate::stats::{mean, normal_cdf, sample_std, sample_variance, t_critical};
use crate::stochprog::{solve_counted, Backend, Memo, MemoKey, MemoStats};
use crate::work::WorkCounter;

/// Sampled `F_N(S)` on a fixed sample.
///
/// Sample points are grouped by their `S`-projection. Each group is solved
/// as its own equally weighted scenario list and cached under the group's
/// index set, so two probe sets inducing the same group share the solve.
pub fn saa_f(
    inst: &Instance,
    set: ProbeSet,
    sample: &[Scenario],
    memo: &Memo,
    backend: &Backend,
    work: &WorkCounter,
) -> Result<FEvaluation> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let n = sample.len();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, s) in sample.iter().enumerate() {
        let key: Vec<u64> = set.iter().map(|j| s.demand[j].to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(k);
    }

    let points: Vec<EvalPoint> = groups
        .par_iter()
        .map(|idx| -> Result<EvalPoint> {
            let key = MemoKey::from_indices(idx, n);
            let (res, _) = memo.lookup_or_solve(key, || {
                let w = 1.0 / idx.len() as f64;
                let scen: Vec<Scenario> =
                    idx.iter().map(|&k| Scenario { demand: sample[k].demand.clone(), weight: w }).collect();
                solve_counted(inst, &scen, backend, work)
            })?;
            let eta = project(&sample[idx[0]].demand, set).iter().map(|v| v.unwrap_or(0.0)).collect();
            Ok(EvalPoint { eta, weight: idx.len() as f64 / n as f64, value: res.value })
        })
        .collect::<Result<_>>()?;
    let value = points.iter().map(|p| p.weight * p.value).sum();
    Ok(FEvaluation { estimate: BoundEstimate::exact(value), points })
}

/// External-sampling evaluator: exact relative to its fixed sample.
pub struct SaaEvaluator {
    pub sample: Vec<Scenario>,
    pub memo: Memo,
    pub backend: Backend,
}

impl SaaEvaluator {
    pub fn new(sample: Vec<Scenario>, memo: Memo, backend: Backend) -> Self {
        SaaEvaluator { sample, memo, backend }
    }
}

impl FEvaluator for SaaEvaluator {
    fn evaluate(&self, inst: &Instance, set: ProbeSet, _node: u64, work: &WorkCounter) -> Result<FEvaluation> {
        work.add_f_eval();
        saa_f(inst, set, &self.sample, &self.memo, &self.backend, work)
    }

    fn mode(&self) -> EstimateMode {
        EstimateMode::Exact
    }

    fn memo_stats(&self) -> Option<MemoStats> {
        Some(self.memo.stats())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub v: f64,
    pub n: usize,
    pub seed: u64,
    pub work_units: u64,
    /// False when the replication stopped at its budget and `v` is the
    /// search tree's upper bound.
    pub solved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub rows: Vec<ReplicationRow>,
    pub mean: f64,
    pub std: f64,
    /// Significance level of `ci_upper`.
    pub alpha: f64,
    pub ci_upper: f64,
}

impl ReplicationSummary {
    /// Summary statistics of per-replication optimal values.
    pub fn from_rows(rows: Vec<ReplicationRow>, alpha: f64) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument("need at least two replications".into()));
        }
        let values: Vec<f64> = rows.iter().map(|r| r.v).collect();
        let l = values.len();
        let m = mean(&values);
        let s = sample_std(&values);
        Ok(ReplicationSummary {
            rows,
            mean: m,
            std: s,
            alpha,
            ci_upper: m + t_critical(l - 1, alpha) * s / (l as f64).sqrt(),
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.v).collect()
    }
}

/// What one sampled-problem solve reports back to [`saa_replicate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicationOutcome {
    /// Optimal value, or the tree upper bound if the solve hit its budget.
    pub value: f64,
    pub solved: bool,
    pub work_units: u64,
}

/// Joint sample used by replication `l`.
pub fn replication_sample(inst: &Instance, n: usize, mode: SampleMode, seed: u64, l: usize) -> Vec<Scenario> {
    let mut rng = stream(seed, &[tag::REPLICATION, l as u64, tag::JOINT]);
    sample_joint(inst, n, mode, &mut rng)
}

/// Runs `solve` on `l` independent joint samples of size `n`.
pub fn saa_replicate<F>(
    inst: &Instance,
    n: usize,
    l: usize,
    mode: SampleMode,
    seed: u64,
    alpha: f64,
    solve: F,
) -> Result<ReplicationSummary>
where
    F: Fn(usize, &[Scenario]) -> Result<ReplicationOutcome> + Sync,
{
    if n == 0 || l < 2 {
        return Err(Error::InvalidArgument("need n >= 1 and at least two replications".into()));
    }
    let rows: Vec<ReplicationRow> = (0..l)
        .into_par_iter()
        .map(|r| -> Result<ReplicationRow> {
            let sample = replication_sample(inst, n, mode, seed, r);
            let out = solve(r, &sample)?;
            Ok(ReplicationRow { replication: r, v: out.value, n, seed, work_units: out.work_units, solved: out.solved })
        })
        .collect::<Result<_>>()?;
    ReplicationSummary::from_rows(rows, alpha)
}

/// A node's statistical upper bound on `F(S)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeStatBound {
    pub mu: f64,
    pub s: f64,
    pub batches: usize,
}

impl NodeStatBound {
    pub fn estimate(&self) -> BoundEstimate {
        BoundEstimate::statistical(self.mu, self.s, self.batches)
    }
}

fn eta_of(obs: &[Option<f64>]) -> Vec<f64> {
    obs.iter().map(|v| v.unwrap_or(0.0)).collect()
}

/// Nested-sampling estimate of `F(S)`.
///
/// The outer sample of `eta_S` has `spec.n1` points in `spec.batches`
/// independent batches, each batch stratified per `spec.mode`. Every outer
/// point gets its own conditional sample of size `spec.n2`. `path` selects
/// the random streams, so distinct callers should pass distinct paths.
pub fn internal_ub(
    inst: &Instance,
    set: ProbeSet,
    spec: &SampleSpec,
    backend: &Backend,
    path: &[u64],
    work: &WorkCounter,
) -> Result<(NodeStatBound, Vec<EvalPoint>)> {
    spec.validate()?;
    if spec.batches < 2 || spec.n1 % spec.batches != 0 {
        return Err(Error::InvalidArgument(format!(
            "outer size {} must split into at least two equal batches (got {})",
            spec.n1, spec.batches
        )));
    }
    let per = spec.n1 / spec.batches;
    let outer: Vec<(usize, usize, Vec<Option<f64>>)> = (0..spec.batches)
        .flat_map(|b| {
            let mut rng = stream(spec.seed, &[path, &[tag::OUTER, b as u64]].concat());
            sample_joint(inst, per, spec.mode, &mut rng)
                .into_iter()
                .enumerate()
                .map(move |(k, s)| (b, k, project(&s.demand, set)))
                .collect::<Vec<_>>()
        })
        .collect();

    let values: Vec<f64> = outer
        .par_iter()
        .map(|(b, k, obs)| -> Result<f64> {
            let mut rng = stream(spec.seed, &[path, &[tag::INNER, *b as u64, *k as u64]].concat());
            let inner = sample_conditional(inst, obs, spec.n2, spec.mode, &mut rng)?;
            Ok(solve_counted(inst, &inner, backend, work)?.value)
        })
        .collect::<Result<_>>()?;

    let batch_means: Vec<f64> = values.chunks(per).map(mean).collect();
    let bound = NodeStatBound {
        mu: mean(&values),
        s: sample_std(&batch_means) / (spec.batches as f64).sqrt(),
        batches: spec.batches,
    };
    let w = 1.0 / values.len() as f64;
    let points = outer
        .iter()
        .zip(&values)
        .map(|((_, _, obs), &value)| EvalPoint { eta: eta_of(obs), weight: w, value })
        .collect();
    Ok((bound, points))
}

/// Internal estimate with the outer expectation enumerated.
///
/// Each outcome `eta_S^k` (probability `p_k`) gets `m` independent
/// conditional batches of size `n2`; the standard error combines the
/// per-outcome batch variances with weights `p_k^2`.
#[allow(clippy::too_many_arguments)]
pub fn internal_ub_enumerated(
    inst: &Instance,
    set: ProbeSet,
    m: usize,
    n2: usize,
    mode: SampleMode,
    seed: u64,
    backend: &Backend,
    path: &[u64],
    work: &WorkCounter,
) -> Result<(NodeStatBound, Vec<EvalPoint>)> {
    if m < 2 || n2 == 0 {
        return Err(Error::InvalidArgument("need at least two batches and n2 >= 1".into()));
    }
    let outcomes = enumerate_support_projection(inst, set)?;
    let per_outcome: Vec<(f64, f64)> = outcomes
        .par_iter()
        .enumerate()
        .map(|(k, (obs, _))| -> Result<(f64, f64)> {
            let vals: Vec<f64> = (0..m)
                .map(|i| -> Result<f64> {
                    let mut rng = stream(seed, &[path, &[tag::INNER, k as u64, i as u64]].concat());
                    let inner = sample_conditional(inst, obs, n2, mode, &mut rng)?;
                    Ok(solve_counted(inst, &inner, backend, work)?.value)
                })
                .collect::<Result<_>>()?;
            Ok((mean(&vals), sample_variance(&vals)))
        })
        .collect::<Result<_>>()?;

    let mu = outcomes.iter().zip(&per_outcome).map(|((_, p), (r, _))| p * r).sum();
    let var: f64 = outcomes.iter().zip(&per_outcome).map(|((_, p), (_, v))| p * p * v).sum::<f64>() / m as f64;
    let points = outcomes
        .iter()
        .zip(&per_outcome)
        .map(|((obs, p), &(r, _))| EvalPoint { eta: eta_of(obs), weight: *p, value: r })
        .collect();
    Ok((NodeStatBound { mu, s: var.sqrt(), batches: m }, points))
}

/// Internal-sampling evaluator. Outcome enumeration replaces the outer
/// sample when `eta_S` has finite support within both caps.
pub struct InternalEvaluator {
    pub spec: SampleSpec,
    pub backend: Backend,
    /// Batches per outcome in the enumerated variant.
    pub enum_batches: usize,
    /// Largest `|S|` for which outcomes are enumerated.
    pub enum_max_probes: Option<usize>,
    /// Largest support size of `eta_S` for which outcomes are enumerated.
    pub enum_max_support: Option<u128>,
}

impl InternalEvaluator {
    pub fn new(spec: SampleSpec, backend: Backend) -> Self {
        InternalEvaluator { spec, backend, enum_batches: 30, enum_max_probes: Some(8), enum_max_support: None }
    }

    pub fn enumerates(&self, inst: &Instance, set: ProbeSet) -> bool {
        let Ok(size) = projection_support_size(inst, set) else {
            return false;
        };
        self.enum_max_probes.is_none_or(|c| set.len() <= c) && self.enum_max_support.is_none_or(|c| size <= c)
    }

    pub fn bound(
        &self,
        inst: &Instance,
        set: ProbeSet,
        node: u64,
        work: &WorkCounter,
    ) -> Result<(NodeStatBound, Vec<EvalPoint>)> {
        let path = [tag::NODE, node];
        if self.enumerates(inst, set) {
            internal_ub_enumerated(
                inst,
                set,
                self.enum_batches,
                self.spec.n2,
                self.spec.mode,
                self.spec.seed,
                &self.backend,
                &path,
                work,
            )
        } else {
            internal_ub(inst, set, &self.spec, &self.backend, &path, work)
        }
    }
}

impl FEvaluator for InternalEvaluator {
    fn evaluate(&self, inst: &Instance, set: ProbeSet, node: u64, work: &WorkCounter) -> Result<FEvaluation> {
        work.add_f_eval();
        let (b, points) = self.bound(inst, set, node, work)?;
        Ok(FEvaluation { estimate: b.estimate(), points })
    }

    fn mode(&self) -> EstimateMode {
        EstimateMode::Statistical
    }
}

/// Smallest `u` with `prod_P Phi((u - (c_P + mu_P)) / s_P) >= 1 - alpha`.
///
/// Each leaf `P` contributes an offset `c_P` and a node bound; leaves with
/// zero standard error act as point masses.
pub fn global_stat_ub(leaves: &[(f64, NodeStatBound)], alpha: f64) -> f64 {
    assert!(!leaves.is_empty(), "no leaves");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let target = 1.0 - alpha;
    let centers: Vec<f64> = leaves.iter().map(|(c, b)| c + b.mu).collect();
    let lo_c = centers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_c = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smax = leaves.iter().map(|(_, b)| b.s).fold(0.0, f64::max);
    if smax == 0.0 {
        return hi_c;
    }
    let prob = |u: f64| -> f64 {
        leaves
            .iter()
            .zip(&centers)
            .map(|((_, b), &c)| {
                if b.s > 0.0 {
                    normal_cdf((u - c) / b.s)
                } else if u >= c {
                    1.0
                } else {
                    0.0
                }
            })
            .product()
    };
    let mut lo = lo_c - 10.0 * smax;
    let mut hi = hi_c + 10.0 * smax;
    let mut width = hi - lo;
    while prob(hi) < target {
        hi += width;
        width *= 2.0;
    }
    while prob(lo) >= target {
        lo -= width;
        width *= 2.0;
    }
    let tol = 1e-6 * hi.abs().max(lo.abs()).max(1.0) * 1e-3;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if prob(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Statistical lower bound on `F(S)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatLowerBound {
    pub estimate: BoundEstimate,
    /// One-sided `1 - alpha` lower confidence limit.
    pub lower: f64,
    pub alpha: f64,
    pub values: Vec<f64>,
}

/// Lower bound on `F(S)` from `spec.n1` i.i.d. outer draws of `eta_S`.
///
/// For each draw a plan is chosen on a conditional sample of size `spec.n3`
/// and evaluated on an independent conditional sample of size `spec.n2`.
/// Any plan is feasible for its observation, so each value is an unbiased
/// estimate of something no larger than `R(eta_S)`.
pub fn stat_lb(
    inst: &Instance,
    set: ProbeSet,
    spec: &SampleSpec,
    backend: &Backend,
    alpha: f64,
    work: &WorkCounter,
) -> Result<StatLowerBound> {
    spec.validate()?;
    if spec.n1 < 2 {
        return Err(Error::InvalidArgument("stat_lb needs at least two outer draws".into()));
    }
    let mut rng = stream(spec.seed, &[tag::OUTER]);
    let outer = sample_joint(inst, spec.n1, SampleMode::Mc, &mut rng);
    let values: Vec<f64> = outer
        .par_iter()
        .enumerate()
        .map(|(k, s)| -> Result<f64> {
            let obs = project(&s.demand, set);
            let mut sel = stream(spec.seed, &[tag::SELECT, k as u64]);
            let choose = sample_conditional(inst, &obs, spec.n3, spec.mode, &mut sel)?;
            let plan = solve_counted(inst, &choose, backend, work)?.solution;
            let mut ev = stream(spec.seed, &[tag::EVAL, k as u64]);
            let eval = sample_conditional(inst, &obs, spec.n2, spec.mode, &mut ev)?;
            work.add_recourse(eval.len() as u64);
            plan_value(inst, &plan, &eval)
        })
        .collect::<Result<_>>()?;
    let m = mean(&values);
    let s = sample_std(&values);
    let n1 = values.len() as f64;
    Ok(StatLowerBound {
        estimate: BoundEstimate::statistical(m, s / n1.sqrt(), values.len()),
        lower: m - t_critical(values.len() - 1, alpha) * s / n1.sqrt(),
        alpha,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::f_exact;
    use crate::instance::{generate_instance, DemandDistribution, DistributionKind};
    use crate::stochprog::solve_two_stage;

    fn degenerate(n: usize) -> Instance {
        let mut inst = generate_instance(2, 2, n, DistributionKind::Bernoulli, 11);
        for (j, c) in inst.customers.iter_mut().enumerate() {
            if let DemandDistribution::Bernoulli { nominal, .. } = c.distribution {
                c.distribution = DemandDistribution::Bernoulli { rho: if j % 2 == 0 { 0.0 } else { 1.0 }, nominal };
            }
        }
        inst
    }

    fn spec(n1: usize, n2: usize, n3: usize, batches: usize, seed: u64) -> SampleSpec {
        SampleSpec { n1, n2, n3, batches, mode: SampleMode::Lhs, seed }
    }

    #[test]
    fn saa_groups_by_projection() {
        let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, 2);
        let sample = replication_sample(&inst, 20, SampleMode::Lhs, 5, 0);
        let b = Backend::default();
        let w = WorkCounter::new();
        let memo = Memo::new(100);
        let none = saa_f(&inst, ProbeSet::empty(), &sample, &memo, &b, &w).unwrap();
        assert_eq!(none.points.len(), 1);
        let direct = solve_two_stage(&inst, &sample, &b).unwrap().value;
        assert!((none.estimate.mean - direct).abs() < 1e-9);

        let one = saa_f(&inst, ProbeSet::singleton(0), &sample, &memo, &b, &w).unwrap();
        assert!(one.points.len() <= 2);
        assert!((one.points.iter().map(|p| p.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(one.estimate.mean >= none.estimate.mean - 1e-9);

        // Repeating an evaluation is served from the cache.
        let before = memo.stats();
        let again = saa_f(&inst, ProbeSet::singleton(0), &sample, &memo, &b, &w).unwrap();
        assert_eq!(again.estimate, one.estimate);
        assert_eq!(memo.stats().hits - before.hits, one.points.len() as u64);
    }

    #[test]
    fn continuous_samples_collapse_to_perfect_information() {
        let inst = generate_instance(2, 2, 4, DistributionKind::MixedTriangular, 3);
        let sample = replication_sample(&inst, 15, SampleMode::Lhs, 1, 0);
        let b = Backend::default();
        let w = WorkCounter::new();
        let memo = Memo::new(1000);
        let pi = saa_f(&inst, ProbeSet::full(4), &sample, &memo, &b, &w).unwrap();
        assert_eq!(pi.points.len(), 15);
        let s = saa_f(&inst, ProbeSet::singleton(2), &sample, &memo, &b, &w).unwrap();
        assert_eq!(s.estimate.mean, pi.estimate.mean);
    }

    #[test]
    fn replication_summary_arithmetic() {
        let rows: Vec<ReplicationRow> = [3.0, 5.0, 4.0, 6.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| ReplicationRow { replication: i, v, n: 10, seed: 0, work_units: 0, solved: true })
            .collect();
        let s = ReplicationSummary::from_rows(rows, 0.05).unwrap();
        assert_eq!(s.mean, 4.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s.std - sd).abs() < 1e-12);
        // t_{3, 0.05} = 2.353363
        assert!((s.ci_upper - (4.5 + 2.353363 * sd / 2.0)).abs() < 1e-5);
    }

    #[test]
    fn zero_variance_replications() {
        let inst = degenerate(3);
        let b = Backend::default();
        let summary = saa_replicate(&inst, 5, 4, SampleMode::Lhs, 9, 0.05, |_, sample| {
            let w = WorkCounter::new();
            let v = saa_f(&inst, ProbeSet::empty(), sample, &Memo::disabled(), &b, &w)?.estimate.mean;
            Ok(ReplicationOutcome { value: v, solved: true, work_units: w.snapshot().work_units() })
        })
        .unwrap();
        assert_eq!(summary.std, 0.0);
        assert_eq!(summary.ci_upper, summary.mean);
        let again = saa_replicate(&inst, 5, 4, SampleMode::Lhs, 9, 0.05, |_, s| {
            Ok(ReplicationOutcome { value: s[0].demand.iter().sum(), solved: true, work_units: 0 })
        })
        .unwrap();
        assert_eq!(again.rows.len(), 4);
    }

    #[test]
    fn internal_bounds_on_degenerate_instance() {
        let inst = degenerate(3);
        let b = Backend::default();
        let w = WorkCounter::new();
        let exact = f_exact(&inst, ProbeSet::singleton(1), &b).unwrap().mean;
        let (nb, pts) = internal_ub(&inst, ProbeSet::singleton(1), &spec(6, 3, 3, 2, 4), &b, &[1], &w).unwrap();
        assert_eq!(nb.s, 0.0);
        assert!((nb.mu - exact).abs() < 1e-9);
        assert_eq!(pts.len(), 6);
        let (ne, _) =
            internal_ub_enumerated(&inst, ProbeSet::singleton(1), 3, 4, SampleMode::Lhs, 4, &b, &[2], &w).unwrap();
        assert_eq!(ne.s, 0.0);
        assert!((ne.mu - exact).abs() < 1e-9);
        let lb = stat_lb(&inst, ProbeSet::singleton(1), &spec(4, 5, 5, 1, 3), &b, 0.05, &w).unwrap();
        assert!((lb.estimate.mean - exact).abs() < 1e-9);
        assert_eq!(lb.estimate.stderr, 0.0);
    }

    #[test]
    fn internal_batches_must_split_evenly() {
        let inst = degenerate(2);
        let w = WorkCounter::new();
        assert!(internal_ub(&inst, ProbeSet::empty(), &spec(7, 2, 2, 2, 0), &Backend::default(), &[], &w).is_err());
    }

    #[test]
    fn enumerated_weights_sum_to_one() {
        let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, 6);
        let w = WorkCounter::new();
        let b = Backend::default();
        let (nb, pts) =
            internal_ub_enumerated(&inst, [0, 2].into_iter().collect(), 3, 4, SampleMode::Lhs, 1, &b, &[], &w).unwrap();
        assert_eq!(pts.len(), 4);
        assert!((pts.iter().map(|p| p.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        let recomputed: f64 = pts.iter().map(|p| p.weight * p.value).sum();
        assert!((recomputed - nb.mu).abs() < 1e-9);
        let (none, _) =
            internal_ub_enumerated(&inst, ProbeSet::empty(), 3, 4, SampleMode::Lhs, 1, &b, &[], &w).unwrap();
        assert!(none.mu.is_finite());
    }

    #[test]
    fn full_probe_internal_estimates_perfect_information() {
        let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, 7);
        let w = WorkCounter::new();
        let b = Backend::default();
        let (nb, _) = internal_ub(&inst, ProbeSet::full(3), &spec(400, 1, 1, 20, 2), &b, &[], &w).unwrap();
        let pi = f_exact(&inst, ProbeSet::full(3), &b).unwrap().mean;
        assert!((nb.mu - pi).abs() <= 4.0 * nb.s + 1e-9, "{} vs {pi} (s = {})", nb.mu, nb.s);
    }

    #[test]
    fn global_bound_closed_forms() {
        let leaf = |mu: f64, s: f64| (0.0, NodeStatBound { mu, s, batches: 30 });
        let one = global_stat_ub(&[leaf(10.0, 1.0)], 0.05);
        assert!((one - 11.6449).abs() < 1e-4);
        let flat = global_stat_ub(&[leaf(3.0, 0.0), (2.0, NodeStatBound { mu: 4.0, s: 0.0, batches: 1 })], 0.05);
        assert_eq!(flat, 6.0);
        let two = global_stat_ub(&[leaf(0.0, 1.0), leaf(0.0, 1.0)], 0.05);
        assert!((two - 1.9545).abs() < 1e-4);
        // Mixed point mass and normal leaf: the point mass sets a floor.
        let mixed = global_stat_ub(&[leaf(0.0, 1.0), leaf(5.0, 0.0)], 0.05);
        assert!((mixed - 5.0).abs() < 1e-6);
    }

    #[test]
    fn global_bound_is_monotone() {
        let base = [
            (0.0, NodeStatBound { mu: 1.0, s: 0.5, batches: 30 }),
            (1.0, NodeStatBound { mu: 0.5, s: 1.0, batches: 30 }),
        ];
        let u = global_stat_ub(&base, 0.05);
        let mut up = base;
        up[0].1.mu += 0.3;
        assert!(global_stat_ub(&up, 0.05) >= u);
        let mut wide = base;
        wide[1].1.s *= 2.0;
        assert!(global_stat_ub(&wide, 0.05) >= u);
        assert!(global_stat_ub(&base, 0.10) <= u);
    }
}
