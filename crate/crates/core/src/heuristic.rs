//! Greedy probing with reused computations.
//!
//! Starting from `S = ∅`, each iterate samples `eta_S`, solves one small
//! two-stage problem per outer point to get a pool of plans `Ŷ`, and scores
//! every plan against a joint conditional sample. All later estimates are
//! maxima over `Ŷ` on that table, so scoring every `S ∪ {j}` needs no new
//! optimization: probing `j` is approximated by clustering the sampled
//! values of `d_j` and letting the plan choice depend on the cluster.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::alpha;
use crate::error::{Error, Result};
use crate::instance::{project, sample_conditional, sample_joint, Instance, SampleMode, SampleSpec};
use crate::probe::ProbeSet;
use crate::recourse::{first_stage_cost, recourse_value, FirstStageSolution};
use crate::rng::{stream, tag};
use crate::sampling::{stat_lb, StatLowerBound};
use crate::stochprog::{solve_counted, Backend};
use crate::work::WorkCounter;

const KMEANS_MAX_ITER: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedySpec {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub k: usize,
    /// Weight clusters by their size instead of uniformly.
    pub weighted: bool,
    pub mode: SampleMode,
    pub seed: u64,
}

impl GreedySpec {
    pub fn new(seed: u64) -> Self {
        GreedySpec { n1: 20, n2: 20, n3: 50, k: 4, weighted: false, mode: SampleMode::Lhs, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub iterate: usize,
    pub set: ProbeSet,
    /// Approximate `F(S)`.
    pub approx_f: f64,
    /// `approx_f - alpha(S)`.
    pub net: f64,
    pub wall_secs: f64,
    pub work_units: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub entries: Vec<PoolEntry>,
}

/// Plans, their first-stage values and the score table of one iterate.
struct Table {
    /// `-first_stage_cost` per plan.
    plan_value: Vec<f64>,
    /// `q[k][i][y] = Q(ŷ_y, xi^{ki})`.
    q: Vec<Vec<Vec<f64>>>,
    /// Joint conditional samples, `demand[k][i]`.
    demand: Vec<Vec<Vec<f64>>>,
}

impl Table {
    fn build(
        inst: &Instance,
        set: ProbeSet,
        spec: &GreedySpec,
        iterate: usize,
        backend: &Backend,
        work: &WorkCounter,
    ) -> Result<Self> {
        let t = iterate as u64;
        let mut rng = stream(spec.seed, &[tag::GREEDY, t, tag::OUTER]);
        let outer = sample_joint(inst, spec.n1, spec.mode, &mut rng);
        let per_point: Vec<(FirstStageSolution, Vec<Vec<f64>>)> = outer
            .par_iter()
            .enumerate()
            .map(|(k, s)| -> Result<_> {
                let obs = project(&s.demand, set);
                let mut sel = stream(spec.seed, &[tag::GREEDY, t, tag::SELECT, k as u64]);
                let choose = sample_conditional(inst, &obs, spec.n3, spec.mode, &mut sel)?;
                let plan = solve_counted(inst, &choose, backend, work)?.solution;
                let mut inner = stream(spec.seed, &[tag::GREEDY, t, tag::INNER, k as u64]);
                let joint = sample_conditional(inst, &obs, spec.n2, spec.mode, &mut inner)?;
                Ok((plan, joint.into_iter().map(|sc| sc.demand).collect()))
            })
            .collect::<Result<_>>()?;
        let (plans, demand): (Vec<_>, Vec<_>) = per_point.into_iter().unzip();
        let plan_value = plans.iter().map(|p| first_stage_cost(inst, p).map(|c| -c)).collect::<Result<Vec<f64>>>()?;
        let q: Vec<Vec<Vec<f64>>> = demand
            .par_iter()
            .map(|rows: &Vec<Vec<f64>>| {
                rows.iter().map(|d| plans.iter().map(|p| recourse_value(inst, p, d)).collect()).collect()
            })
            .collect();
        // One unit per sampled scenario, scored against the whole plan pool.
        work.add_recourse((spec.n1 * spec.n2) as u64);
        Ok(Table { plan_value, q, demand })
    }

    /// Best plan value on the scenarios `idx` of outer point `k`.
    fn best_on(&self, k: usize, idx: &[usize]) -> f64 {
        let inv = 1.0 / idx.len() as f64;
        (0..self.plan_value.len())
            .map(|y| self.plan_value[y] + inv * idx.iter().map(|&i| self.q[k][i][y]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Restricted estimate of `F(S)`: the plan may depend on the outer point only.
    fn estimate(&self) -> f64 {
        let all: Vec<usize> = (0..self.q[0].len()).collect();
        let n1 = self.q.len() as f64;
        (0..self.q.len()).map(|k| self.best_on(k, &all)).sum::<f64>() / n1
    }

    /// Restricted estimate of `F(S ∪ {j})`: the plan may also depend on the
    /// cluster of `d_j`.
    fn estimate_with(&self, j: usize, kk: usize, weighted: bool) -> f64 {
        let n1 = self.q.len() as f64;
        (0..self.q.len())
            .map(|k| {
                let vals: Vec<f64> = self.demand[k].iter().map(|d| d[j]).collect();
                let clusters = kmeans_1d(&vals, kk);
                let total = vals.len() as f64;
                let uniform = 1.0 / clusters.len() as f64;
                clusters
                    .iter()
                    .map(|c| {
                        let w = if weighted { c.len() as f64 / total } else { uniform };
                        w * self.best_on(k, c)
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n1
    }
}

/// Runs the greedy heuristic from `∅` to `[n]`, recording every iterate.
pub fn greedy_run(inst: &Instance, spec: &GreedySpec, backend: &Backend, work: &WorkCounter) -> Result<CandidatePool> {
    if spec.n1 == 0 || spec.n2 == 0 || spec.n3 == 0 || spec.k == 0 {
        return Err(Error::InvalidArgument("greedy sample sizes and K must be at least 1".into()));
    }
    let n = inst.n_customers();
    if n == 0 {
        return Err(Error::InvalidArgument("instance has no customers".into()));
    }
    let start = Instant::now();
    let base = work.snapshot();
    let mut set = ProbeSet::empty();
    let mut entries = Vec::with_capacity(n + 1);
    for t in 0..n {
        let table = Table::build(inst, set, spec, t, backend, work)?;
        let f = table.estimate();
        entries.push(PoolEntry {
            iterate: t,
            set,
            approx_f: f,
            net: f - alpha(inst, set),
            wall_secs: start.elapsed().as_secs_f64(),
            work_units: work.snapshot().since(&base).work_units(),
        });
        let rest: Vec<usize> = set.complement(n).iter().collect();
        let scored: Vec<(usize, f64)> =
            rest.par_iter().map(|&j| (j, table.estimate_with(j, spec.k, spec.weighted))).collect();
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, fj) in scored {
            let z = fj - alpha(inst, set.with(j));
            if best.is_none_or(|b| z > b.1) {
                best = Some((j, z, fj));
            }
        }
        let (j, z, fj) = best.expect("at least one element remains");
        set.insert(j);
        if t + 1 == n {
            entries.push(PoolEntry {
                iterate: n,
                set,
                approx_f: fj,
                net: z,
                wall_secs: start.elapsed().as_secs_f64(),
                work_units: work.snapshot().since(&base).work_units(),
            });
        }
    }
    Ok(CandidatePool { entries })
}

/// Lloyd's algorithm on scalars, started from `k` quantiles.
///
/// Returns index lists of the nonempty clusters in increasing order of
/// value. Clusters are contiguous in sorted order. When there are at most
/// `k` distinct values each gets its own cluster.
pub fn kmeans_1d(values: &[f64], k: usize) -> Vec<Vec<usize>> {
    assert!(!values.is_empty() && k >= 1, "need values and k >= 1");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let m = order.len();

    let mut distinct: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    distinct.dedup();
    if distinct.len() <= k {
        return distinct.iter().map(|&v| order.iter().copied().filter(|&i| values[i] == v).collect()).collect();
    }

    let mut centers: Vec<f64> = (0..k).map(|l| values[order[((2 * l + 1) * m) / (2 * k)]]).collect();
    centers.dedup();
    let mut assign = vec![usize::MAX; m];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        // Sorted values against sorted centers: a single sweep suffices.
        let mut c = 0;
        for (pos, &i) in order.iter().enumerate() {
            let v = values[i];
            while c + 1 < centers.len() && (centers[c + 1] - v).abs() < (centers[c] - v).abs() {
                c += 1;
            }
            if assign[pos] != c {
                assign[pos] = c;
                changed = true;
            }
        }
        let mut sums = vec![0.0; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (pos, &i) in order.iter().enumerate() {
            sums[assign[pos]] += values[i];
            counts[assign[pos]] += 1;
        }
        let mut remap = vec![0; centers.len()];
        let mut next = Vec::with_capacity(centers.len());
        for c in 0..centers.len() {
            if counts[c] > 0 {
                remap[c] = next.len();
                next.push(sums[c] / counts[c] as f64);
            }
        }
        let dropped = next.len() != centers.len();
        for a in assign.iter_mut() {
            *a = remap[*a];
        }
        centers = next;
        if !changed && !dropped {
            break;
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (pos, &i) in order.iter().enumerate() {
        clusters[assign[pos]].push(i);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalCandidate {
    pub set: ProbeSet,
    pub approx_net: f64,
    pub lb: StatLowerBound,
    /// Estimated `F(S) - alpha(S)`.
    pub net_mean: f64,
    /// Lower confidence limit on `F(S) - alpha(S)`.
    pub net_lower: f64,
}

/// Re-evaluates the `top` best distinct pool entries (by approximate net
/// value) with [`stat_lb`] and returns them best first.
pub fn finalize_candidates(
    inst: &Instance,
    pool: &CandidatePool,
    top: usize,
    lb_spec: &SampleSpec,
    backend: &Backend,
    alpha_level: f64,
    work: &WorkCounter,
) -> Result<Vec<FinalCandidate>> {
    if pool.entries.is_empty() {
        return Err(Error::InvalidArgument("empty candidate pool".into()));
    }
    let mut ranked: Vec<&PoolEntry> = pool.entries.iter().collect();
    ranked.sort_by(|a, b| b.net.total_cmp(&a.net).then(a.iterate.cmp(&b.iterate)));
    let mut chosen: Vec<&PoolEntry> = Vec::new();
    for e in ranked {
        if chosen.len() == top {
            break;
        }
        if !chosen.iter().any(|c| c.set == e.set) {
            chosen.push(e);
        }
    }
    let mut out = chosen
        .into_iter()
        .map(|e| -> Result<FinalCandidate> {
            let lb = stat_lb(inst, e.set, lb_spec, backend, alpha_level, work)?;
            let cost = alpha(inst, e.set);
            Ok(FinalCandidate {
                set: e.set,
                approx_net: e.net,
                net_mean: lb.estimate.mean - cost,
                net_lower: lb.lower - cost,
                lb,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.net_mean.total_cmp(&a.net_mean));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::f_exact;
    use crate::instance::{generate_instance, DemandDistribution, DistributionKind};
    use proptest::prelude::*;

    fn sse(values: &[f64], clusters: &[Vec<usize>]) -> f64 {
        clusters
            .iter()
            .map(|c| {
                let m = c.iter().map(|&i| values[i]).sum::<f64>() / c.len() as f64;
                c.iter().map(|&i| (values[i] - m).powi(2)).sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn kmeans_examples() {
        let v = [0.0, 0.0, 0.0, 10.0, 10.0];
        assert_eq!(kmeans_1d(&v, 2), vec![vec![0, 1, 2], vec![3, 4]]);
        let v = [3.0, 1.0, 3.0, 2.0];
        assert_eq!(kmeans_1d(&v, 5), vec![vec![1], vec![3], vec![0, 2]]);

        // Brute force over all interval splits of the sorted values.
        let v = [1.0, 2.0, 8.0, 9.0];
        let got = kmeans_1d(&v, 2);
        let best = (1..4).map(|cut| sse(&v, &[(0..cut).collect(), (cut..4).collect()])).fold(f64::INFINITY, f64::min);
        assert_eq!(best, 1.0);
        assert!((sse(&v, &got) - best).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kmeans_partitions_into_intervals(vals in prop::collection::vec(0.0f64..50.0, 1..40), k in 1usize..6) {
            let cl = kmeans_1d(&vals, k);
            prop_assert!(cl.len() <= k);
            let mut seen: Vec<usize> = cl.iter().flatten().copied().collect();
            seen.sort();
            prop_assert_eq!(seen, (0..vals.len()).collect::<Vec<_>>());
            for w in cl.windows(2) {
                let hi = w[0].iter().map(|&i| vals[i]).fold(f64::NEG_INFINITY, f64::max);
                let lo = w[1].iter().map(|&i| vals[i]).fold(f64::INFINITY, f64::min);
                prop_assert!(hi <= lo);
            }
        }
    }

    fn degenerate(n: usize) -> Instance {
        let mut inst = generate_instance(2, 2, n, DistributionKind::Bernoulli, 21);
        for (j, c) in inst.customers.iter_mut().enumerate() {
            if let DemandDistribution::Bernoulli { nominal, .. } = c.distribution {
                c.distribution = DemandDistribution::Bernoulli { rho: (j % 2) as f64, nominal };
            }
        }
        inst
    }

    fn tiny_spec(seed: u64) -> GreedySpec {
        GreedySpec { n1: 3, n2: 4, n3: 4, k: 2, weighted: false, mode: SampleMode::Lhs, seed }
    }

    #[test]
    fn single_customer_pool() {
        let inst = generate_instance(1, 2, 1, DistributionKind::Bernoulli, 4);
        let pool = greedy_run(&inst, &tiny_spec(1), &Backend::default(), &WorkCounter::new()).unwrap();
        let sets: Vec<ProbeSet> = pool.entries.iter().map(|e| e.set).collect();
        assert_eq!(sets, vec![ProbeSet::empty(), ProbeSet::singleton(0)]);
    }

    #[test]
    fn degenerate_estimates_are_exact() {
        let inst = degenerate(3);
        let b = Backend::default();
        let pool = greedy_run(&inst, &tiny_spec(2), &b, &WorkCounter::new()).unwrap();
        for (t, e) in pool.entries.iter().enumerate() {
            assert_eq!(e.set.len(), t);
            let exact = f_exact(&inst, e.set, &b).unwrap().mean;
            assert!((e.approx_f - exact).abs() < 1e-9, "iterate {t}: {} vs {exact}", e.approx_f);
        }
    }

    #[test]
    fn work_accounting() {
        let inst = generate_instance(2, 2, 4, DistributionKind::Bernoulli, 5);
        let spec = tiny_spec(3);
        let w = WorkCounter::new();
        greedy_run(&inst, &spec, &Backend::default(), &w).unwrap();
        let s = w.snapshot();
        assert_eq!(s.subproblem_solves, (4 * spec.n1) as u64);
        assert_eq!(s.recourse_evals, (4 * spec.n1 * spec.n2) as u64);
    }

    #[test]
    fn finalize_dedups_and_clamps() {
        let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, 6);
        let e =
            |set: ProbeSet, net: f64| PoolEntry { iterate: 0, set, approx_f: net, net, wall_secs: 0.0, work_units: 0 };
        let pool = CandidatePool {
            entries: vec![e(ProbeSet::empty(), 1.0), e(ProbeSet::singleton(1), 3.0), e(ProbeSet::singleton(1), 2.0)],
        };
        let spec = SampleSpec { n1: 3, n2: 4, n3: 4, batches: 1, mode: SampleMode::Lhs, seed: 1 };
        let out = finalize_candidates(&inst, &pool, 10, &spec, &Backend::default(), 0.05, &WorkCounter::new()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.windows(2).all(|w| w[0].net_mean >= w[1].net_mean));
        assert!(out.iter().all(|c| c.net_lower <= c.net_mean));
    }
}
