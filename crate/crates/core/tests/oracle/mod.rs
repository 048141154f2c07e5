//! Independent reference computations for the integration and acceptance
//! tests. Nothing here calls the solvers under test.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pesp_core::instance::enumerate_support_projection;
use pesp_core::mip::MipModel;
use pesp_core::recourse::FirstStageSolution;
use pesp_core::{Instance, ProbeSet};

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `max c.x` subject to `A x <= b`, `x >= 0`, with `b >= 0`, by a dense
/// rational tableau simplex under Bland's rule.
pub fn lp_max(c: &[BigRational], a: &[Vec<BigRational>], b: &[BigRational]) -> BigRational {
    let m = a.len();
    let n = c.len();
    assert!(b.iter().all(|v| !v.is_negative()), "origin must be feasible");
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        r.resize(n, BigRational::zero());
        for k in 0..m {
            r.push(if k == i { BigRational::one() } else { BigRational::zero() });
        }
        r.push(b[i].clone());
        t.push(r);
    }
    let mut obj: Vec<BigRational> = c.iter().map(|v| -v.clone()).collect();
    obj.resize(width, BigRational::zero());
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(q) = (0..n + m).find(|&j| t[m][j].is_negative()) else {
            return t[m][width - 1].clone();
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][q].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][q];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (p, _) = leave.expect("recourse programs are bounded");
        let piv = t[p][q].clone();
        for v in t[p].iter_mut() {
            *v = &*v / &piv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[q].is_zero() {
                let f = row[q].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        basis[p] = q;
    }
}

/// Optimal second-stage revenue as the transportation LP over flows
/// `f_ij`: `max r sum f` with `sum_j f_ij <= cap_i` and
/// `f_ij <= d_j [j assigned to i]`.
pub fn recourse_lp(inst: &Instance, sol: &FirstStageSolution, demand: &[f64]) -> BigRational {
    let nf = inst.n_facilities();
    let nc = inst.n_customers();
    let var = |i: usize, j: usize| i * nc + j;
    let nv = nf * nc;
    let c = vec![q(inst.revenue_rate); nv];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..nf {
        let mut row = vec![BigRational::zero(); nv];
        for j in 0..nc {
            row[var(i, j)] = BigRational::one();
        }
        a.push(row);
        b.push(q(sol.capacity(inst, i)));
    }
    for i in 0..nf {
        for j in 0..nc {
            let mut row = vec![BigRational::zero(); nv];
            row[var(i, j)] = BigRational::one();
            a.push(row);
            b.push(if sol.assign[j] == Some(i) { q(demand[j]) } else { BigRational::zero() });
        }
    }
    lp_max(&c, &a, &b)
}

/// Every feasible plan: each facility closed or in one configuration, each
/// customer unassigned or assigned to an open facility.
pub fn all_plans(inst: &Instance) -> Vec<FirstStageSolution> {
    let nf = inst.n_facilities();
    let nc = inst.n_customers();
    let mut configs: Vec<Vec<Option<usize>>> = vec![Vec::new()];
    for f in &inst.facilities {
        let mut next = Vec::new();
        for partial in &configs {
            for choice in std::iter::once(None).chain((0..f.configs.len()).map(Some)) {
                let mut v = partial.clone();
                v.push(choice);
                next.push(v);
            }
        }
        configs = next;
    }
    let mut plans = Vec::new();
    for config in configs {
        let open: Vec<usize> = (0..nf).filter(|&i| config[i].is_some()).collect();
        let options: Vec<Option<usize>> = std::iter::once(None).chain(open.iter().copied().map(Some)).collect();
        let mut idx = vec![0usize; nc];
        loop {
            plans
                .push(FirstStageSolution { config: config.clone(), assign: idx.iter().map(|&k| options[k]).collect() });
            let mut pos = 0;
            while pos < nc {
                idx[pos] += 1;
                if idx[pos] < options.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == nc {
                break;
            }
        }
    }
    plans
}

fn plan_cost(inst: &Instance, sol: &FirstStageSolution) -> f64 {
    let open: f64 =
        sol.config.iter().enumerate().filter_map(|(i, c)| c.map(|c| inst.facilities[i].configs[c].open_cost)).sum();
    let assign: f64 =
        sol.assign.iter().enumerate().filter_map(|(j, a)| a.map(|i| inst.customers[j].assign_costs[i])).sum();
    open + assign
}

/// Revenue of `sol` in demand vector `d`, serving customers in index order
/// until each facility is full. Returns the revenue and the flows.
pub fn greedy_flows(inst: &Instance, sol: &FirstStageSolution, d: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let nf = inst.n_facilities();
    let mut flows = vec![vec![0.0; d.len()]; nf];
    let mut room: Vec<f64> = (0..nf).map(|i| sol.capacity(inst, i)).collect();
    let mut served = 0.0;
    for (j, a) in sol.assign.iter().enumerate() {
        if let Some(i) = *a {
            let f = d[j].min(room[i]);
            flows[i][j] = f;
            room[i] -= f;
            served += f;
        }
    }
    (inst.revenue_rate * served, flows)
}

/// Outcomes of the full demand vector grouped by their `set`-projection,
/// in outcome order: `(class key, [(outcome index, demand, prob)])`.
pub fn classes(inst: &Instance, set: ProbeSet) -> Vec<Vec<(usize, Vec<f64>, f64)>> {
    let n = inst.n_customers();
    let outcomes = enumerate_support_projection(inst, ProbeSet::full(n)).unwrap();
    let mut by_key: BTreeMap<Vec<u64>, Vec<(usize, Vec<f64>, f64)>> = BTreeMap::new();
    for (h, (obs, p)) in outcomes.into_iter().enumerate() {
        let d: Vec<f64> = obs.into_iter().map(|v| v.unwrap()).collect();
        let key = set.iter().map(|j| d[j].to_bits()).collect();
        by_key.entry(key).or_default().push((h, d, p));
    }
    let mut out: Vec<_> = by_key.into_values().collect();
    out.sort_by_key(|c| c[0].0);
    out
}

/// `F(S)` by enumerating every plan for every observation class.
pub fn f_by_plans(inst: &Instance, set: ProbeSet, plans: &[FirstStageSolution]) -> (f64, Vec<(Vec<usize>, usize)>) {
    let mut total = 0.0;
    let mut chosen = Vec::new();
    for class in classes(inst, set) {
        let mass: f64 = class.iter().map(|o| o.2).sum();
        let (best, val) = plans
            .iter()
            .enumerate()
            .map(|(k, plan)| {
                let rev: f64 = class.iter().map(|(_, d, p)| p * greedy_flows(inst, plan, d).0).sum();
                (k, rev - mass * plan_cost(inst, plan))
            })
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        total += val;
        chosen.push((class.iter().map(|o| o.0).collect(), best));
    }
    (total, chosen)
}

/// Variable vector of the nonanticipative model that uses `plans[k]` in
/// every outcome of class `k` and greedy flows, with probes fixed to `set`.
pub fn assemble_na_point(
    inst: &Instance,
    model: &MipModel,
    set: ProbeSet,
    chosen: &[(Vec<usize>, usize)],
    plans: &[FirstStageSolution],
    outcome_demands: &[Vec<f64>],
) -> Vec<f64> {
    let mut x = vec![0.0; model.vars.len()];
    let mut put = |name: String, v: f64| {
        let k = model.var_index(&name).unwrap_or_else(|| panic!("no variable {name}"));
        x[k] = v;
    };
    for j in 0..inst.n_customers() {
        put(format!("x_{j}"), if set.contains(j) { 1.0 } else { 0.0 });
    }
    for (outcomes, k) in chosen {
        let plan = &plans[*k];
        for &h in outcomes {
            for (i, c) in plan.config.iter().enumerate() {
                for cc in 0..inst.facilities[i].configs.len() {
                    put(format!("y_{i}_{cc}_h{h}"), if *c == Some(cc) { 1.0 } else { 0.0 });
                }
            }
            for j in 0..inst.n_customers() {
                for i in 0..inst.n_facilities() {
                    put(format!("u_{i}_{j}_h{h}"), if plan.assign[j] == Some(i) { 1.0 } else { 0.0 });
                }
            }
            let (_, flows) = greedy_flows(inst, plan, &outcome_demands[h]);
            for (i, row) in flows.iter().enumerate() {
                for (j, &f) in row.iter().enumerate() {
                    put(format!("f_{i}_{j}_{h}"), f);
                }
            }
        }
    }
    x
}

/// Names of the rows of `model` violated by `x`.
pub fn violated_rows(model: &MipModel, x: &[f64], tol: f64) -> Vec<String> {
    model
        .rows
        .iter()
        .filter(|r| {
            let a = model.row_activity(r, x);
            match r.sense {
                pesp_core::mip::RowSense::Le => a > r.rhs + tol,
                pesp_core::mip::RowSense::Ge => a < r.rhs - tol,
                pesp_core::mip::RowSense::Eq => (a - r.rhs).abs() > tol,
            }
        })
        .map(|r| r.name.clone())
        .collect()
}

/// A uniformly drawn feasible plan.
pub fn random_plan<R: rand::Rng>(inst: &Instance, rng: &mut R) -> FirstStageSolution {
    let config: Vec<Option<usize>> = inst
        .facilities
        .iter()
        .map(|f| {
            let k = rng.random_range(0..=f.configs.len());
            (k < f.configs.len()).then_some(k)
        })
        .collect();
    let open: Vec<usize> = (0..inst.n_facilities()).filter(|&i| config[i].is_some()).collect();
    let assign = (0..inst.n_customers())
        .map(|_| {
            let k = rng.random_range(0..=open.len());
            open.get(k).copied()
        })
        .collect();
    FirstStageSolution { config, assign }
}

/// Copy of `inst` with every capacity and nominal demand rounded to an
/// integer, so sums of them are exact in floating point.
pub fn integral(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    for f in &mut out.facilities {
        for c in &mut f.configs {
            c.capacity = c.capacity.round();
        }
    }
    out.revenue_rate = out.revenue_rate.round().max(1.0);
    out
}

/// Net value `F(S) - alpha(S)` of every probe set, indexed by bit pattern.
pub fn net_table(inst: &Instance) -> Vec<f64> {
    let backend = pesp_core::Backend::default();
    (0..1u64 << inst.n_customers())
        .map(|bits| {
            let s = ProbeSet::from_bits(bits);
            pesp_core::bounds::f_exact(inst, s, &backend).unwrap().mean - pesp_core::alpha(inst, s)
        })
        .collect()
}
