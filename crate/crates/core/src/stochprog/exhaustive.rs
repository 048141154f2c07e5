//! Exact two-stage solver by implicit enumeration.
//!
//! Customers are assigned one at a time (to a facility or to nobody) in a
//! depth-first search; each facility picks its best configuration for the
//! customers it holds. Subtrees are pruned with a two-level Lagrangian bound:
//!
//! * the single-assignment rows are priced out with multipliers `lambda`, so
//!   facilities can be bounded independently;
//! * for one facility in one configuration, the extra revenue from free
//!   customers `B` is `r * sum_k w_k min(c_k, D_k(B))` with remaining
//!   capacity `c_k` in scenario `k`. Pricing the rows `s_k <= D_k(B)` with
//!   `pi_k in [0, r w_k]` gives, for every such `pi`,
//!   `sum_k (r w_k - pi_k) c_k + sum_j (pi . d_j - cost_j)^+`.
//!
//! The best `pi` comes from a small LP (see `price_lp`). Any `pi` is valid,
//! so cached prices keep bounding correctly as the search moves; they are
//! only re-solved when a bound fails to prune.

use crate::error::{Error, Result};
use crate::instance::{Instance, Scenario};
use crate::recourse::FirstStageSolution;

use super::price_lp::PriceLp;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Relative tolerance used when comparing a bound against the incumbent.
const PRUNE_TOL: f64 = 1e-9;

/// Subgradient iterations on the assignment multipliers at the root.
const ROOT_ITERATIONS: usize = 200;

/// The subgradient stops once repeated halving shrinks its step below this.
const MIN_STEP_SCALE: f64 = 1e-2;

/// A greedy completion is tried every this many nodes.
const HEURISTIC_EVERY: u64 = 16;

struct Item {
    customer: usize,
    /// Demand per scenario.
    d: Vec<f64>,
    /// Whether the customer can ever add value at each facility.
    allowed: Vec<bool>,
    assign: Vec<f64>,
}

#[derive(Clone)]
struct Cache {
    pi: Vec<f64>,
    base: f64,
    /// Positive reduced value of each item under `pi`.
    vals: Vec<f64>,
    /// Fractional use of each item in the price problem's optimum.
    usage: Vec<f64>,
    taken: u64,
    /// Set when the prices may no longer be optimal for the node.
    stale: bool,
}

struct Search<'a> {
    inst: &'a Instance,
    w: Vec<f64>,
    rw: Vec<f64>,
    r: f64,
    items: Vec<Item>,
    /// `(capacity, open cost)` per facility and configuration.
    configs: Vec<Vec<(f64, f64)>>,
    lambda: Vec<f64>,
    load: Vec<Vec<f64>>,
    acost: Vec<f64>,
    count: Vec<usize>,
    choice: Vec<Option<usize>>,
    free: u64,
    cache: Vec<Vec<Cache>>,
    undo: Vec<(usize, usize, Cache)>,
    best_value: f64,
    best_choice: Vec<Option<usize>>,
    nodes: u64,
    node_cap: u64,
    lp: PriceLp,
}

pub(crate) struct ExhaustiveOutcome {
    pub solution: FirstStageSolution,
    pub nodes: u64,
}

pub(crate) fn solve(inst: &Instance, scenarios: &[Scenario], node_cap: u64) -> Result<ExhaustiveOutcome> {
    let mut s = Search::new(inst, scenarios, node_cap);
    if !s.items.is_empty() {
        s.initial_incumbent();
        s.tune_multipliers();
        s.dfs()?;
    }
    let choice = s.best_choice.clone();
    Ok(ExhaustiveOutcome { solution: s.to_solution(&choice), nodes: s.nodes })
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let t = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(t)
        }
    })
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, scenarios: &[Scenario], node_cap: u64) -> Self {
        let k = scenarios.len();
        let w: Vec<f64> = scenarios.iter().map(|s| s.weight).collect();
        let r = inst.revenue_rate;
        let n_fac = inst.n_facilities();
        let max_cap: Vec<f64> =
            inst.facilities.iter().map(|f| f.configs.iter().map(|c| c.capacity).fold(0.0, f64::max)).collect();

        // A customer is worth assigning to facility i only if its largest
        // possible revenue there beats the assignment cost.
        let mut items: Vec<(f64, Item)> = Vec::new();
        for (j, cust) in inst.customers.iter().enumerate() {
            let d: Vec<f64> = scenarios.iter().map(|s| s.demand[j]).collect();
            let allowed: Vec<bool> = (0..n_fac)
                .map(|i| {
                    let gain: f64 = d.iter().zip(&w).map(|(&x, &wk)| wk * x.min(max_cap[i])).sum();
                    r * gain > cust.assign_costs[i]
                })
                .collect();
            if allowed.iter().any(|&a| a) {
                let mean: f64 = d.iter().zip(&w).map(|(&x, &wk)| wk * x).sum();
                let assign = cust.assign_costs.clone();
                items.push((mean, Item { customer: j, d, allowed, assign }));
            }
        }
        items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.customer.cmp(&b.1.customer)));
        let items: Vec<Item> = items.into_iter().map(|(_, it)| it).collect();
        let n = items.len();
        assert!(n <= 64, "at most 64 customers are supported");

        let configs: Vec<Vec<(f64, f64)>> =
            inst.facilities.iter().map(|f| f.configs.iter().map(|c| (c.capacity, c.open_cost)).collect()).collect();
        let empty =
            Cache { pi: vec![0.0; k], base: 0.0, vals: vec![0.0; n], usage: vec![0.0; n], taken: 0, stale: true };
        let cache = configs.iter().map(|cs| vec![empty.clone(); cs.len()]).collect();

        Search {
            inst,
            rw: w.iter().map(|&x| r * x).collect(),
            w,
            r,
            items,
            configs,
            lambda: vec![0.0; n],
            load: vec![vec![0.0; k]; n_fac],
            acost: vec![0.0; n_fac],
            count: vec![0; n_fac],
            choice: vec![None; n],
            free: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            cache,
            undo: Vec::new(),
            best_value: 0.0,
            best_choice: vec![None; n],
            nodes: 0,
            node_cap,
            lp: PriceLp::new(),
        }
    }

    fn config_value(&self, i: usize, c: usize) -> f64 {
        let (cap, open) = self.configs[i][c];
        let served: f64 = self.load[i].iter().zip(&self.w).map(|(&l, &wk)| wk * l.min(cap)).sum();
        -open + self.r * served
    }

    /// Value of facility `i` with its current customers if forced open.
    fn open_value(&self, i: usize) -> f64 {
        (0..self.configs[i].len()).map(|c| self.config_value(i, c)).fold(f64::NEG_INFINITY, f64::max) - self.acost[i]
    }

    /// Exact value of facility `i` with its current customers.
    fn facility_value(&self, i: usize) -> f64 {
        if self.count[i] == 0 {
            0.0
        } else {
            self.open_value(i)
        }
    }

    fn current_value(&self) -> f64 {
        (0..self.configs.len()).map(|i| self.facility_value(i)).sum()
    }

    fn base_for(&self, i: usize, c: usize, pi: &[f64]) -> f64 {
        let (cap, open) = self.configs[i][c];
        let mut v = -open;
        for ((&l, &rw), &p) in self.load[i].iter().zip(&self.rw).zip(pi) {
            v += rw * l.min(cap) + (rw - p) * (cap - l).max(0.0);
        }
        v
    }

    fn save(&mut self, i: usize, c: usize) {
        self.undo.push((i, c, self.cache[i][c].clone()));
    }

    fn restore(&mut self, mark: usize) {
        while self.undo.len() > mark {
            let (i, c, cc) = self.undo.pop().expect("nonempty");
            self.cache[i][c] = cc;
        }
    }

    /// Re-solves the prices of facility `i`, config `c`, for the free items.
    fn refresh(&mut self, i: usize, c: usize) {
        self.save(i, c);
        let cap = self.configs[i][c].0;
        let cols: Vec<usize> = (0..self.w.len()).filter(|&k| cap - self.load[i][k] > 0.0).collect();
        let room: Vec<f64> = cols.iter().map(|&k| cap - self.load[i][k]).collect();
        let rw: Vec<f64> = cols.iter().map(|&k| self.rw[k]).collect();
        let rows: Vec<usize> = bits(self.free).filter(|&t| self.items[t].allowed[i]).collect();
        let cost: Vec<f64> = rows.iter().map(|&t| self.items[t].assign[i] + self.lambda[t]).collect();
        let items = &self.items;
        let sol = self.lp.solve(&room, &rw, &cost, |j, k| items[rows[j]].d[cols[k]]);

        let mut cc = std::mem::replace(
            &mut self.cache[i][c],
            Cache { pi: Vec::new(), base: 0.0, vals: Vec::new(), usage: Vec::new(), taken: 0, stale: false },
        );
        cc.pi.iter_mut().for_each(|p| *p = 0.0);
        for (&k, &p) in cols.iter().zip(&sol.pi) {
            cc.pi[k] = p;
        }
        cc.vals.iter_mut().for_each(|v| *v = 0.0);
        cc.usage.iter_mut().for_each(|u| *u = 0.0);
        cc.taken = 0;
        for (j, &t) in rows.iter().enumerate() {
            let it = &self.items[t];
            let v: f64 = it.d.iter().zip(&cc.pi).map(|(&x, &p)| x * p).sum::<f64>() - cost[j];
            cc.vals[t] = v.max(0.0);
            cc.usage[t] = sol.usage[j];
            if sol.usage[j] > 1e-9 {
                cc.taken |= 1 << t;
            }
        }
        cc.base = self.base_for(i, c, &cc.pi);
        cc.stale = false;
        self.cache[i][c] = cc;
    }

    fn refresh_all(&mut self) {
        for i in 0..self.configs.len() {
            for c in 0..self.configs[i].len() {
                self.refresh(i, c);
            }
        }
        self.undo.clear();
    }

    fn config_bound(&self, i: usize, c: usize) -> f64 {
        let cc = &self.cache[i][c];
        cc.base + bits(self.free).map(|t| cc.vals[t]).sum::<f64>()
    }

    /// Best configuration of facility `i` under the current bound.
    fn best_config(&self, i: usize) -> (usize, f64) {
        (0..self.configs[i].len()).map(|c| (c, self.config_bound(i, c))).fold((0, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 {
                b
            } else {
                a
            }
        })
    }

    fn facility_bound(&self, i: usize) -> f64 {
        let open = self.best_config(i).1;
        let best = if self.count[i] == 0 { open.max(0.0) } else { open };
        best - self.acost[i]
    }

    fn bound(&self) -> f64 {
        (0..self.configs.len()).map(|i| self.facility_bound(i)).sum::<f64>()
            + bits(self.free).map(|t| self.lambda[t]).sum::<f64>()
    }

    /// Refreshes stale configurations of facility `i` until the one
    /// attaining its bound is fresh.
    fn tighten(&mut self, i: usize) {
        loop {
            let (c, _) = self.best_config(i);
            if !self.cache[i][c].stale {
                return;
            }
            self.refresh(i, c);
        }
    }

    fn place(&mut self, t: usize, i: usize) {
        for (l, &x) in self.load[i].iter_mut().zip(&self.items[t].d) {
            *l += x;
        }
        self.acost[i] += self.items[t].assign[i];
        self.count[i] += 1;
        self.choice[t] = Some(i);
    }

    fn unplace(&mut self, t: usize, i: usize) {
        for (l, &x) in self.load[i].iter_mut().zip(&self.items[t].d) {
            *l -= x;
        }
        self.acost[i] -= self.items[t].assign[i];
        self.count[i] -= 1;
        self.choice[t] = None;
        if self.count[i] == 0 {
            // Reset exactly to avoid drift from repeated add/subtract.
            self.load[i].iter_mut().for_each(|l| *l = 0.0);
            self.acost[i] = 0.0;
        }
    }

    fn clear_choices(&mut self, mask: u64) {
        for t in bits(mask) {
            if let Some(i) = self.choice[t] {
                self.unplace(t, i);
            }
        }
    }

    fn record_if_better(&mut self) {
        let v = self.current_value();
        if v > self.best_value + 1e-12 {
            self.best_value = v;
            self.best_choice = self.choice.clone();
        }
    }

    /// Multi-start greedy: for each set of facilities declared open, insert
    /// customers by best marginal value, then improve by single moves.
    fn initial_incumbent(&mut self) {
        let n = self.items.len();
        let n_fac = self.configs.len();
        let subsets: Vec<u64> = if n_fac <= 8 {
            (1..1u64 << n_fac).collect()
        } else {
            let mut v: Vec<u64> = (0..n_fac).map(|i| 1u64 << i).collect();
            v.push(u64::MAX >> (64 - n_fac));
            v
        };
        let all = self.free;
        for mask in subsets {
            for t in 0..n {
                let mut best: Option<(f64, usize)> = None;
                for i in 0..n_fac {
                    if mask >> i & 1 == 0 || !self.items[t].allowed[i] {
                        continue;
                    }
                    let before = self.open_value(i);
                    self.place(t, i);
                    let delta = self.open_value(i) - before;
                    self.unplace(t, i);
                    if delta > 1e-12 && best.is_none_or(|b| delta > b.0) {
                        best = Some((delta, i));
                    }
                }
                if let Some((_, i)) = best {
                    self.place(t, i);
                }
            }
            self.local_search();
            self.record_if_better();
            self.clear_choices(all);
        }
    }

    fn local_search(&mut self) {
        let n = self.items.len();
        let n_fac = self.configs.len();
        for _ in 0..50 {
            let mut improved = false;
            for t in 0..n {
                let from = self.choice[t];
                let mut best = (self.current_value(), from);
                for opt in std::iter::once(None).chain((0..n_fac).map(Some)) {
                    if opt == from || opt.is_some_and(|i| !self.items[t].allowed[i]) {
                        continue;
                    }
                    if let Some(i) = from {
                        self.unplace(t, i);
                    }
                    if let Some(i) = opt {
                        self.place(t, i);
                    }
                    let v = self.current_value();
                    if v > best.0 + 1e-9 {
                        best = (v, opt);
                    }
                    if let Some(i) = opt {
                        self.unplace(t, i);
                    }
                    if let Some(i) = from {
                        self.place(t, i);
                    }
                }
                if best.1 != from {
                    if let Some(i) = from {
                        self.unplace(t, i);
                    }
                    if let Some(i) = best.1 {
                        self.place(t, i);
                    }
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }

    /// Completes the current partial assignment greedily.
    fn greedy_completion(&mut self) {
        let free = self.free;
        for t in bits(free) {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.configs.len() {
                if !self.items[t].allowed[i] {
                    continue;
                }
                let before = self.facility_value(i);
                self.place(t, i);
                let delta = self.facility_value(i) - before;
                self.unplace(t, i);
                if delta > 1e-12 && best.is_none_or(|b| delta > b.0) {
                    best = Some((delta, i));
                }
            }
            if let Some((_, i)) = best {
                self.place(t, i);
            }
        }
        self.record_if_better();
        self.clear_choices(free);
    }

    /// Subgradient steps on the multipliers of the single-assignment rows.
    fn tune_multipliers(&mut self) {
        let n = self.items.len();
        self.refresh_all();
        let mut best_lambda = self.lambda.clone();
        let mut best_ub = self.bound();
        let mut step_scale = 1.0;
        let mut stale = 0;
        for _ in 0..ROOT_ITERATIONS {
            let ub = self.bound();
            if ub < best_ub - 1e-12 {
                best_ub = ub;
                best_lambda = self.lambda.clone();
                stale = 0;
            } else {
                stale += 1;
                if stale >= 3 {
                    step_scale *= 0.5;
                    stale = 0;
                    if step_scale < MIN_STEP_SCALE {
                        break;
                    }
                }
            }
            let gap = ub - self.best_value;
            if gap <= PRUNE_TOL * self.best_value.abs().max(1.0) {
                break;
            }
            let mut uses = vec![0.0; n];
            for i in 0..self.configs.len() {
                let (c, v) = self.best_config(i);
                if v <= 0.0 {
                    continue;
                }
                for (u, &x) in uses.iter_mut().zip(&self.cache[i][c].usage) {
                    *u += x;
                }
            }
            let g: Vec<f64> = uses.iter().map(|&u| 1.0 - u).collect();
            let norm: f64 = g.iter().map(|v| v * v).sum();
            if norm < 1e-12 {
                break;
            }
            let step = 0.25 * step_scale * gap / norm;
            for (l, gj) in self.lambda.iter_mut().zip(&g) {
                *l = (*l - step * gj).max(0.0);
            }
            self.refresh_all();
        }
        self.lambda = best_lambda;
        self.refresh_all();
    }

    fn dfs(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(Error::SizeLimitExceeded {
                what: "exhaustive two-stage search nodes",
                requested: self.nodes as u128,
                limit: self.node_cap as u128,
            });
        }
        if self.free == 0 {
            self.record_if_better();
            return Ok(());
        }
        if self.nodes % HEURISTIC_EVERY == 0 {
            self.greedy_completion();
        }

        // Largest remaining customer first; its placement shapes the rest.
        let t = self.free.trailing_zeros() as usize;
        // Options: facilities by how much the bound wants the customer there,
        // then by immediate gain; leaving it unassigned last among ties.
        let mut options: Vec<(f64, f64, Option<usize>)> = vec![(0.0, 0.0, None)];
        for i in 0..self.configs.len() {
            if !self.items[t].allowed[i] {
                continue;
            }
            let (c, _) = self.best_config(i);
            let before = self.facility_value(i);
            self.place(t, i);
            let gain = self.facility_value(i) - before;
            self.unplace(t, i);
            options.push((self.cache[i][c].usage[t], gain, Some(i)));
        }
        options.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));

        let bit = 1u64 << t;
        self.free &= !bit;
        for (_, _, opt) in options {
            let mark = self.undo.len();
            if let Some(i) = opt {
                self.place(t, i);
            }
            for i in 0..self.configs.len() {
                for c in 0..self.configs[i].len() {
                    let moved = opt == Some(i);
                    if moved || self.cache[i][c].taken & bit != 0 {
                        self.save(i, c);
                        if moved {
                            // Loads changed: reprice the base term with the old prices.
                            self.cache[i][c].base = self.base_for(i, c, &self.cache[i][c].pi);
                        }
                        self.cache[i][c].stale = true;
                    }
                }
            }
            let tol = PRUNE_TOL * self.best_value.abs().max(1.0);
            let mut promising = self.bound() > self.best_value + tol;
            if promising {
                let mut order: Vec<usize> = (0..self.configs.len()).collect();
                if let Some(i) = opt {
                    order.retain(|&x| x != i);
                    order.insert(0, i);
                }
                for i in order {
                    self.tighten(i);
                    if self.bound() <= self.best_value + tol {
                        promising = false;
                        break;
                    }
                }
            }
            let res = if promising { self.dfs() } else { Ok(()) };
            self.restore(mark);
            if let Some(i) = opt {
                self.unplace(t, i);
            }
            if let Err(e) = res {
                self.free |= bit;
                return Err(e);
            }
        }
        self.free |= bit;
        Ok(())
    }

    fn to_solution(&self, choice: &[Option<usize>]) -> FirstStageSolution {
        let mut sol = FirstStageSolution::closed(self.inst);
        let n_fac = self.configs.len();
        let k = self.w.len();
        let mut load = vec![vec![0.0; k]; n_fac];
        let mut count = vec![0usize; n_fac];
        for (t, c) in choice.iter().enumerate() {
            if let Some(i) = *c {
                sol.assign[self.items[t].customer] = Some(i);
                count[i] += 1;
                for (l, &x) in load[i].iter_mut().zip(&self.items[t].d) {
                    *l += x;
                }
            }
        }
        for i in 0..n_fac {
            if count[i] == 0 {
                continue;
            }
            let mut best = (f64::NEG_INFINITY, 0);
            for (c, &(cap, open)) in self.configs[i].iter().enumerate() {
                let served: f64 = load[i].iter().zip(&self.w).map(|(&l, &wk)| wk * l.min(cap)).sum();
                let v = -open + self.r * served;
                if v > best.0 {
                    best = (v, c);
                }
            }
            sol.config[i] = Some(best.1);
        }
        sol
    }
}
