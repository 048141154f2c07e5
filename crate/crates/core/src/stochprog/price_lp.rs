//! Exact scenario prices for one facility's stochastic knapsack.
//!
//! For remaining capacities `c_k > 0`, scenario weights `rw_k` (revenue rate
//! times probability) and free items with demands `d_jk` and costs
//! `cost_j >= 0`, solves
//!
//! ```text
//! min  sum_k (rw_k - pi_k) c_k + sum_j z_j
//! s.t. z_j >= pi . d_j - cost_j,  z >= 0,  0 <= pi <= rw
//! ```
//!
//! which is the LP dual of `max_x sum_k rw_k min(c_k, d_k . x) - cost . x`
//! over `x in [0, 1]^n`. The program has one row per item, so a dense
//! bounded-variable simplex is fast. Every `pi` in the box yields a valid
//! bound, so callers recompute the bound from `pi` rather than trusting the
//! final objective.

const EPS: f64 = 1e-9;

pub(crate) struct PriceLp {
    tab: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    cost: Vec<f64>,
    upper: Vec<f64>,
}

pub(crate) struct PriceSolution {
    /// Price per capacity column, in input order.
    pub pi: Vec<f64>,
    /// Fractional use of each item at the optimum, in `[0, 1]`.
    pub usage: Vec<f64>,
}

impl PriceLp {
    pub fn new() -> Self {
        PriceLp {
            tab: Vec::new(),
            beta: Vec::new(),
            basis: Vec::new(),
            at_upper: Vec::new(),
            is_basic: Vec::new(),
            cost: Vec::new(),
            upper: Vec::new(),
        }
    }

    /// `cap[k]` and `rw[k]` describe the columns; `demand(j, k)` and
    /// `item_cost[j]` the rows.
    pub fn solve(
        &mut self,
        cap: &[f64],
        rw: &[f64],
        item_cost: &[f64],
        demand: impl Fn(usize, usize) -> f64,
    ) -> PriceSolution {
        let kk = cap.len();
        let m = item_cost.len();
        let ncol = kk + 2 * m;
        if m == 0 {
            // Without items every unit of price only costs capacity value.
            return PriceSolution { pi: vec![0.0; kk], usage: Vec::new() };
        }

        // Columns: pi_k, then z_j, then slack t_j. Row j reads
        // sum_k d_jk pi_k - z_j + t_j = cost_j, so the slacks start basic.
        self.tab.clear();
        self.tab.resize(m * ncol, 0.0);
        for j in 0..m {
            let row = &mut self.tab[j * ncol..(j + 1) * ncol];
            for (k, v) in row.iter_mut().enumerate().take(kk) {
                *v = demand(j, k);
            }
            row[kk + j] = -1.0;
            row[kk + m + j] = 1.0;
        }
        self.beta.clear();
        self.beta.extend(item_cost.iter().map(|&c| c.max(0.0)));
        self.basis.clear();
        self.basis.extend((0..m).map(|j| kk + m + j));
        self.at_upper.clear();
        self.at_upper.resize(ncol, false);
        self.is_basic.clear();
        self.is_basic.resize(ncol, false);
        for j in 0..m {
            self.is_basic[kk + m + j] = true;
        }
        self.cost.clear();
        self.cost.extend(cap.iter().map(|&c| -c));
        self.cost.extend(std::iter::repeat_n(1.0, m));
        self.cost.extend(std::iter::repeat_n(0.0, m));
        self.upper.clear();
        self.upper.extend_from_slice(rw);
        self.upper.extend(std::iter::repeat_n(f64::INFINITY, 2 * m));

        // Reduced costs, kept in step with the tableau.
        let mut red = self.cost.clone();
        let max_iter = 20 * (ncol + m);
        for _ in 0..max_iter {
            let mut best: Option<(usize, f64)> = None;
            for q in 0..ncol {
                if self.is_basic[q] {
                    continue;
                }
                let d = red[q];
                let gain = if self.at_upper[q] { d } else { -d };
                if gain > EPS && best.is_none_or(|b| gain > b.1) {
                    best = Some((q, gain));
                }
            }
            let Some((q, _)) = best else { break };
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

            // Ratio test: basic values move by -dir * step * tab[r][q].
            let mut step = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            for r in 0..m {
                let a = dir * self.tab[r * ncol + q];
                let b = self.basis[r];
                if a > EPS {
                    let s = self.beta[r].max(0.0) / a;
                    if s < step {
                        step = s;
                        leave = Some((r, false));
                    }
                } else if a < -EPS && self.upper[b].is_finite() {
                    let s = (self.upper[b] - self.beta[r]).max(0.0) / -a;
                    if s < step {
                        step = s;
                        leave = Some((r, true));
                    }
                }
            }
            if !step.is_finite() {
                break;
            }
            for r in 0..m {
                self.beta[r] -= dir * step * self.tab[r * ncol + q];
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, to_upper)) => {
                    let entering_value = (if self.at_upper[q] { self.upper[q] } else { 0.0 }) + dir * step;
                    let out = self.basis[r];
                    self.is_basic[out] = false;
                    self.at_upper[out] = to_upper;
                    self.is_basic[q] = true;
                    self.at_upper[q] = false;
                    self.basis[r] = q;
                    self.beta[r] = entering_value;
                    self.pivot(r, q, ncol, &mut red);
                }
            }
        }

        let mut pi = vec![0.0; kk];
        for (k, p) in pi.iter_mut().enumerate() {
            if self.at_upper[k] {
                *p = self.upper[k];
            }
        }
        for r in 0..m {
            let b = self.basis[r];
            if b < kk {
                pi[b] = self.beta[r];
            }
        }
        for (p, &u) in pi.iter_mut().zip(rw) {
            *p = p.clamp(0.0, u);
        }
        // The reduced cost of slack t_j is the item's primal use.
        let usage = (0..m).map(|j| red[kk + m + j].clamp(0.0, 1.0)).collect();
        PriceSolution { pi, usage }
    }

    fn pivot(&mut self, r: usize, q: usize, ncol: usize, red: &mut [f64]) {
        let m = self.basis.len();
        let piv = self.tab[r * ncol + q];
        for v in &mut self.tab[r * ncol..(r + 1) * ncol] {
            *v /= piv;
        }
        let (before, rest) = self.tab.split_at_mut(r * ncol);
        let (prow, after) = rest.split_at_mut(ncol);
        for other in before.chunks_exact_mut(ncol).chain(after.chunks_exact_mut(ncol)) {
            let f = other[q];
            if f != 0.0 {
                for (o, &p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
            }
        }
        let f = red[q];
        if f != 0.0 {
            for (o, &p) in red.iter_mut().zip(prow.iter()) {
                *o -= f * p;
            }
        }
        debug_assert_eq!(m, self.beta.len());
    }
}

/// Upper bound for given prices: `sum_k (rw_k - pi_k) c_k + sum_j (pi . d_j - cost_j)^+`.
#[cfg(test)]
pub(crate) fn bound_for(
    cap: &[f64],
    rw: &[f64],
    item_cost: &[f64],
    demand: impl Fn(usize, usize) -> f64,
    pi: &[f64],
) -> f64 {
    let mut v: f64 = cap.iter().zip(rw).zip(pi).map(|((&c, &w), &p)| (w - p) * c).sum();
    for (j, &cost) in item_cost.iter().enumerate() {
        let gain: f64 = (0..cap.len()).map(|k| pi[k] * demand(j, k)).sum::<f64>() - cost;
        v += gain.max(0.0);
    }
    v
}
