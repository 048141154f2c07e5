//! First-stage costs and second-stage revenue of the facility model.
//!
//! Each customer is served by at most one facility, so for a fixed plan the
//! revenue linear program splits into one capacity-limited sum per facility
//! and its optimum is `r * sum_i min(capacity_i, assigned demand_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Scenario};
use crate::mip::{MipModel, RowSense};

/// Facility configurations and customer assignments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FirstStageSolution {
    /// Chosen configuration per facility; `None` means closed.
    pub config: Vec<Option<usize>>,
    /// Serving facility per customer; `None` means unassigned.
    pub assign: Vec<Option<usize>>,
}

impl FirstStageSolution {
    pub fn closed(inst: &Instance) -> Self {
        FirstStageSolution { config: vec![None; inst.n_facilities()], assign: vec![None; inst.n_customers()] }
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleFirstStage(m));
        if self.config.len() != inst.n_facilities() || self.assign.len() != inst.n_customers() {
            return bad("solution dimensions do not match the instance".into());
        }
        for (i, c) in self.config.iter().enumerate() {
            if let Some(c) = *c {
                if c >= inst.facilities[i].configs.len() {
                    return bad(format!("facility {i} has no configuration {c}"));
                }
            }
        }
        for (j, a) in self.assign.iter().enumerate() {
            if let Some(i) = *a {
                if i >= inst.n_facilities() {
                    return bad(format!("customer {j} assigned to unknown facility {i}"));
                }
                if self.config[i].is_none() {
                    return bad(format!("customer {j} assigned to closed facility {i}"));
                }
            }
        }
        Ok(())
    }

    /// Capacity of facility `i` under this plan (0 when closed).
    pub fn capacity(&self, inst: &Instance, i: usize) -> f64 {
        self.config[i].map_or(0.0, |c| inst.facilities[i].configs[c].capacity)
    }

    /// Indices of open facilities.
    pub fn open_facilities(&self) -> impl Iterator<Item = usize> + '_ {
        self.config.iter().enumerate().filter_map(|(i, c)| c.map(|_| i))
    }
}

/// Open plus assignment costs of a feasible plan.
pub fn first_stage_cost(inst: &Instance, sol: &FirstStageSolution) -> Result<f64> {
    sol.validate(inst)?;
    Ok(first_stage_cost_unchecked(inst, sol))
}

pub(crate) fn first_stage_cost_unchecked(inst: &Instance, sol: &FirstStageSolution) -> f64 {
    let open: f64 =
        sol.config.iter().enumerate().filter_map(|(i, c)| c.map(|c| inst.facilities[i].configs[c].open_cost)).sum();
    let assign: f64 =
        sol.assign.iter().enumerate().filter_map(|(j, a)| a.map(|i| inst.customers[j].assign_costs[i])).sum();
    open + assign
}

/// Optimal second-stage revenue for demand vector `demand`.
pub fn recourse_value(inst: &Instance, sol: &FirstStageSolution, demand: &[f64]) -> f64 {
    let mut load = vec![0.0; inst.n_facilities()];
    for (j, a) in sol.assign.iter().enumerate() {
        if let Some(i) = *a {
            load[i] += demand[j];
        }
    }
    let served: f64 = load.iter().enumerate().map(|(i, &l)| l.min(sol.capacity(inst, i))).sum();
    inst.revenue_rate * served
}

/// Weighted expected revenue over `scenarios`.
pub fn expected_recourse(inst: &Instance, sol: &FirstStageSolution, scenarios: &[Scenario]) -> f64 {
    scenarios.iter().map(|s| s.weight * recourse_value(inst, sol, &s.demand)).sum()
}

/// Two-stage objective: expected revenue minus first-stage cost.
pub fn plan_value(inst: &Instance, sol: &FirstStageSolution, scenarios: &[Scenario]) -> Result<f64> {
    Ok(expected_recourse(inst, sol, scenarios) - first_stage_cost(inst, sol)?)
}

pub fn y_name(i: usize, c: usize) -> String {
    format!("y_{i}_{c}")
}

pub fn u_name(i: usize, j: usize) -> String {
    format!("u_{i}_{j}")
}

pub fn f_name(i: usize, j: usize, k: usize) -> String {
    format!("f_{i}_{j}_{k}")
}

/// Variable indices of the first-stage binaries inside a model built by
/// [`add_first_stage`].
pub(crate) struct FirstStageVars {
    pub y: Vec<Vec<usize>>,
    pub u: Vec<Vec<usize>>,
}

/// Adds `y`, `u` and the plan constraints (one config per facility, assign
/// only to open facilities, at most one facility per customer). `suffix`
/// distinguishes copies, e.g. per outcome in the nonanticipative model.
pub(crate) fn add_first_stage(model: &mut MipModel, inst: &Instance, suffix: &str, scale: f64) -> FirstStageVars {
    let y: Vec<Vec<usize>> = inst
        .facilities
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.configs
                .iter()
                .enumerate()
                .map(|(c, cfg)| model.add_binary(&format!("{}{suffix}", y_name(i, c)), -scale * cfg.open_cost))
                .collect()
        })
        .collect();
    let u: Vec<Vec<usize>> = (0..inst.n_facilities())
        .map(|i| {
            (0..inst.n_customers())
                .map(|j| {
                    model.add_binary(&format!("{}{suffix}", u_name(i, j)), -scale * inst.customers[j].assign_costs[i])
                })
                .collect()
        })
        .collect();
    for (i, yi) in y.iter().enumerate() {
        model.add_row(&format!("cfg_{i}{suffix}"), yi.iter().map(|&v| (v, 1.0)).collect(), RowSense::Le, 1.0);
        for j in 0..inst.n_customers() {
            let mut coeffs = vec![(u[i][j], 1.0)];
            coeffs.extend(yi.iter().map(|&v| (v, -1.0)));
            model.add_row(&format!("open_{i}_{j}{suffix}"), coeffs, RowSense::Le, 0.0);
        }
    }
    for j in 0..inst.n_customers() {
        model.add_row(
            &format!("single_{j}{suffix}"),
            (0..inst.n_facilities()).map(|i| (u[i][j], 1.0)).collect(),
            RowSense::Le,
            1.0,
        );
    }
    FirstStageVars { y, u }
}

/// Adds flow variables and capacity/demand rows for one scenario with
/// objective weight `weight`, linked to the plan `fs`.
pub(crate) fn add_second_stage(
    model: &mut MipModel,
    inst: &Instance,
    fs: &FirstStageVars,
    demand: &[f64],
    weight: f64,
    k: usize,
) {
    let r = inst.revenue_rate;
    for (i, fac) in inst.facilities.iter().enumerate() {
        let flows: Vec<usize> = (0..inst.n_customers())
            .map(|j| model.add_continuous(&f_name(i, j, k), 0.0, f64::INFINITY, weight * r))
            .collect();
        let mut cap: Vec<(usize, f64)> = flows.iter().map(|&f| (f, 1.0)).collect();
        cap.extend(fac.configs.iter().enumerate().map(|(c, cfg)| (fs.y[i][c], -cfg.capacity)));
        model.add_row(&format!("cap_{i}_{k}"), cap, RowSense::Le, 0.0);
        for (j, &f) in flows.iter().enumerate() {
            model.add_row(&format!("dem_{i}_{j}_{k}"), vec![(f, 1.0), (fs.u[i][j], -demand[j])], RowSense::Le, 0.0);
        }
    }
}

/// Deterministic-equivalent MIP over a weighted scenario list.
pub fn emit_extensive_form(inst: &Instance, scenarios: &[Scenario]) -> Result<MipModel> {
    if scenarios.is_empty() {
        return Err(Error::InvalidArgument("extensive form needs at least one scenario".into()));
    }
    let total: f64 = scenarios.iter().map(|s| s.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("scenario weights sum to {total}, not 1")));
    }
    let mut model = MipModel::new("extensive_form");
    let fs = add_first_stage(&mut model, inst, "", 1.0);
    for (k, s) in scenarios.iter().enumerate() {
        add_second_stage(&mut model, inst, &fs, &s.demand, s.weight, k);
    }
    Ok(model)
}

/// Reads a plan back from variable values of a model built with
/// [`emit_extensive_form`]. Values above one half count as 1.
pub fn solution_from_values(inst: &Instance, model: &MipModel, values: &[f64]) -> FirstStageSolution {
    let mut sol = FirstStageSolution::closed(inst);
    for (i, f) in inst.facilities.iter().enumerate() {
        for c in 0..f.configs.len() {
            if let Some(v) = model.var_index(&y_name(i, c)) {
                if values[v] > 0.5 && sol.config[i].is_none() {
                    sol.config[i] = Some(c);
                }
            }
        }
    }
    for j in 0..inst.n_customers() {
        for i in 0..inst.n_facilities() {
            if let Some(v) = model.var_index(&u_name(i, j)) {
                if values[v] > 0.5 && sol.assign[j].is_none() && sol.config[i].is_some() {
                    sol.assign[j] = Some(i);
                }
            }
        }
    }
    sol
}
