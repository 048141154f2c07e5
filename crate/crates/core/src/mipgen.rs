//! The nonanticipative big-M formulation for finite supports.
//!
//! Every outcome `h` of the demand vector gets its own copy of the plan
//! variables. For each unordered pair of outcomes and each plan variable,
//! two rows force the copies to agree unless some probed coordinate tells
//! the outcomes apart:
//!
//! ```text
//! ±(v(h) - v(h')) - M sum_j |d_j(h) - d_j(h')| x_j <= 0,   M = R / eps
//! ```
//!
//! with `R` the range of the variable and `eps` the smallest nonzero
//! coordinate difference. Demands serve as both the observed and the
//! uncertain data, so the flow variables are indexed by outcome too. The
//! model grows with the square of the support size and is meant as a
//! baseline, not a solution method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{enumerate_support_projection, Instance};
use crate::mip::{MipModel, RowSense};
use crate::probe::ProbeSet;
use crate::recourse::{add_first_stage, add_second_stage};

/// Default limit on the number of outcomes.
pub const DEFAULT_OUTCOME_CAP: usize = 1 << 12;

/// Size and big-M statistics of a generated model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaMipMeta {
    pub outcomes: usize,
    pub pairs: usize,
    pub first_stage_vars: usize,
    pub linking_rows: usize,
    pub variables: usize,
    pub integer_variables: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub big_m_min: f64,
    pub big_m_max: f64,
    pub big_m_mean: f64,
    /// Names of the probe indicators, by customer.
    pub probe_vars: Vec<String>,
    /// Naming scheme of the per-outcome copies.
    pub naming: String,
    /// Outcome demand vectors and probabilities, by outcome index.
    pub outcome_demands: Vec<Vec<f64>>,
    pub outcome_probs: Vec<f64>,
}

pub struct NaMip {
    pub model: MipModel,
    pub meta: NaMipMeta,
}

pub fn x_name(j: usize) -> String {
    format!("x_{j}")
}

/// Range of each plan variable (`y` then `u`, facility-major). Every plan
/// variable here is binary, so each range is 1.
pub fn first_stage_ranges(inst: &Instance) -> Vec<f64> {
    vec![1.0; inst.n_first_stage_vars()]
}

/// Builds the model, refusing supports larger than `cap` outcomes.
pub fn build_na_mip(inst: &Instance, cap: usize) -> Result<NaMip> {
    inst.validate()?;
    let n = inst.n_customers();
    if let Some(j) = inst.first_continuous_in(ProbeSet::full(n)) {
        return Err(Error::InfiniteSupport(j));
    }
    let size = crate::instance::projection_support_size(inst, ProbeSet::full(n))?;
    if size > cap as u128 {
        return Err(Error::SizeLimitExceeded {
            what: "nonanticipative model outcomes",
            requested: size,
            limit: cap as u128,
        });
    }
    let outcomes: Vec<(Vec<f64>, f64)> = enumerate_support_projection(inst, ProbeSet::full(n))?
        .into_iter()
        .map(|(obs, p)| (obs.into_iter().map(|v| v.unwrap_or(0.0)).collect(), p))
        .collect();

    let mut model = MipModel::new("na_mip");
    let x: Vec<usize> = (0..n).map(|j| model.add_binary(&x_name(j), -inst.customers[j].probe_cost)).collect();
    let mut plan_vars: Vec<Vec<usize>> = Vec::with_capacity(outcomes.len());
    for (h, (demand, p)) in outcomes.iter().enumerate() {
        let fs = add_first_stage(&mut model, inst, &format!("_h{h}"), *p);
        add_second_stage(&mut model, inst, &fs, demand, *p, h);
        plan_vars.push(fs.y.iter().flatten().chain(fs.u.iter().flatten()).copied().collect());
    }

    let ranges = first_stage_ranges(inst);
    let mut big_m = Vec::new();
    let mut pairs = 0;
    let mut linking = 0;
    for a in 0..outcomes.len() {
        for b in a + 1..outcomes.len() {
            let (da, db) = (&outcomes[a].0, &outcomes[b].0);
            let diff: Vec<(usize, f64)> =
                (0..n).map(|j| (j, (da[j] - db[j]).abs())).filter(|&(_, d)| d > 0.0).collect();
            let eps = diff.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
            debug_assert!(eps.is_finite() && eps > 0.0, "outcomes are distinct");
            pairs += 1;
            for (v, &range) in ranges.iter().enumerate() {
                let m = range / eps;
                big_m.push(m);
                let (va, vb) = (plan_vars[a][v], plan_vars[b][v]);
                for (sign, tag) in [(1.0, "a"), (-1.0, "b")] {
                    let mut coeffs = vec![(va, sign), (vb, -sign)];
                    coeffs.extend(diff.iter().map(|&(j, d)| (x[j], -m * d)));
                    model.add_row(&format!("na_{v}_{a}_{b}_{tag}"), coeffs, RowSense::Le, 0.0);
                    linking += 1;
                }
            }
        }
    }

    let (lo, hi, sum) =
        big_m.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &m| (lo.min(m), hi.max(m), s + m));
    let meta = NaMipMeta {
        outcomes: outcomes.len(),
        pairs,
        first_stage_vars: ranges.len(),
        linking_rows: linking,
        variables: model.vars.len(),
        integer_variables: model.n_integer(),
        rows: model.rows.len(),
        nonzeros: model.n_nonzeros(),
        big_m_min: if big_m.is_empty() { 0.0 } else { lo },
        big_m_max: if big_m.is_empty() { 0.0 } else { hi },
        big_m_mean: if big_m.is_empty() { 0.0 } else { sum / big_m.len() as f64 },
        probe_vars: (0..n).map(x_name).collect(),
        naming: "x_j probe; y_i_c_h<h>, u_i_j_h<h> plan copy for outcome h; f_i_j_h flow in outcome h".into(),
        outcome_demands: outcomes.iter().map(|o| o.0.clone()).collect(),
        outcome_probs: outcomes.iter().map(|o| o.1).collect(),
    };
    Ok(NaMip { model, meta })
}

/// Fixes the probe indicators to the set `set`.
pub fn fix_probes(model: &mut MipModel, n: usize, set: ProbeSet) {
    for j in 0..n {
        let k = model.var_index(&x_name(j)).expect("probe variable present");
        let v = if set.contains(j) { 1.0 } else { 0.0 };
        model.vars[k].lower = v;
        model.vars[k].upper = v;
    }
}
