//! Facility location instances with probeable customer demands.
//!
//! Under the identity information model used throughout the crate, probing
//! customer `j` reveals its demand `d_j` exactly, so one demand vector plays
//! the role of both the observed and the uncertain data.

mod distribution;
mod enumerate;
mod generate;
mod sampling;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probe::{ProbeSet, MAX_PROBES};

pub use distribution::{DemandDistribution, DistributionKind};
pub use enumerate::{
    enumerate_conditional_support, enumerate_support_projection, projection_support_size, ENUMERATION_CAP,
};
pub use generate::{generate_instance, GeneratorParams};
pub use sampling::{sample_conditional, sample_joint, uniform_points};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacilityConfig {
    pub capacity: f64,
    pub open_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: usize,
    pub configs: Vec<FacilityConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    /// Cost of assigning this customer to each facility, indexed by facility.
    pub assign_costs: Vec<f64>,
    pub probe_cost: f64,
    pub distribution: DemandDistribution,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub format_version: u32,
    pub facilities: Vec<Facility>,
    pub customers: Vec<Customer>,
    pub revenue_rate: f64,
    #[serde(default)]
    pub meta: InstanceMeta,
}

/// Values of the probed coordinates: `Some(d_j)` for observed customers.
pub type Observation = Vec<Option<f64>>;

/// One demand realization with its probability (or sample) weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub demand: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Mc,
    #[default]
    Lhs,
}

/// Sample sizes for one estimator run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Outer sample size (`N` for external sampling).
    pub n1: usize,
    /// Inner (conditional) sample size.
    pub n2: usize,
    /// Sample size used to select a first-stage solution.
    pub n3: usize,
    /// Number of independent batches (`L` or `M`).
    pub batches: usize,
    pub mode: SampleMode,
    pub seed: u64,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 || self.batches == 0 {
            return Err(Error::InvalidArgument("sample sizes must be at least 1".into()));
        }
        Ok(())
    }
}

impl Instance {
    pub fn n_customers(&self) -> usize {
        self.customers.len()
    }

    pub fn n_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn probe_costs(&self) -> Vec<f64> {
        self.customers.iter().map(|c| c.probe_cost).collect()
    }

    pub fn all_customers(&self) -> ProbeSet {
        ProbeSet::full(self.n_customers())
    }

    /// True when every customer has a finite (Bernoulli) distribution.
    pub fn is_finite(&self) -> bool {
        self.customers.iter().all(|c| c.distribution.is_finite())
    }

    pub fn first_continuous_in(&self, set: ProbeSet) -> Option<usize> {
        set.iter().find(|&j| !self.customers[j].distribution.is_finite())
    }

    /// Number of first-stage binaries: one per (facility, config) plus one per
    /// (facility, customer).
    pub fn n_first_stage_vars(&self) -> usize {
        let configs: usize = self.facilities.iter().map(|f| f.configs.len()).sum();
        configs + self.n_facilities() * self.n_customers()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.format_version != FORMAT_VERSION {
            return bad(format!("unsupported format_version {}", self.format_version));
        }
        if !(self.revenue_rate > 0.0 && self.revenue_rate.is_finite()) {
            return bad(format!("revenue_rate {} must be positive", self.revenue_rate));
        }
        if self.customers.len() > MAX_PROBES {
            return bad(format!("at most {MAX_PROBES} customers are supported"));
        }
        for (i, f) in self.facilities.iter().enumerate() {
            if f.configs.is_empty() {
                return bad(format!("facility {i} has no configuration"));
            }
            for c in &f.configs {
                if !(c.capacity >= 0.0 && c.open_cost >= 0.0) || !c.capacity.is_finite() || !c.open_cost.is_finite() {
                    return bad(format!("facility {i} has a negative or non-finite capacity or cost"));
                }
            }
        }
        for (j, c) in self.customers.iter().enumerate() {
            if c.assign_costs.len() != self.facilities.len() {
                return bad(format!(
                    "customer {j} lists {} assignment costs for {} facilities",
                    c.assign_costs.len(),
                    self.facilities.len()
                ));
            }
            if c.assign_costs.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
                return bad(format!("customer {j} has a negative assignment cost"));
            }
            if !(c.probe_cost >= 0.0 && c.probe_cost.is_finite()) {
                return bad(format!("customer {j} has a negative probe cost"));
            }
            c.distribution.validate().map_err(|e| Error::InvalidInstance(format!("customer {j}: {e}")))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Checks that each observed coordinate is a possible demand value.
    pub fn check_observation(&self, observed: &[Option<f64>]) -> Result<()> {
        if observed.len() != self.n_customers() {
            return Err(Error::InvalidArgument(format!(
                "observation has length {} for {} customers",
                observed.len(),
                self.n_customers()
            )));
        }
        for (j, v) in observed.iter().enumerate() {
            if let Some(v) = *v {
                if !self.customers[j].distribution.in_support(v) {
                    return Err(Error::ObservationOutOfSupport { customer: j, value: v });
                }
            }
        }
        Ok(())
    }
}

/// Restricts a full demand vector to the coordinates in `set`.
pub fn project(demand: &[f64], set: ProbeSet) -> Observation {
    demand.iter().enumerate().map(|(j, &d)| set.contains(j).then_some(d)).collect()
}

/// Merges scenarios with identical demand vectors, summing their weights.
/// The first occurrence of each vector fixes its position in the output.
pub fn merge_scenarios(scenarios: &[Scenario]) -> Vec<Scenario> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(scenarios.len());
    let mut out: Vec<Scenario> = Vec::new();
    for s in scenarios {
        let key: Vec<u64> = s.demand.iter().map(|d| d.to_bits()).collect();
        match index.get(&key) {
            Some(&k) => out[k].weight += s.weight,
            None => {
                index.insert(key, out.len());
                out.push(s.clone());
            }
        }
    }
    out
}
