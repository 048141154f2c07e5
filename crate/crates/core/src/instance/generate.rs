use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    Customer, DemandDistribution, DistributionKind, Facility, FacilityConfig, Instance, InstanceMeta, FORMAT_VERSION,
};
use crate::rng::{stream, tag};

/// Sizes and value ranges for random instances. Every range is sampled
/// uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_facilities: usize,
    pub n_configs: usize,
    pub n_customers: usize,
    pub kind: DistributionKind,
    pub capacity: (f64, f64),
    /// Open cost per unit of capacity; the drawn cost is then scaled by a
    /// noise factor from `open_cost_noise`.
    pub open_cost_per_unit: f64,
    pub open_cost_noise: (f64, f64),
    pub assign_cost: (f64, f64),
    pub probe_cost: (f64, f64),
    pub rho: (f64, f64),
    /// Range of the nominal (high) demand level.
    pub nominal_demand: (f64, f64),
    pub revenue_rate: f64,
}

impl GeneratorParams {
    pub fn new(n_facilities: usize, n_configs: usize, n_customers: usize, kind: DistributionKind) -> Self {
        GeneratorParams {
            n_facilities,
            n_configs,
            n_customers,
            kind,
            capacity: (50.0, 200.0),
            open_cost_per_unit: 1.0,
            open_cost_noise: (0.8, 1.2),
            assign_cost: (1.0, 10.0),
            probe_cost: (5.0, 50.0),
            rho: (0.2, 0.8),
            nominal_demand: (10.0, 40.0),
            revenue_rate: 3.0,
        }
    }

    pub fn generate(&self, seed: u64) -> Instance {
        let mut rng = stream(seed, &[tag::GENERATE]);
        let mut draw = |(lo, hi): (f64, f64)| -> f64 {
            if hi > lo {
                round2(rng.random_range(lo..hi))
            } else {
                round2(lo)
            }
        };

        let facilities = (0..self.n_facilities)
            .map(|id| {
                let mut caps: Vec<f64> = (0..self.n_configs).map(|_| draw(self.capacity)).collect();
                caps.sort_by(f64::total_cmp);
                let configs = caps
                    .into_iter()
                    .map(|capacity| FacilityConfig {
                        capacity,
                        open_cost: round2(capacity * self.open_cost_per_unit * draw(self.open_cost_noise)),
                    })
                    .collect();
                Facility { id, configs }
            })
            .collect();

        let customers = (0..self.n_customers)
            .map(|id| {
                let assign_costs = (0..self.n_facilities).map(|_| draw(self.assign_cost)).collect();
                let probe_cost = draw(self.probe_cost);
                let rho = draw(self.rho);
                let level = draw(self.nominal_demand);
                let distribution = match self.kind {
                    DistributionKind::Bernoulli => DemandDistribution::Bernoulli { rho, nominal: level },
                    DistributionKind::MixedTriangular => {
                        let low_max = round2(level * draw((0.2, 0.4)));
                        let high_min = round2(level * draw((0.5, 0.8)));
                        let high_max = round2(level * draw((1.2, 1.6)));
                        DemandDistribution::MixedTriangular { rho, low_max, high_min, high_mode: level, high_max }
                    }
                };
                Customer { id, assign_costs, probe_cost, distribution }
            })
            .collect();

        let suffix = match self.kind {
            DistributionKind::Bernoulli => "",
            DistributionKind::MixedTriangular => "_C",
        };
        Instance {
            format_version: FORMAT_VERSION,
            facilities,
            customers,
            revenue_rate: self.revenue_rate,
            meta: InstanceMeta { name: format!("J{}{}_s{}", self.n_customers, suffix, seed), seed: Some(seed) },
        }
    }
}

/// Random instance with the default value ranges.
pub fn generate_instance(
    n_facilities: usize,
    n_configs: usize,
    n_customers: usize,
    kind: DistributionKind,
    seed: u64,
) -> Instance {
    GeneratorParams::new(n_facilities, n_configs, n_customers, kind).generate(seed)
}

/// Two decimals keep instance files readable and make equality of drawn
/// values exact after a JSON round trip.
fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
