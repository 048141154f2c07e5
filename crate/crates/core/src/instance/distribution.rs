use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when matching an observed value against a discrete atom.
const ATOM_TOL: f64 = 1e-9;

/// Marginal demand distribution of one customer.
///
/// Both variants are a two-way mixture: with probability `rho` the demand is
/// "low", otherwise "high". For `Bernoulli` the branches are the atoms 0 and
/// `nominal`; for `MixedTriangular` they are the triangles `(0, 0, low_max)`
/// and `(high_min, high_mode, high_max)` given as (min, mode, max).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DemandDistribution {
    Bernoulli { rho: f64, nominal: f64 },
    MixedTriangular { rho: f64, low_max: f64, high_min: f64, high_mode: f64, high_max: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Bernoulli,
    MixedTriangular,
}

impl DemandDistribution {
    pub fn kind(&self) -> DistributionKind {
        match self {
            DemandDistribution::Bernoulli { .. } => DistributionKind::Bernoulli,
            DemandDistribution::MixedTriangular { .. } => DistributionKind::MixedTriangular,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            DemandDistribution::Bernoulli { rho, .. } | DemandDistribution::MixedTriangular { rho, .. } => rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        let rho = self.rho();
        if !(0.0..=1.0).contains(&rho) {
            return bad(format!("rho = {rho} is not a probability"));
        }
        match *self {
            DemandDistribution::Bernoulli { nominal, .. } => {
                if !(nominal > 0.0 && nominal.is_finite()) {
                    return bad(format!("nominal demand {nominal} must be positive"));
                }
            }
            DemandDistribution::MixedTriangular { low_max, high_min, high_mode, high_max, .. } => {
                if !(low_max > 0.0 && low_max.is_finite()) {
                    return bad(format!("low_max {low_max} must be positive"));
                }
                if !(0.0 <= high_min && high_min <= high_mode && high_mode <= high_max) || !high_max.is_finite() {
                    return bad(format!(
                        "high branch needs 0 <= min <= mode <= max, got ({high_min}, {high_mode}, {high_max})"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, DemandDistribution::Bernoulli { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DemandDistribution::Bernoulli { rho, nominal } => (1.0 - rho) * nominal,
            DemandDistribution::MixedTriangular { rho, low_max, high_min, high_mode, high_max } => {
                rho * low_max / 3.0 + (1.0 - rho) * (high_min + high_mode + high_max) / 3.0
            }
        }
    }

    /// Largest possible demand.
    pub fn max_value(&self) -> f64 {
        match *self {
            DemandDistribution::Bernoulli { rho, nominal } => {
                if rho < 1.0 {
                    nominal
                } else {
                    0.0
                }
            }
            DemandDistribution::MixedTriangular { rho, low_max, high_max, .. } => {
                if rho < 1.0 {
                    high_max.max(if rho > 0.0 { low_max } else { 0.0 })
                } else {
                    low_max
                }
            }
        }
    }

    /// Positive-probability atoms `(value, probability)` of a finite
    /// distribution, low outcome first; `None` for continuous ones.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            DemandDistribution::Bernoulli { rho, nominal } => {
                let mut out = Vec::with_capacity(2);
                if rho > 0.0 {
                    out.push((0.0, rho));
                }
                if rho < 1.0 {
                    out.push((nominal, 1.0 - rho));
                }
                Some(out)
            }
            DemandDistribution::MixedTriangular { .. } => None,
        }
    }

    /// Whether `value` can be observed (lies in the support).
    pub fn in_support(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match *self {
            DemandDistribution::Bernoulli { .. } => {
                self.atoms().unwrap().iter().any(|&(v, _)| (v - value).abs() <= ATOM_TOL * v.abs().max(1.0))
            }
            DemandDistribution::MixedTriangular { rho, low_max, high_min, high_max, .. } => {
                let low = rho > 0.0 && (0.0..=low_max).contains(&value);
                let high = rho < 1.0 && (high_min..=high_max).contains(&value);
                low || high
            }
        }
    }

    /// Inverse of the full mixture CDF at `u` in `[0, 1)`.
    ///
    /// The mixture branch and the position within the branch both come from
    /// the single uniform `u`, which keeps the map monotone so stratifying `u`
    /// stratifies the demand.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            DemandDistribution::Bernoulli { rho, nominal } => {
                if u < rho {
                    0.0
                } else {
                    nominal
                }
            }
            DemandDistribution::MixedTriangular { rho, low_max, high_min, high_mode, high_max } => {
                if u < rho {
                    triangular_quantile(0.0, 0.0, low_max, u / rho)
                } else {
                    let v = if rho < 1.0 { (u - rho) / (1.0 - rho) } else { 0.0 };
                    triangular_quantile(high_min, high_mode, high_max, v)
                }
            }
        }
    }

    /// Mixture CDF, used by tests of the sampler.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DemandDistribution::Bernoulli { rho, nominal } => {
                if x < 0.0 {
                    0.0
                } else if x < nominal {
                    rho
                } else {
                    1.0
                }
            }
            DemandDistribution::MixedTriangular { rho, low_max, high_min, high_mode, high_max } => {
                rho * triangular_cdf(0.0, 0.0, low_max, x)
                    + (1.0 - rho) * triangular_cdf(high_min, high_mode, high_max, x)
            }
        }
    }
}

fn triangular_quantile(a: f64, c: f64, b: f64, v: f64) -> f64 {
    if b <= a {
        return a;
    }
    let v = v.clamp(0.0, 1.0);
    let fc = (c - a) / (b - a);
    if v < fc {
        a + (v * (b - a) * (c - a)).sqrt()
    } else {
        b - ((1.0 - v) * (b - a) * (b - c)).sqrt()
    }
}

fn triangular_cdf(a: f64, c: f64, b: f64, x: f64) -> f64 {
    if x < a {
        0.0
    } else if x >= b {
        1.0
    } else if x <= c {
        (x - a) * (x - a) / ((b - a) * (c - a))
    } else {
        1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
    }
}
