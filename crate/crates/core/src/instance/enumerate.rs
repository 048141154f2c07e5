use super::{Instance, Observation, Scenario};
use crate::error::{Error, Result};
use crate::probe::ProbeSet;

/// Largest number of outcomes any enumeration will materialize.
pub const ENUMERATION_CAP: u128 = 1 << 22;

/// Number of positive-probability outcomes of the coordinates in `set`.
pub fn projection_support_size(inst: &Instance, set: ProbeSet) -> Result<u128> {
    let mut size: u128 = 1;
    for j in set.iter() {
        let atoms = inst.customers[j].distribution.atoms().ok_or(Error::InfiniteSupport(j))?;
        size = size.saturating_mul(atoms.len() as u128);
    }
    Ok(size)
}

/// All outcomes of the coordinates in `set` with their probabilities.
pub fn enumerate_support_projection(inst: &Instance, set: ProbeSet) -> Result<Vec<(Observation, f64)>> {
    let size = projection_support_size(inst, set)?;
    if size > ENUMERATION_CAP {
        return Err(Error::SizeLimitExceeded { what: "support enumeration", requested: size, limit: ENUMERATION_CAP });
    }
    let base: Observation = vec![None; inst.n_customers()];
    Ok(product(inst, set, base))
}

/// All completions of `observed` with their conditional probabilities.
pub fn enumerate_conditional_support(inst: &Instance, observed: &[Option<f64>]) -> Result<Vec<Scenario>> {
    inst.check_observation(observed)?;
    let free: ProbeSet = (0..inst.n_customers()).filter(|&j| observed[j].is_none()).collect();
    let size = projection_support_size(inst, free)?;
    if size > ENUMERATION_CAP {
        return Err(Error::SizeLimitExceeded {
            what: "conditional support enumeration",
            requested: size,
            limit: ENUMERATION_CAP,
        });
    }
    Ok(product(inst, free, observed.to_vec())
        .into_iter()
        .map(|(obs, p)| Scenario {
            demand: obs.into_iter().map(|v| v.expect("all coordinates fixed")).collect(),
            weight: p,
        })
        .collect())
}

/// Cartesian product of the atoms of `set`, starting from `base`. The lowest
/// index varies slowest.
fn product(inst: &Instance, set: ProbeSet, base: Observation) -> Vec<(Observation, f64)> {
    let mut out = vec![(base, 1.0)];
    for j in set.iter() {
        let atoms = inst.customers[j].distribution.atoms().expect("checked finite");
        let mut next = Vec::with_capacity(out.len() * atoms.len());
        for (obs, p) in &out {
            for &(v, q) in &atoms {
                let mut o = obs.clone();
                o[j] = Some(v);
                next.push((o, p * q));
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DemandDistribution, DistributionKind};

    fn inst(params: &[(f64, f64)]) -> Instance {
        let mut inst = generate_instance(1, 1, params.len(), DistributionKind::Bernoulli, 3);
        for (c, &(rho, nominal)) in inst.customers.iter_mut().zip(params) {
            c.distribution = DemandDistribution::Bernoulli { rho, nominal };
        }
        inst
    }

    #[test]
    fn projection_examples() {
        let i = inst(&[(0.5, 4.0), (0.5, 6.0), (0.3, 10.0)]);
        let two = enumerate_support_projection(&i, [0, 1].into_iter().collect()).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|(_, p)| (*p - 0.25).abs() < 1e-15));

        let none = enumerate_support_projection(&i, ProbeSet::empty()).unwrap();
        assert_eq!(none, vec![(vec![None, None, None], 1.0)]);

        let one = enumerate_support_projection(&i, ProbeSet::singleton(2)).unwrap();
        let flat: Vec<(f64, f64)> = one.iter().map(|(o, p)| (o[2].unwrap(), *p)).collect();
        assert_eq!(flat, vec![(0.0, 0.3), (10.0, 0.7)]);
    }

    #[test]
    fn conditional_examples() {
        let i = inst(&[(0.5, 4.0), (0.5, 6.0), (0.3, 10.0)]);
        let s = enumerate_conditional_support(&i, &[Some(4.0), Some(0.0), None]).unwrap();
        assert_eq!(s.len(), 2);
        let full = enumerate_conditional_support(&i, &[Some(4.0), Some(0.0), Some(10.0)]).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].weight, 1.0);

        let big = inst(&[(0.5, 1.0); 23]);
        assert!(matches!(enumerate_conditional_support(&big, &[None; 23]), Err(Error::SizeLimitExceeded { .. })));
        let twenty = inst(&[(0.5, 1.0); 20]);
        assert_eq!(projection_support_size(&twenty, ProbeSet::full(20)).unwrap(), 1 << 20);
    }

    #[test]
    fn continuous_is_refused() {
        let i = generate_instance(1, 1, 2, DistributionKind::MixedTriangular, 3);
        assert!(matches!(enumerate_support_projection(&i, ProbeSet::singleton(1)), Err(Error::InfiniteSupport(1))));
        // Nothing to enumerate when the continuous coordinates are outside the set.
        assert_eq!(enumerate_support_projection(&i, ProbeSet::empty()).unwrap().len(), 1);
    }

    #[test]
    fn total_probability_recombines() {
        let i = inst(&[(0.2, 4.0), (0.7, 6.0), (0.4, 10.0), (0.5, 3.0)]);
        let s: ProbeSet = [1, 3].into_iter().collect();
        let joint = enumerate_conditional_support(&i, &[None; 4]).unwrap();
        let mut recombined: Vec<(Vec<f64>, f64)> = Vec::new();
        for (obs, p) in enumerate_support_projection(&i, s).unwrap() {
            for sc in enumerate_conditional_support(&i, &obs).unwrap() {
                recombined.push((sc.demand, p * sc.weight));
            }
        }
        assert_eq!(recombined.len(), joint.len());
        for sc in &joint {
            let (_, p) = recombined.iter().find(|(d, _)| *d == sc.demand).unwrap();
            assert!((p - sc.weight).abs() < 1e-15);
        }
    }
}
