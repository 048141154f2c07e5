use rand::seq::SliceRandom;
use rand::Rng;

use super::{Instance, SampleMode, Scenario};
use crate::error::Result;

/// `n` points in `[0,1)^dims`, row-major by point.
///
/// In LHS mode each coordinate is split into `n` equal strata with exactly
/// one point per stratum, and the strata are matched across coordinates by
/// independent random permutations.
pub fn uniform_points<R: Rng + ?Sized>(n: usize, dims: usize, mode: SampleMode, rng: &mut R) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dims]; n];
    match mode {
        SampleMode::Mc => {
            for p in pts.iter_mut() {
                for u in p.iter_mut() {
                    *u = rng.random::<f64>();
                }
            }
        }
        SampleMode::Lhs => {
            let mut perm: Vec<usize> = (0..n).collect();
            for d in 0..dims {
                perm.shuffle(rng);
                for (i, p) in pts.iter_mut().enumerate() {
                    let u = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
                    p[d] = u.min(1.0 - f64::EPSILON);
                }
            }
        }
    }
    pts
}

/// Draws `n` demand vectors from the product of the customer marginals.
pub fn sample_joint<R: Rng + ?Sized>(inst: &Instance, n: usize, mode: SampleMode, rng: &mut R) -> Vec<Scenario> {
    let free: Vec<Option<f64>> = vec![None; inst.n_customers()];
    fill(inst, &free, n, mode, rng)
}

/// Draws `n` demand vectors with the observed coordinates fixed.
///
/// Demands are independent across customers, so the unobserved coordinates
/// keep their unconditional marginals.
pub fn sample_conditional<R: Rng + ?Sized>(
    inst: &Instance,
    observed: &[Option<f64>],
    n: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Vec<Scenario>> {
    inst.check_observation(observed)?;
    Ok(fill(inst, observed, n, mode, rng))
}

fn fill<R: Rng + ?Sized>(
    inst: &Instance,
    observed: &[Option<f64>],
    n: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Vec<Scenario> {
    let free: Vec<usize> = (0..inst.n_customers()).filter(|&j| observed[j].is_none()).collect();
    let pts = uniform_points(n, free.len(), mode, rng);
    let weight = 1.0 / n as f64;
    pts.into_iter()
        .map(|u| {
            let mut demand: Vec<f64> = observed.iter().map(|v| v.unwrap_or(0.0)).collect();
            for (k, &j) in free.iter().enumerate() {
                demand[j] = inst.customers[j].distribution.quantile(u[k]);
            }
            Scenario { demand, weight }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DemandDistribution, DistributionKind};
    use crate::rng::stream;

    fn bernoulli_instance(params: &[(f64, f64)]) -> Instance {
        let mut inst = generate_instance(1, 1, params.len(), DistributionKind::Bernoulli, 3);
        for (c, &(rho, nominal)) in inst.customers.iter_mut().zip(params) {
            c.distribution = DemandDistribution::Bernoulli { rho, nominal };
        }
        inst
    }

    #[test]
    fn lhs_one_point_per_quartile() {
        let mut inst = generate_instance(1, 1, 1, DistributionKind::MixedTriangular, 8);
        inst.customers[0].distribution = DemandDistribution::MixedTriangular {
            rho: 0.3,
            low_max: 5.0,
            high_min: 8.0,
            high_mode: 9.0,
            high_max: 20.0,
        };
        let dist = inst.customers[0].distribution.clone();
        for seed in 0..20 {
            let s = sample_joint(&inst, 4, SampleMode::Lhs, &mut stream(seed, &[1]));
            let mut hits = [0usize; 4];
            for sc in &s {
                let q = (dist.cdf(sc.demand[0]) * 4.0).floor().min(3.0) as usize;
                hits[q] += 1;
            }
            assert_eq!(hits, [1, 1, 1, 1]);
            assert!(s.iter().all(|sc| sc.weight == 0.25));
        }
    }

    #[test]
    fn certain_low_outcome() {
        let inst = bernoulli_instance(&[(1.0, 10.0), (1.0, 3.0)]);
        let s = sample_joint(&inst, 50, SampleMode::Mc, &mut stream(1, &[2]));
        assert!(s.iter().all(|sc| sc.demand.iter().all(|&d| d == 0.0)));
    }

    #[test]
    fn mc_mean_matches_analytic() {
        let inst = bernoulli_instance(&[(0.3, 10.0)]);
        let n = 100_000;
        let s = sample_joint(&inst, n, SampleMode::Mc, &mut stream(11, &[3]));
        let mean = s.iter().map(|sc| sc.demand[0]).sum::<f64>() / n as f64;
        // sd of one draw: nominal * sqrt(rho (1 - rho)).
        let se = 10.0 * (0.3f64 * 0.7).sqrt() / (n as f64).sqrt();
        assert!((mean - 7.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn conditional_fixes_observed() {
        let inst = bernoulli_instance(&[(0.4, 6.0), (0.25, 8.0)]);
        let s = sample_conditional(&inst, &[Some(6.0), None], 100, SampleMode::Mc, &mut stream(5, &[4])).unwrap();
        assert!(s.iter().all(|sc| sc.demand[0] == 6.0));
        let freq = s.iter().filter(|sc| sc.demand[1] == 8.0).count() as f64 / 100.0;
        let tol = 3.0 * (0.25f64 * 0.75 / 100.0).sqrt();
        assert!((freq - 0.75).abs() <= tol, "freq {freq}");

        let full =
            sample_conditional(&inst, &[Some(0.0), Some(8.0)], 7, SampleMode::Lhs, &mut stream(5, &[5])).unwrap();
        assert!(full.iter().all(|sc| sc.demand == vec![0.0, 8.0]));

        let err = sample_conditional(&inst, &[Some(3.0), None], 3, SampleMode::Mc, &mut stream(5, &[6]));
        assert!(err.is_err());
    }

    #[test]
    fn vacuous_conditioning_matches_joint() {
        let inst = generate_instance(2, 2, 5, DistributionKind::MixedTriangular, 4);
        let a = sample_joint(&inst, 30, SampleMode::Lhs, &mut stream(9, &[7]));
        let b = sample_conditional(&inst, &[None; 5], 30, SampleMode::Lhs, &mut stream(9, &[7])).unwrap();
        assert_eq!(a, b);
    }
}
