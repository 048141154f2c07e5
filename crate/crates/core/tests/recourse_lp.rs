mod oracle;

use oracle::{integral, q, random_plan, recourse_lp};
use pesp_core::recourse::recourse_value;
use pesp_core::{generate_instance, DistributionKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_equals_transportation_lp_on_integer_data(
        seed in 0u64..10_000,
        fac in 1usize..4,
        cust in 1usize..6,
    ) {
        let inst = integral(&generate_instance(fac, 2, cust, DistributionKind::Bernoulli, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = random_plan(&inst, &mut rng);
        let demand: Vec<f64> = (0..cust).map(|_| rng.random_range(0..120) as f64).collect();
        prop_assert_eq!(q(recourse_value(&inst, &plan, &demand)), recourse_lp(&inst, &plan, &demand));
    }

    #[test]
    fn closed_form_matches_lp_on_generated_data(
        seed in 0u64..10_000,
        fac in 1usize..4,
        cust in 1usize..6,
    ) {
        let inst = generate_instance(fac, 3, cust, DistributionKind::MixedTriangular, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let plan = random_plan(&inst, &mut rng);
        let demand: Vec<f64> = inst.customers.iter().map(|c| c.distribution.quantile(rng.random())).collect();
        let closed = recourse_value(&inst, &plan, &demand);
        let lp: f64 = num_traits::ToPrimitive::to_f64(&recourse_lp(&inst, &plan, &demand)).unwrap();
        prop_assert!((closed - lp).abs() <= 1e-9 * lp.abs().max(1.0), "{} vs {}", closed, lp);
    }
}

#[test]
fn closed_plan_earns_nothing() {
    let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, 1);
    let plan = pesp_core::FirstStageSolution::closed(&inst);
    let d = [30.0, 20.0, 10.0];
    assert_eq!(recourse_value(&inst, &plan, &d), 0.0);
    assert_eq!(recourse_lp(&inst, &plan, &d), q(0.0));
}
