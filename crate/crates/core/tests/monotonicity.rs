mod oracle;

use oracle::{all_plans, f_by_plans};
use pesp_core::bounds::f_exact;
use pesp_core::sampling::saa_f;
use pesp_core::stochprog::Memo;
use pesp_core::work::WorkCounter;
use pesp_core::{generate_instance, Backend, DistributionKind, ProbeSet, SampleMode};
use proptest::prelude::*;

#[test]
fn exact_f_matches_plan_enumeration() {
    for seed in 0..4 {
        let inst = generate_instance(2, 2, 3, DistributionKind::Bernoulli, seed);
        let plans = all_plans(&inst);
        for bits in 0..8u64 {
            let s = ProbeSet::from_bits(bits);
            let exact = f_exact(&inst, s, &Backend::default()).unwrap().mean;
            let (oracle, _) = f_by_plans(&inst, s, &plans);
            assert!((exact - oracle).abs() < 1e-6, "seed {seed} set {s}: {exact} vs {oracle}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_information_never_hurts(seed in 0u64..1000, a in 0u64..32, b in 0u64..32) {
        let inst = generate_instance(2, 2, 5, DistributionKind::Bernoulli, seed);
        let (small, large) = (ProbeSet::from_bits(a & b), ProbeSet::from_bits(a | b));
        let fs = f_exact(&inst, small, &Backend::default()).unwrap().mean;
        let fl = f_exact(&inst, large, &Backend::default()).unwrap().mean;
        prop_assert!(fs <= fl + 1e-6, "F({}) = {} > F({}) = {}", small, fs, large, fl);
    }

    #[test]
    fn sampled_f_is_monotone_on_a_fixed_sample(seed in 0u64..1000, a in 0u64..64, b in 0u64..64) {
        let inst = generate_instance(2, 2, 6, DistributionKind::MixedTriangular, seed);
        let sample = pesp_core::sampling::replication_sample(&inst, 12, SampleMode::Lhs, seed, 0);
        let memo = Memo::new(1000);
        let work = WorkCounter::new();
        let f = |s| saa_f(&inst, ProbeSet::from_bits(s), &sample, &memo, &Backend::default(), &work).unwrap().estimate.mean;
        prop_assert!(f(a & b) <= f(a | b) + 1e-6);
    }
}
