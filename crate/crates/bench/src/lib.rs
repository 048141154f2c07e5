//! Shared fixtures for the benchmarks.

use pesp_core::instance::{generate_instance, DistributionKind, Instance};

/// The generator instance used across benchmarks, identified by customer
/// count and seed.
pub fn fixture(n_customers: usize, kind: DistributionKind, seed: u64) -> Instance {
    generate_instance(5, 4, n_customers, kind, seed)
}
