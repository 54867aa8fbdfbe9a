#[path = "support/ops.rs"]
mod ops;

use ops::{op, run};
use proptest::prelude::*;
use wmfair_core::propagation::Policy;

macro_rules! policy_suite {
    ($name:ident, $policy:expr) => {
        proptest! {
            #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]
            #[test]
            fn $name(ops in prop::collection::vec(op(), 1..40)) {
                run($policy, &ops)?;
            }
        }
    };
}

policy_suite!(invariants_trivial_mca, Policy::TrivialMca);
policy_suite!(invariants_coherent, Policy::Coherent);
policy_suite!(invariants_poloc, Policy::PoLoc);
policy_suite!(invariants_fifo, Policy::Fifo);
