//! Full theorem sweeps on randomly drawn chain-ring modules `⊕ O_i^{a_i}` with `|M| ≤ 27`.
//! The bound keeps each sweep well under a second; `O_1 ⊕ O_2 ⊕ O_3` over `Z/8` already takes a minute.

use autrep::fixtures::chain_instance;
use autrep::verify::instance_sweep;
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = (u64, u32, Vec<usize>)> {
    prop_oneof![
        (1u32..=3).prop_flat_map(|l| (Just(2u64), Just(l), prop::collection::vec(0usize..=3, l as usize))),
        (1u32..=3).prop_flat_map(|l| (Just(3u64), Just(l), prop::collection::vec(0usize..=2, l as usize))),
    ]
    .prop_filter("0 < |M| ≤ 27", |(p, _, m)| {
        let log: usize = m.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
        log > 0 && p.pow(log as u32) <= 27
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theorems_hold_on_chain_modules((p, l, mults) in profile()) {
        let inst = chain_instance(p, l, &mults).unwrap();
        let sweep = instance_sweep(&inst).unwrap();
        prop_assert!(sweep.passed(), "{}: {}", inst.name, sweep.summary());
        prop_assert!(sweep.full_route, "{} fell back to the trivial-morphing route", inst.name);
    }
}
