use std::time::Instant;

use autrep::fixtures;
use autrep::functors::Category;
use autrep::strat::intertwiners::intertwiner_span;
use autrep::strat::{GroupData, Stratification};

fn check(name: &str) {
    let inst = fixtures::instance_by_name(name).unwrap();
    let cat = Category::new(inst.ctx.clone()).unwrap();
    let gd = GroupData::new(&inst.block().unwrap()).unwrap();
    let st = Stratification::new(&cat, &gd).unwrap();
    let t = Instant::now();
    for f in 0..st.len() {
        for g in f..st.len() {
            let span = intertwiner_span(
                &cat,
                &gd,
                &st.reps[f],
                &st.reps[g],
                (&st.perm[f], &st.perm[g]),
                (&st.mult[f], &st.mult[g]),
            )
            .unwrap();
            assert_eq!(span.orbits, span.burnside, "{name} ({f},{g})");
            assert_eq!(span.orbits, span.mult_dot as u128, "{name} ({f},{g})");
            assert_eq!(span.span_rank as u128, span.orbits, "{name} ({f},{g})");
        }
    }
    eprintln!("{name}: {} classes, {:?}", st.len(), t.elapsed());
}

#[test]
fn field_square() {
    check("gl2-f3");
}

#[test]
fn quiver_pair() {
    check("p11-f3");
}

#[test]
fn chain_square() {
    check("chain-p2-l2-02");
}

#[test]
fn chain_mixed() {
    check("chain-p2-l2-11");
}
