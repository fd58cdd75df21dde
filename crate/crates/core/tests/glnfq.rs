use std::time::Instant;

use autrep::strat::glnfq::{gl_consistency, GlFamily};

#[test]
fn gl3f2_deletion_rule() {
    let t = Instant::now();
    let fam = GlFamily::new(2, 3).unwrap();
    let rows = gl_consistency(&fam, 3).unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row.m, row.functor_rank, "{row:?}");
        assert!(row.first_row && row.deletion, "{row:?}");
    }
    // λ(1) = (2,1): associated functor Hom(k, −), where the datum is λ = (1) on GL_1.
    let r = rows.iter().find(|r| r.lambda == vec![2, 1]).unwrap();
    assert_eq!((r.m, r.w_rank), (1, 0));
    eprintln!("GL_3(F_2): {:?}", t.elapsed());
}
