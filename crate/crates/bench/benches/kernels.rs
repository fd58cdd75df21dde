use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use autrep::algebra::hom_r;
use autrep::fixtures::instance_by_name;
use autrep::functors::Category;
use autrep::groups::{dixon_char_table, enumerate_aut, Classes};
use autrep::linalg::{howell_form, PGroup};
use autrep::strat::{sweep, trivially_morphing, GroupData, Stratification};

/// Fixed pseudo-random rows over `Z/p^l` (an LCG keeps the input identical across runs).
fn rows(p: u64, l: u32, n: usize, count: usize) -> Vec<Vec<u64>> {
    let q = p.pow(l);
    let mut s: u64 = 0x2545_f491_4f6c_dd1d;
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    s = s.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                    (s >> 33) % q
                })
                .collect()
        })
        .collect()
}

fn linalg(c: &mut Criterion) {
    for (p, l, n) in [(2, 3, 8), (3, 2, 8), (5, 2, 12)] {
        let g = PGroup::new(p, vec![l; n]).unwrap();
        let r = rows(p, l, n, 2 * n);
        c.bench_function(&format!("howell Z/{p}^{l} n={n}"), |b| b.iter(|| howell_form(&g, black_box(&r)).unwrap()));
    }
    for name in ["gl2-o2", "chain-p3-l3-001", "three-f2-111"] {
        let m = instance_by_name(name).unwrap().block().unwrap().module;
        c.bench_function(&format!("hom_r {name}"), |b| b.iter(|| hom_r(black_box(&m), &m).unwrap()));
    }
}

fn groups(c: &mut Criterion) {
    for name in ["gl2-f3", "gl3-f2", "gl2-o2"] {
        let m = instance_by_name(name).unwrap().block().unwrap().module;
        c.bench_function(&format!("enumerate_aut {name}"), |b| b.iter(|| enumerate_aut(black_box(&m)).unwrap()));
        let g = enumerate_aut(&m).unwrap();
        let cl = Classes::new(&g);
        c.bench_function(&format!("dixon {name}"), |b| b.iter(|| dixon_char_table(black_box(&g), &cl).unwrap()));
    }
}

fn strat(c: &mut Criterion) {
    let mut group = c.benchmark_group("stratify");
    group.sample_size(10);
    for name in ["gl2-f2", "p11-f3", "chain-p2-l2-11", "cycle2-f3"] {
        let inst = instance_by_name(name).unwrap();
        let cat: Arc<Category> = Category::new(inst.ctx.clone()).unwrap();
        let gd = GroupData::new(&inst.block().unwrap()).unwrap();
        group.bench_function(format!("poset+sweep {name}"), |b| {
            b.iter(|| {
                let st = Stratification::new(&cat, &gd).unwrap();
                sweep(&st, &gd).unwrap()
            })
        });
    }
    let inst = instance_by_name("three-f2-111").unwrap();
    let cat = Category::new(inst.ctx.clone()).unwrap();
    let gd = GroupData::new(&inst.block().unwrap()).unwrap();
    group.bench_function("trivial-morphing three-f2-111", |b| {
        b.iter(|| trivially_morphing(&cat, black_box(&gd)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, linalg, groups, strat);
criterion_main!(benches);
