//! Built-in rings, modules and contexts used by the verifier and the CLI.

use std::sync::Arc;

use crate::algebra::{chain_module, chain_ring, BlockModule, Context, FiniteAlgebra, RModule};
use crate::error::{invalid, Result};
use crate::linalg::{PGroup, SpanBasis};

/// `F_p` as a ring (`q = p` prime).
pub fn prime_field(p: u64) -> Result<Arc<FiniteAlgebra>> {
    chain_ring(p, 1)
}

fn unit_vec(n: usize, k: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[k] = 1;
    v
}

/// Path algebra of `1 → 2` over `F_q`: basis `v1, v2, e` with `e = v2 e v1`.
pub fn quiver_ring(q: u64) -> Result<Arc<FiniteAlgebra>> {
    let add = PGroup::new(q, vec![1; 3])?;
    let (v1, v2, e) = (0, 1, 2);
    let alg = FiniteAlgebra::from_fn(add, vec![1, 1, 0], |a, b| match (a, b) {
        (x, y) if x == v1 && y == v1 => unit_vec(3, v1),
        (x, y) if x == v2 && y == v2 => unit_vec(3, v2),
        (x, y) if x == v2 && y == e => unit_vec(3, e),
        (x, y) if x == e && y == v1 => unit_vec(3, e),
        _ => vec![0; 3],
    })?;
    Ok(Arc::new(alg))
}

/// `M_1 = R v_1` (span of `v_1, e`) and `M_2 = R v_2`.
pub fn quiver_modules(r: &Arc<FiniteAlgebra>) -> Result<(RModule, RModule)> {
    let reg = RModule::regular(r);
    let m1 = reg.generated(&[unit_vec(3, 0)]);
    let m2 = reg.generated(&[unit_vec(3, 1)]);
    Ok((reg.submodule(&m1)?.0, reg.submodule(&m2)?.0))
}

/// `F_p[x, y] / (x^2, y^2, xy)` with basis `1, x, y`.
pub fn three_module_ring(p: u64) -> Result<Arc<FiniteAlgebra>> {
    let add = PGroup::new(p, vec![1; 3])?;
    let alg = FiniteAlgebra::from_fn(add, vec![1, 0, 0], |a, b| match (a, b) {
        (0, k) | (k, 0) => unit_vec(3, k),
        _ => vec![0; 3],
    })?;
    Ok(Arc::new(alg))
}

/// `M_1 = R`, `M_2 = R/(x)`, `M_3 = R/(x, y)`.
pub fn three_modules(r: &Arc<FiniteAlgebra>) -> Result<[RModule; 3]> {
    let reg = RModule::regular(r);
    let x = reg.generated(&[unit_vec(3, 1)]);
    let xy = reg.generated(&[unit_vec(3, 1), unit_vec(3, 2)]);
    Ok([reg.clone(), reg.quotient(&x)?.0, reg.quotient(&xy)?.0])
}

/// Two-vertex cycle `1 ⇄ 2` with both composites zero: basis `v1, v2, a, b`,
/// `a = v2 a v1`, `b = v1 b v2`, `ab = ba = 0`.
pub fn two_cycle_ring(q: u64) -> Result<Arc<FiniteAlgebra>> {
    let add = PGroup::new(q, vec![1; 4])?;
    let (v1, v2, a, b) = (0, 1, 2, 3);
    let alg = FiniteAlgebra::from_fn(add, vec![1, 1, 0, 0], |x, y| {
        let hit = |k| unit_vec(4, k);
        match (x, y) {
            (s, t) if s == v1 && t == v1 => hit(v1),
            (s, t) if s == v2 && t == v2 => hit(v2),
            (s, t) if s == v2 && t == a => hit(a),
            (s, t) if s == a && t == v1 => hit(a),
            (s, t) if s == v1 && t == b => hit(b),
            (s, t) if s == b && t == v2 => hit(b),
            _ => vec![0; 4],
        }
    })?;
    Ok(Arc::new(alg))
}

/// `M_i = R v_i`.
pub fn two_cycle_modules(r: &Arc<FiniteAlgebra>) -> Result<(RModule, RModule)> {
    let reg = RModule::regular(r);
    let m1 = reg.generated(&[unit_vec(4, 0)]);
    let m2 = reg.generated(&[unit_vec(4, 1)]);
    Ok((reg.submodule(&m1)?.0, reg.submodule(&m2)?.0))
}

/// A module instance: context indecomposables plus multiplicities.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub description: String,
    pub ctx: Context,
    pub mults: Vec<usize>,
}

impl Instance {
    pub fn block(&self) -> Result<BlockModule> {
        self.ctx.block(&self.mults)
    }
}

fn instance(name: &str, description: &str, modules: Vec<RModule>, mults: Vec<usize>) -> Result<Instance> {
    // Summands with multiplicity 0 are dropped so that every context vertex occurs in M.
    let (modules, mults): (Vec<_>, Vec<_>) = modules.into_iter().zip(mults).filter(|(_, a)| *a > 0).unzip();
    Ok(Instance { name: name.into(), description: description.into(), ctx: Context::new(modules)?, mults })
}

/// `GL_n(F_q)` as `Aut(F_q^n)`.
pub fn gl_field(n: usize, q: u64) -> Result<Instance> {
    let r = prime_field(q)?;
    let k = chain_module(&r, 1)?;
    instance(&format!("gl{n}-f{q}"), &format!("GL_{n}(F_{q}) acting on F_{q}^{n}"), vec![k], vec![n])
}

/// `Aut(O_l^a)` and more generally `Aut(⊕ O_i^{a_i})` over `O_l = Z/p^l`.
pub fn chain_instance(p: u64, l: u32, mults: &[usize]) -> Result<Instance> {
    if mults.len() != l as usize {
        return Err(invalid("one multiplicity per O_i, i = 1..l"));
    }
    let r = chain_ring(p, l)?;
    let mods = (1..=l).map(|i| chain_module(&r, i)).collect::<Result<Vec<_>>>()?;
    let profile: Vec<String> = mults.iter().map(|a| a.to_string()).collect();
    instance(
        &format!("chain-p{p}-l{l}-{}", profile.join("")),
        &format!("Aut of the Z/{p}^{l}-module with O_i multiplicities ({})", profile.join(", ")),
        mods,
        mults.to_vec(),
    )
}

pub fn quiver_instance(q: u64, a: usize, b: usize) -> Result<Instance> {
    let r = quiver_ring(q)?;
    let (m1, m2) = quiver_modules(&r)?;
    instance(
        &format!("p{a}{b}-f{q}"),
        &format!("parabolic P_{{{a},{b}}}(F_{q}) as Aut(M_1^{a} + M_2^{b}) over the A_2 quiver algebra"),
        vec![m1, m2],
        vec![a, b],
    )
}

pub fn three_module_instance(p: u64, mults: [usize; 3]) -> Result<Instance> {
    let r = three_module_ring(p)?;
    let mods = three_modules(&r)?.to_vec();
    instance(
        &format!("three-f{p}-{}{}{}", mults[0], mults[1], mults[2]),
        &format!("modules R, R/(x), R/(x,y) over F_{p}[x,y]/(x^2,y^2,xy)"),
        mods,
        mults.to_vec(),
    )
}

pub fn two_cycle_instance(q: u64, a: usize) -> Result<Instance> {
    let r = two_cycle_ring(q)?;
    let (m1, m2) = two_cycle_modules(&r)?;
    let description = format!("2-cycle quiver over F_{q} with zero composites, M_1^{a} + M_2^{a}");
    instance(&format!("cycle2-f{q}"), &description, vec![m1, m2], vec![a, a])
}

/// Context modules of the three-module ring restricted to `which` (0-based).
pub fn three_module_context(p: u64, which: &[usize]) -> Result<Context> {
    let r = three_module_ring(p)?;
    let mods = three_modules(&r)?;
    Context::new(which.iter().map(|&i| mods[i].clone()).collect())
}

/// Subgroup of `F_p^n` spanned by unit vectors (helper for tests).
pub fn coordinate_span(g: &PGroup, coords: &[usize]) -> SpanBasis {
    let gens: Vec<Vec<u64>> = coords.iter().map(|&k| g.unit(k)).collect();
    SpanBasis::from_gens_unchecked(g, &gens)
}

/// Names of all built-in instances.
pub fn instance_names() -> Vec<&'static str> {
    vec![
        "chain-p2-l1-1",
        "chain-p2-l2-01",
        "chain-p2-l2-02",
        "chain-p2-l2-11",
        "chain-p3-l2-01",
        "chain-p2-l3-001",
        "chain-p3-l3-001",
        "p11-f2",
        "p11-f3",
        "three-f2-111",
        "cycle2-f2",
        "cycle2-f3",
        "gl1-f2",
        "gl2-f2",
        "gl3-f2",
        "gl1-f3",
        "gl2-f3",
        "gl3-f3",
        "gl2-o2",
        "grassmann-2-2",
    ]
}

pub fn instance_by_name(name: &str) -> Result<Instance> {
    let parse_chain = |rest: &str| -> Option<(u64, u32, Vec<usize>)> {
        let mut it = rest.split('-');
        let p = it.next()?.strip_prefix('p')?.parse().ok()?;
        let l = it.next()?.strip_prefix('l')?.parse().ok()?;
        let m: Vec<usize> = it.next()?.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>()?;
        Some((p, l, m))
    };
    match name {
        "gl2-o2" => {
            let mut i = chain_instance(2, 2, &[0, 2])?;
            i.name = name.into();
            i.description = "GL_2(Z/4) acting on (Z/4)^2".into();
            Ok(i)
        }
        "grassmann-2-2" => {
            let mut i = chain_instance(2, 2, &[0, 2])?;
            i.name = name.into();
            i.description = "Grassmann instance n = 2, l = 2, p = 2".into();
            Ok(i)
        }
        "three-f2-111" => three_module_instance(2, [1, 1, 1]),
        _ => {
            if let Some(rest) = name.strip_prefix("chain-") {
                if let Some((p, l, m)) = parse_chain(rest) {
                    return chain_instance(p, l, &m);
                }
            }
            if let Some(rest) = name.strip_prefix("gl") {
                if let Some((n, q)) = rest.split_once("-f") {
                    if let (Ok(n), Ok(q)) = (n.parse(), q.parse()) {
                        return gl_field(n, q);
                    }
                }
            }
            if let Some(rest) = name.strip_prefix("cycle2-f") {
                if let Ok(q) = rest.parse() {
                    return two_cycle_instance(q, 1);
                }
            }
            if let Some(rest) = name.strip_prefix('p') {
                let b = rest.as_bytes();
                if b.len() >= 4 && &rest[2..4] == "-f" {
                    let a = (b[0] - b'0') as usize;
                    let bb = (b[1] - b'0') as usize;
                    if let Ok(q) = rest[4..].parse() {
                        return quiver_instance(q, a, bb);
                    }
                }
            }
            Err(invalid(format!("unknown instance {name:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{hom_r, jacobson_radical, lm_morphisms, rm_morphisms};

    #[test]
    fn quiver_homs() {
        let r = quiver_ring(3).unwrap();
        let (m1, m2) = quiver_modules(&r).unwrap();
        assert_eq!(m1.order(), 9);
        assert_eq!(m2.order(), 3);
        assert_eq!(hom_r(&m1, &m2).unwrap().order(), 1);
        assert_eq!(hom_r(&m2, &m1).unwrap().order(), 3);
        let ctx = Context::new(vec![m1.clone(), m2.clone()]).unwrap();
        assert_eq!(ctx.local[0].residue_order(), 3);
        assert_eq!(ctx.local[1].end.alg.order(), 3);
        // f: M_2 → M_1 is both left and right maximal.
        assert_eq!(lm_morphisms(&ctx, 1, 0).dim, 1);
        assert_eq!(rm_morphisms(&ctx, 1, 0).dim, 1);
        // End(M_1 ⊕ M_2) has a one-dimensional radical.
        let e = crate::algebra::end_algebra(&m1.direct_sum(&m2)).unwrap();
        assert_eq!(e.alg.order(), 27);
        assert_eq!(jacobson_radical(&e.alg).order(), 3);
    }

    #[test]
    fn three_module_homs() {
        let r = three_module_ring(2).unwrap();
        let m = three_modules(&r).unwrap();
        let dims = [[3, 2, 1], [2, 2, 1], [2, 1, 1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(hom_r(&m[i], &m[j]).unwrap().log_order(), dims[i][j], "Hom(M_{}, M_{})", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn named_instances_build() {
        for name in ["p11-f3", "gl2-f2", "chain-p2-l2-11", "cycle2-f2", "three-f2-111"] {
            let i = instance_by_name(name).unwrap();
            assert!(i.block().unwrap().module.order() > 1, "{name}");
        }
        assert!(instance_by_name("nonsense").is_err());
    }
}
