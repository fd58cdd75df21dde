//! Grassmannian permutation modules of `GL_n(O_l)` and the tensor-layer check.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{ClassData, GroupData, Morphing, Stratification};
use crate::algebra::RModule;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::functors::{find_subquotient, iso_test, submodules_until, Category};
use crate::groups::{enumerate_aut, induce, ClassFn, Classes};
use crate::linalg::{Elem, SpanBasis};

/// Partition as weakly decreasing parts.
pub type Shape = Vec<u32>;

/// Type of a subgroup of `O_l^n`: exponents of its cyclic factors, decreasing.
pub fn shape_of(s: &SpanBasis) -> Shape {
    let mut e = s.structure().0.exps;
    e.retain(|&x| x > 0);
    e.sort_unstable_by(|a, b| b.cmp(a));
    e
}

/// `ν ⊆ λ` as Young diagrams.
pub fn contained(nu: &[u32], lambda: &[u32]) -> bool {
    nu.len() <= lambda.len() && nu.iter().zip(lambda).all(|(a, b)| a <= b)
}

/// Partitions inside the `rows × cols` box, ordered by size then lexicographically.
pub fn box_partitions(rows: usize, cols: u32) -> Vec<Shape> {
    fn rec(rows: usize, max: u32, cur: &mut Shape, out: &mut Vec<Shape>) {
        out.push(cur.clone());
        if cur.len() == rows {
            return;
        }
        for k in 1..=max {
            cur.push(k);
            rec(rows, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(rows, cols, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.iter().sum::<u32>().cmp(&b.iter().sum()).then(a.cmp(b)));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GrassmannTable {
    pub shapes: Vec<Shape>,
    /// Irreducible index of `U_λ` per shape.
    pub u: Vec<usize>,
    /// `⟨U_λ, F_μ⟩`, rows `λ`, columns `μ`.
    pub multiplicities: Vec<Vec<u64>>,
    /// Non-equivalent embeddings `λ ↪ μ`: `Aut(O_μ)`-orbits of type-`λ` submodules of `O_μ`.
    pub embeddings: Vec<Vec<u64>>,
    /// Constituents of `F_{l^m}` with multiplicities.
    pub top_constituents: Vec<(usize, u64)>,
}

impl GrassmannTable {
    pub fn multiplicity_free_top(&self) -> bool {
        self.top_constituents.iter().all(|&(_, m)| m == 1)
    }

    pub fn matches(&self) -> bool {
        self.multiplicities == self.embeddings
    }
}

/// `GL_n(O_l)` with `O_l = Z/p^l`, shapes inside `l^m`.
pub fn grassmann_check(p: u64, l: u32, n: usize, m: usize) -> Result<GrassmannTable> {
    if 2 * m > n {
        return Err(Error::Precondition("Grassmannian check needs m ≤ n/2".into()));
    }
    let mut mults = vec![0usize; l as usize];
    mults[l as usize - 1] = n;
    let inst = fixtures::chain_instance(p, l, &mults)?;
    let gd = GroupData::new(&inst.block()?)?;
    let module = &gd.block.module;
    let shapes = box_partitions(m, l);
    let mut by_shape: HashMap<Shape, Vec<SpanBasis>> = HashMap::new();
    submodules_until(module, |s| {
        let sh = shape_of(s);
        if shapes.contains(&sh) {
            by_shape.entry(sh).or_default().push(s.clone());
        }
        true
    })?;
    let perm: Vec<Vec<u128>> =
        shapes.iter().map(|sh| grassmann_character(&gd, by_shape.get(sh).map_or(&[][..], |v| v))).collect();
    let table = &gd.table;
    let decomp: Vec<Vec<u64>> = perm.iter().map(|pi| table.decompose_checked(pi)).collect::<Result<_>>()?;
    let mut u = Vec::with_capacity(shapes.len());
    for (a, lambda) in shapes.iter().enumerate() {
        let new: Vec<usize> = (0..table.len())
            .filter(|&i| decomp[a][i] > 0)
            .filter(|&i| !shapes.iter().enumerate().any(|(b, nu)| b != a && contained(nu, lambda) && decomp[b][i] > 0))
            .collect();
        if new.len() != 1 {
            return Err(Error::TheoremViolation(format!("F_{lambda:?} has {} new constituents", new.len())));
        }
        u.push(new[0]);
    }
    let multiplicities = u.iter().map(|&ua| (0..shapes.len()).map(|b| decomp[b][ua]).collect()).collect();
    let embeddings = shapes
        .iter()
        .map(|lambda| shapes.iter().map(|mu| embedding_count(p, l, lambda, mu)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let top = shapes.len() - 1;
    let top_constituents = (0..table.len()).filter(|&i| decomp[top][i] > 0).map(|i| (i, decomp[top][i])).collect();
    Ok(GrassmannTable { shapes, u, multiplicities, embeddings, top_constituents })
}

/// Permutation character of `Aut(M)` on a set of subgroups closed under it.
fn grassmann_character(gd: &GroupData, subs: &[SpanBasis]) -> Vec<u128> {
    let add = &gd.block.module.add;
    gd.classes
        .reps
        .iter()
        .map(|&g| {
            let f = gd.group.mat(g);
            subs.iter()
                .filter(|s| {
                    let img: Vec<Elem> = s.rows.iter().map(|r| f.apply(r)).collect();
                    SpanBasis::from_gens_unchecked(add, &img) == **s
                })
                .count() as u128
        })
        .collect()
}

/// `Aut(O_μ)`-orbits on submodules of `O_μ` of type `λ`.
pub fn embedding_count(p: u64, l: u32, lambda: &[u32], mu: &[u32]) -> Result<u64> {
    if mu.is_empty() {
        return Ok(u64::from(lambda.is_empty()));
    }
    let mut mults = vec![0usize; l as usize];
    for &k in mu {
        mults[k as usize - 1] += 1;
    }
    let inst = fixtures::chain_instance(p, l, &mults)?;
    let module: RModule = inst.block()?.module;
    let aut = enumerate_aut(&module)?;
    let mut subs = Vec::new();
    submodules_until(&module, |s| {
        if shape_of(s) == lambda {
            subs.push(s.clone());
        }
        true
    })?;
    let index: HashMap<&SpanBasis, usize> = subs.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let maps: Vec<_> = aut.gens.iter().map(|&g| aut.mat(g)).collect();
    let mut label = vec![usize::MAX; subs.len()];
    let mut count = 0u64;
    for start in 0..subs.len() {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for f in &maps {
                let img: Vec<Elem> = subs[x].rows.iter().map(|r| f.apply(r)).collect();
                let y = index[&SpanBasis::from_gens_unchecked(&module.add, &img)];
                if label[y] == usize::MAX {
                    label[y] = start;
                    stack.push(y);
                }
            }
        }
        count += 1;
    }
    Ok(count)
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorLayer {
    pub v1: usize,
    pub v2: usize,
    /// Every constituent of `V_1 ⊗ V_2` has associated functor `≼ F_1 ⊕ F_2`.
    pub bounded: bool,
    /// Class of `F_1 ⊕ F_2` among the subquotients of `Hom(M, −)`, if it is one.
    pub sum_class: Option<usize>,
    /// Multiplicities of the `F_1 ⊕ F_2`-typical constituents of `V_1 ⊗ V_2`.
    pub layer: Vec<(usize, u64)>,
    /// The same, predicted from `Ind_{Aut(F_1) × Aut(F_2)}^{Aut(F_1 ⊕ F_2)} (Ṽ_1 ⊠ Ṽ_2)` by sending
    /// each constituent `U` to the irreducible whose morphing is `U`.
    pub predicted: Vec<(usize, u64)>,
}

impl TensorLayer {
    pub fn holds(&self) -> bool {
        self.bounded && self.layer == self.predicted
    }
}

/// Both tensor-layer statements for a pair of irreducibles of `Aut_R(M)`.
pub fn tensor_layer_projection(
    cat: &Arc<Category>,
    gd: &GroupData,
    st: &Stratification,
    data: &[Option<ClassData>],
    morphs: &[Morphing],
    v1: usize,
    v2: usize,
) -> Result<TensorLayer> {
    let table = &gd.table;
    let (c1, c2) = (st.typical[v1], st.typical[v2]);
    let sum = st.reps[c1].direct_sum(&st.reps[c2]);
    let prod = table.product(&table.values[v1], &table.values[v2]);
    let constituents: Vec<(usize, u64)> = (0..table.len())
        .map(|j| (j, table.lift(table.inner(&prod, &table.values[j])) as u64))
        .filter(|&(_, m)| m > 0)
        .collect();
    let mut bounded = true;
    for &(j, _) in &constituents {
        bounded &= find_subquotient(cat, &st.reps[st.typical[j]], &sum)?.is_some();
    }
    let sum_class = st.poset.class_of(cat, &sum)?;
    let (layer, predicted) = match sum_class {
        None => (Vec::new(), Vec::new()),
        Some(c) => {
            let layer: Vec<(usize, u64)> = constituents.iter().copied().filter(|&(j, _)| st.typical[j] == c).collect();
            let predicted = match data[c].as_ref() {
                None => Vec::new(),
                Some(dc) => predict_layer(cat, st, data, morphs, dc, c, v1, v2)?,
            };
            (layer, predicted)
        }
    };
    Ok(TensorLayer { v1, v2, bounded, sum_class, layer, predicted })
}

#[allow(clippy::too_many_arguments)]
fn predict_layer(
    cat: &Arc<Category>,
    st: &Stratification,
    data: &[Option<ClassData>],
    morphs: &[Morphing],
    dc: &ClassData,
    c: usize,
    v1: usize,
    v2: usize,
) -> Result<Vec<(usize, u64)>> {
    let (c1, c2) = (st.typical[v1], st.typical[v2]);
    let (q1, q2) = (&st.reps[c1], &st.reps[c2]);
    let (d1, d2) = (data[c1].as_ref().expect("typical class"), data[c2].as_ref().expect("typical class"));
    let sum = q1.direct_sum(q2);
    let iota = iso_test(cat, &sum, &st.reps[c])?.ok_or_else(|| Error::TheoremViolation("class of F_1 ⊕ F_2".into()))?;
    let iota_inv = crate::functors::inverse_map(&iota)?;
    let r1 = q1.add.rank();
    let n = sum.add.rank();
    let aut = &dc.aut;
    let on_sum = |x: usize| iota_inv.compose(&aut.group.mat(x)).compose(&iota);
    let (h, emb) = aut.group.subgroup(|x| {
        let y = on_sum(x);
        (0..n).all(|i| (0..n).all(|j| (i < r1) == (j < r1) || y.m[i][j] == 0))
    })?;
    let cl_h = Classes::new(&h);
    let l = aut.table.ell;
    let psi: ClassFn = cl_h
        .reps
        .iter()
        .map(|&x| {
            let y = on_sum(emb[x]);
            let a: Vec<Vec<u64>> = (0..r1).map(|i| y.m[i][..r1].to_vec()).collect();
            let b: Vec<Vec<u64>> = (r1..n).map(|i| y.m[i][r1..].to_vec()).collect();
            let fa = crate::linalg::GrpMap::new(q1.add.clone(), q1.add.clone(), a).expect("block of an automorphism");
            let fb = crate::linalg::GrpMap::new(q2.add.clone(), q2.add.clone(), b).expect("block of an automorphism");
            let ia = d1.aut.group.index_of_map(&fa).expect("diagonal block is an automorphism");
            let ib = d2.aut.group.index_of_map(&fb).expect("diagonal block is an automorphism");
            morphs[v1].vtilde[d1.aut.classes.of(ia)] * morphs[v2].vtilde[d2.aut.classes.of(ib)] % l
        })
        .collect();
    let ind = induce(&aut.table, &h, &cl_h, &emb, &psi);
    let mut out: Vec<(usize, u64)> = Vec::new();
    for (u, chi_u) in aut.table.values.iter().enumerate() {
        let mu = aut.table.lift(aut.table.inner(&ind, chi_u)) as u64;
        if mu == 0 {
            continue;
        }
        if let Some(v) = morphs.iter().find(|m| m.functor == c && m.vtilde_index == u) {
            out.push((v.irreducible, mu));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strat::sweep;

    #[test]
    fn shapes_in_box() {
        assert_eq!(box_partitions(1, 2), vec![vec![], vec![1], vec![2]]);
        assert_eq!(box_partitions(2, 1), vec![vec![], vec![1], vec![1, 1]]);
    }

    #[test]
    fn grassmann_gl2_o2() {
        let t = grassmann_check(2, 2, 2, 1).unwrap();
        assert_eq!(t.top_constituents.len(), 3);
        assert!(t.multiplicity_free_top());
        assert_eq!(t.embeddings, vec![vec![1, 1, 1], vec![0, 1, 1], vec![0, 0, 1]]);
        assert!(t.matches());
    }

    fn layers(name: &str) -> usize {
        let inst = fixtures::instance_by_name(name).unwrap();
        let cat = Category::new(inst.ctx.clone()).unwrap();
        let gd = GroupData::new(&inst.block().unwrap()).unwrap();
        let st = Stratification::new(&cat, &gd).unwrap();
        let data = st.all_class_data(&gd).unwrap();
        let morphs = sweep(&st, &gd).unwrap().morphings;
        let mut nonempty = 0;
        for v1 in 0..gd.table.len() {
            for v2 in v1..gd.table.len() {
                let t = tensor_layer_projection(&cat, &gd, &st, &data, &morphs, v1, v2).unwrap();
                assert!(t.holds(), "{name}: {t:?}");
                nonempty += usize::from(!t.layer.is_empty());
            }
        }
        nonempty
    }

    #[test]
    fn tensor_layers() {
        for name in ["p11-f3", "gl2-f3", "chain-p2-l2-11", "cycle2-f2"] {
            assert!(layers(name) > 0, "{name}");
        }
    }
}
