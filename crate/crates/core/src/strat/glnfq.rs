//! `GL_n(F_q)` cross-checks: Harish-Chandra products, the minimality index `m`, unipotent
//! labels and the deletion of the first row of `λ(1)` under morphing.

use serde::Serialize;

use super::{ClassData, GroupData, Morphing, Stratification};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::functors::{hom_functor, iso_test, yoneda_aut, Category};
use crate::groups::{enumerate_aut, induce, ClassFn, Classes};
use crate::linalg::GrpMap;
use std::sync::Arc;

/// `GL_0, …, GL_N` over `F_q` with character tables in one field `F_ℓ`.
#[derive(Clone, Debug)]
pub struct GlFamily {
    pub q: u64,
    /// `groups[n - 1]` is `GL_n`.
    pub groups: Vec<GroupData>,
}

impl GlFamily {
    pub fn new(q: u64, max_n: usize) -> Result<Self> {
        if max_n == 0 {
            return Err(Error::Precondition("the family needs n ≥ 1".into()));
        }
        let top = GroupData::new(&fixtures::gl_field(max_n, q)?.block()?)?;
        let ell = top.ell();
        let mut groups = (1..max_n)
            .map(|n| GroupData::with_ell(&fixtures::gl_field(n, q)?.block()?, ell))
            .collect::<Result<Vec<_>>>()?;
        groups.push(top);
        Ok(GlFamily { q, groups })
    }

    pub fn max_n(&self) -> usize {
        self.groups.len()
    }

    pub fn ell(&self) -> u64 {
        self.groups[0].ell()
    }

    pub fn gl(&self, n: usize) -> &GroupData {
        &self.groups[n - 1]
    }

    /// Irreducible characters of `GL_n`; `GL_0` has only the trivial one.
    pub fn irreducibles(&self, n: usize) -> Vec<ClassFn> {
        if n == 0 {
            vec![vec![1]]
        } else {
            self.gl(n).table.values.clone()
        }
    }

    pub fn trivial(&self, n: usize) -> ClassFn {
        if n == 0 {
            vec![1]
        } else {
            vec![1; self.gl(n).classes.len()]
        }
    }

    pub fn regular(&self, n: usize) -> ClassFn {
        if n == 0 {
            return vec![1];
        }
        let gd = self.gl(n);
        let mut v = vec![0; gd.classes.len()];
        v[0] = gd.group.order() as u64 % gd.ell();
        v
    }

    pub fn inner(&self, n: usize, a: &[u64], b: &[u64]) -> u64 {
        if n == 0 {
            a[0] * b[0] % self.ell()
        } else {
            self.gl(n).table.inner(a, b)
        }
    }

    /// `χ_1 × χ_2 = Ind_P^{GL_{n_1+n_2}} Inf(χ_1 ⊠ χ_2)`, `P` the block upper triangular parabolic.
    pub fn hc_product(&self, n1: usize, chi1: &[u64], n2: usize, chi2: &[u64]) -> Result<ClassFn> {
        if n1 == 0 {
            return Ok(chi2.to_vec());
        }
        if n2 == 0 {
            return Ok(chi1.to_vec());
        }
        let n = n1 + n2;
        if n > self.max_n() {
            return Err(Error::Precondition(format!("GL_{n} is outside the family")));
        }
        let g = self.gl(n);
        let (g1, g2) = (self.gl(n1), self.gl(n2));
        let entry = |x: usize, i: usize, j: usize| g.group.elem(x)[i * n + j];
        let (p, emb) = g.group.subgroup(|x| (n1..n).all(|i| (0..n1).all(|j| entry(x, i, j) == 0)))?;
        let cl_p = Classes::new(&p);
        let l = self.ell();
        let psi: ClassFn = cl_p
            .reps
            .iter()
            .map(|&x| {
                let m = p.elem(x);
                let a: Vec<u64> = (0..n1).flat_map(|i| (0..n1).map(move |j| m[i * n + j])).collect();
                let b: Vec<u64> = (n1..n).flat_map(|i| (n1..n).map(move |j| m[i * n + j])).collect();
                let ia = g1.group.index_of(&a).expect("Levi block is invertible");
                let ib = g2.group.index_of(&b).expect("Levi block is invertible");
                chi1[g1.classes.of(ia)] * chi2[g2.classes.of(ib)] % l
            })
            .collect();
        Ok(induce(&g.table, &p, &cl_p, &emb, &psi))
    }

    /// `HC` product of a list of factors, left to right.
    pub fn hc_chain(&self, factors: &[(usize, ClassFn)]) -> Result<(usize, ClassFn)> {
        let mut acc = (0usize, vec![1u64]);
        for (n, chi) in factors {
            acc = (acc.0 + n, self.hc_product(acc.0, &acc.1, *n, chi)?);
        }
        Ok(acc)
    }

    /// Least `j` with `χ` a constituent of `reg_{GL_j} × 1_{GL_{n−j}}`.
    pub fn minimality(&self, n: usize, chi: &[u64]) -> Result<usize> {
        for j in 0..=n {
            let prod = self.hc_product(j, &self.regular(j), n - j, &self.trivial(n - j))?;
            if self.inner(n, chi, &prod) != 0 {
                return Ok(j);
            }
        }
        Err(Error::TheoremViolation("character outside every reg × 1 product".into()))
    }

    /// `h_λ = 1_{λ_1} × 1_{λ_2} × …`.
    pub fn h_lambda(&self, lambda: &[usize]) -> Result<ClassFn> {
        let factors: Vec<(usize, ClassFn)> = lambda.iter().map(|&k| (k, self.trivial(k))).collect();
        Ok(self.hc_chain(&factors)?.1)
    }

    /// Unipotent characters `S(1, λ)` for `λ ⊢ r`: processing partitions in decreasing lexicographic
    /// order, `S(1, λ)` is the single constituent of `h_λ` not met before, and it has multiplicity 1.
    pub fn unipotent(&self, r: usize) -> Result<Vec<(Vec<usize>, ClassFn)>> {
        let irr = self.irreducibles(r);
        let mut seen = vec![false; irr.len()];
        let mut out = Vec::new();
        for lambda in partitions(r) {
            let h = self.h_lambda(&lambda)?;
            let new: Vec<usize> = (0..irr.len()).filter(|&i| !seen[i] && self.inner(r, &irr[i], &h) != 0).collect();
            if new.len() != 1 || self.inner(r, &irr[new[0]], &h) != 1 {
                return Err(Error::TheoremViolation(format!("h_{lambda:?} has no unique new constituent")));
            }
            seen[new[0]] = true;
            out.push((lambda, irr[new[0]].clone()));
        }
        Ok(out)
    }

    /// `W` has no trivial `GL_1` in its cuspidal support: `⟨W, 1_{GL_1} × reg_{r−1}⟩ = 0`.
    pub fn one_free(&self, r: usize, w: &[u64]) -> Result<bool> {
        if r == 0 {
            return Ok(true);
        }
        let prod = self.hc_product(1, &self.trivial(1), r - 1, &self.regular(r - 1))?;
        Ok(self.inner(r, w, &prod) == 0)
    }

    /// `χ = S(1, λ) × W` with `W` 1-free on `GL_{n−|λ|}`.
    pub fn factor(&self, n: usize, chi: &[u64]) -> Result<(Vec<usize>, usize, ClassFn)> {
        for r in 0..=n {
            let ws: Vec<ClassFn> = self
                .irreducibles(n - r)
                .into_iter()
                .map(|w| self.one_free(n - r, &w).map(|b| (b, w)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter_map(|(b, w)| b.then_some(w))
                .collect();
            for (lambda, s) in self.unipotent(r)? {
                for w in &ws {
                    if self.hc_product(r, &s, n - r, w)? == chi {
                        return Ok((lambda, n - r, w.clone()));
                    }
                }
            }
        }
        Err(Error::TheoremViolation("no S(1, λ) × W factorisation".into()))
    }
}

/// Partitions of `r`, lexicographically decreasing.
pub fn partitions(r: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if r == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=r.min(max)).rev() {
            cur.push(k);
            rec(r - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, r, &mut Vec::new(), &mut out);
    out
}

/// Pulls `Ṽ` on `Aut(F)`, `F ≅ Hom(k^m, −)`, back to `GL_m` through Yoneda and an explicit
/// isomorphism of `F(Σ)` with the hom module.
pub fn vtilde_on_gl(
    cat: &Arc<Category>,
    st: &Stratification,
    data: &ClassData,
    morph: &Morphing,
    fam: &GlFamily,
    m: usize,
) -> Result<ClassFn> {
    if m == 0 {
        return Ok(vec![morph.vtilde[0]]);
    }
    let hm = hom_functor(cat, &[m])?;
    let q = &st.reps[morph.functor];
    let iota = iso_test(cat, &hm.module, q)?
        .ok_or_else(|| Error::TheoremViolation(format!("associated functor is not Hom(k^{m}, −)")))?;
    let iota_inv = crate::functors::inverse_map(&iota)?;
    let aut_h = enumerate_aut(&hm.module)?;
    let glm = fam.gl(m);
    let y = yoneda_aut(&hm, &glm.group, &aut_h)?;
    glm.classes
        .reps
        .iter()
        .map(|&h| {
            let beta: GrpMap = iota.compose(&aut_h.mat(y[h])).compose(&iota_inv);
            let a = data
                .aut
                .group
                .index_of_map(&beta)
                .ok_or_else(|| Error::TheoremViolation("transported automorphism missing".into()))?;
            Ok(morph.vtilde[data.aut.classes.of(a)])
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GlRow {
    pub irreducible: usize,
    pub degree: u64,
    pub m: usize,
    /// `log_q |F(k)|` of the associated functor.
    pub functor_rank: usize,
    pub lambda: Vec<usize>,
    pub w_rank: usize,
    /// `λ_1 = n − m`.
    pub first_row: bool,
    /// `Ṽ = S(1, λ minus its first row) × W` on `GL_m`.
    pub deletion: bool,
}

/// Full check on `GL_n(F_q)`: one row per irreducible.
pub fn gl_consistency(fam: &GlFamily, n: usize) -> Result<Vec<GlRow>> {
    let inst = fixtures::gl_field(n, fam.q)?;
    let cat = Category::new(inst.ctx.clone())?;
    let gd = fam.gl(n);
    let st = Stratification::new(&cat, gd)?;
    let data = st.all_class_data(gd)?;
    let mut rows = Vec::new();
    for (i, chi) in gd.table.values.iter().enumerate() {
        let m = fam.minimality(n, chi)?;
        let c = st.typical[i];
        let functor_rank = st.reps[c].add.rank();
        let d = data[c].as_ref().expect("class data for associated functors");
        let morph = st.morph(gd, d, i)?;
        let (lambda, w_rank, w) = fam.factor(n, chi)?;
        let first_row = lambda.first().copied().unwrap_or(0) == n - m;
        let rest: Vec<usize> = lambda.iter().skip(1).copied().collect();
        let r = rest.iter().sum::<usize>();
        let s = fam.unipotent(r)?.into_iter().find(|(l, _)| *l == rest).map(|(_, s)| s).expect("partition listed");
        let expected = fam.hc_product(r, &s, w_rank, &w)?;
        let deletion = first_row && functor_rank == m && vtilde_on_gl(&cat, &st, d, &morph, fam, m)? == expected;
        rows.push(GlRow {
            irreducible: i,
            degree: gd.table.degrees[i],
            m,
            functor_rank,
            lambda,
            w_rank,
            first_row,
            deletion,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_in_lex_order() {
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(partitions(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn gl2f2_products() {
        let fam = GlFamily::new(2, 2).unwrap();
        let triv = fam.trivial(1);
        let ind = fam.hc_product(1, &triv, 1, &triv).unwrap();
        let gd = fam.gl(2);
        // triv × triv = triv + Steinberg.
        assert_eq!(
            gd.table.decompose(&ind.iter().map(|&x| gd.table.lift(x) as u128).collect::<Vec<_>>()),
            vec![1, 0, 1]
        );
        let st = &gd.table.values[2];
        assert_eq!(fam.minimality(2, st).unwrap(), 1);
    }

    #[test]
    fn gl2_consistency() {
        for q in [2, 3] {
            let fam = GlFamily::new(q, 2).unwrap();
            for row in gl_consistency(&fam, 2).unwrap() {
                assert_eq!(row.m, row.functor_rank, "q={q} {row:?}");
                assert!(row.first_row && row.deletion, "q={q} {row:?}");
            }
        }
    }
}
