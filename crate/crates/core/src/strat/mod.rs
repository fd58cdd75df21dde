//! Stratification of `Irr(Aut_R(M))` by subquotients of `Hom(M, −)` and functor morphing.
//!
//! For a functor `F` the permutation character of `KF(M)` is `g ↦ |ker(F(g) − 1)|`; the
//! mixed count `|ker(F(g) α − 1)|` for `α ∈ Aut(F)` carries the `Aut(F)`-action on the
//! multiplicity spaces, from which `Ṽ` is read off. Conventions: `Ṽ_V` is the dual of the
//! multiplicity space of `V`, so trivial morphing sends `V` to `V` under `h ↦ (φ ↦ φ h^{-1})`.

pub mod congruence;
pub mod glnfq;
pub mod grassmann;
pub mod intertwiners;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{BlockModule, RModule};
use crate::caps;
use crate::error::{Error, Result};
use crate::functors::{
    aut_functor, hom_functor, minimal_presentation, support, yoneda_aut, Category, Evaluation, FunctorObj,
    SubquotientPoset,
};
use crate::groups::{
    dixon_char_table, dixon_char_table_mod, enumerate_aut, invmod, linear_fixed_points, linear_perm_character,
    orbit_labels, CharTable, ClassFn, Classes, FiniteGroup,
};
use crate::linalg::{Elem, GrpMap, SpanBasis};

/// `Aut_R(M)` with classes and character table.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub block: BlockModule,
    pub group: FiniteGroup,
    pub classes: Classes,
    pub table: CharTable,
}

impl GroupData {
    pub fn new(block: &BlockModule) -> Result<Self> {
        let group = enumerate_aut(&block.module)?;
        let classes = Classes::new(&group);
        let table = dixon_char_table(&group, &classes)?;
        Ok(GroupData { block: block.clone(), group, classes, table })
    }

    pub fn with_ell(block: &BlockModule, ell: u64) -> Result<Self> {
        let group = enumerate_aut(&block.module)?;
        let classes = Classes::new(&group);
        let table = dixon_char_table_mod(&group, &classes, ell)?;
        Ok(GroupData { block: block.clone(), group, classes, table })
    }

    pub fn ell(&self) -> u64 {
        self.table.ell
    }

    /// Number of context modules occurring in `M`.
    pub fn support(&self) -> usize {
        self.block.mults.iter().filter(|&&a| a > 0).count()
    }

    /// Permutation character of `KF(M)`.
    pub fn perm_character(&self, ev: &Evaluation) -> Vec<u128> {
        linear_perm_character(&self.classes, |g| ev.act(&self.group.mat(g)))
    }

    /// `(1/|H|) Σ_k counts[k] χ(g_k)`: dimension of the fixed space of a subgroup `H` given by
    /// the number of its elements in each class.
    pub fn fixed_dim(&self, counts: &[u64], chi: &[u64]) -> i64 {
        let l = self.ell();
        let h: u64 = counts.iter().sum();
        let s = counts.iter().zip(chi).fold(0u64, |acc, (&c, &x)| (acc + c % l * x) % l);
        self.table.lift(s * invmod(h % l, l) % l)
    }
}

/// `Aut(F)` as a group of `R'`-automorphisms of a representative module, with its table
/// computed in the same `F_ℓ` as the table of `Aut_R(M)`.
#[derive(Clone, Debug)]
pub struct AutData {
    pub group: FiniteGroup,
    pub classes: Classes,
    pub table: CharTable,
}

impl AutData {
    pub fn new(q: &RModule, ell: u64) -> Result<Self> {
        let group = enumerate_aut(q)?;
        let classes = Classes::new(&group);
        let table = dixon_char_table_mod(&group, &classes, ell).map_err(|e| {
            Error::Precondition(format!("prime {ell} unsuitable for the automorphism group of a functor: {e}"))
        })?;
        Ok(AutData { group, classes, table })
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }
}

/// `Π[k][a] = |ker(F(g_k) α_a − 1)|` over class representatives of both groups.
pub fn mixed_fixed_points(gd: &GroupData, ev: &Evaluation, aut: &AutData) -> Vec<Vec<u128>> {
    let alphas: Vec<GrpMap> = aut.classes.reps.iter().map(|&a| ev.act_natural(&aut.group.mat(a))).collect();
    gd.classes
        .reps
        .iter()
        .map(|&g| {
            let fg = ev.act(&gd.group.mat(g));
            alphas.iter().map(|a| linear_fixed_points(&fg.compose(a))).collect()
        })
        .collect()
}

/// Character of `Ṽ` on the classes of `Aut(F)`: `(1/|G|) Σ_k |C_k| χ_V(g_k) Π[k][a]`.
pub fn vtilde_character(gd: &GroupData, mixed: &[Vec<u128>], chi: &[u64]) -> ClassFn {
    let l = gd.ell();
    let inv = invmod(gd.group.order() as u64 % l, l);
    let na = mixed.first().map_or(0, |r| r.len());
    (0..na)
        .map(|a| {
            let s = (0..gd.classes.len()).fold(0u64, |acc, k| {
                let term = gd.classes.sizes[k] % l * chi[k] % l * (mixed[k][a] % l as u128) as u64 % l;
                (acc + term) % l
            });
            s * inv % l
        })
        .collect()
}

/// Orbits of `Aut_R(M)` on `F(M)`, with the class distribution of each stabilizer.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitData {
    pub reps: Vec<Elem>,
    pub sizes: Vec<usize>,
    /// `stab_counts[o][k]`: elements of the stabilizer of `reps[o]` in class `k`.
    pub stab_counts: Vec<Vec<u64>>,
    pub generic: Vec<bool>,
}

pub fn orbit_data(gd: &GroupData, q: &RModule, ev: &Evaluation) -> Result<OrbitData> {
    let n = ev.group.check_cap("functor value")?;
    caps::check("functor value", n as u128, caps::tensor())?;
    let gens: Vec<(usize, GrpMap)> = gd.group.gens.iter().map(|&s| (s, ev.act(&gd.group.mat(s)))).collect();
    let (labels, count) = orbit_labels(&gd.group, n, |s, x| {
        let f = &gens.iter().find(|(t, _)| *t == s).expect("generator").1;
        ev.group.index(&f.apply(&ev.group.element(x)))
    });
    let mut reps = vec![None; count];
    let mut sizes = vec![0usize; count];
    for (x, &o) in labels.iter().enumerate() {
        sizes[o] += 1;
        if reps[o].is_none() {
            reps[o] = Some(ev.group.element(x));
        }
    }
    let reps: Vec<Elem> = reps.into_iter().map(|r| r.expect("orbit has a point")).collect();
    let mut stab_counts = vec![vec![0u64; gd.classes.len()]; count];
    for g in 0..gd.group.order() {
        let fg = ev.act(&gd.group.mat(g));
        let k = gd.classes.of(g);
        for (o, r) in reps.iter().enumerate() {
            if fg.apply(r) == *r {
                stab_counts[o][k] += 1;
            }
        }
    }
    let generic = reps.iter().map(|r| ev.is_generic(q, r)).collect();
    Ok(OrbitData { reps, sizes, stab_counts, generic })
}

/// Lexicographically ordered degree `(dim, |Aut|, Supp)`.
pub type Degree = (u64, u64, usize);

#[derive(Clone, Debug, Serialize)]
pub struct Morphing {
    pub irreducible: usize,
    /// Index of the associated functor among the subquotient classes.
    pub functor: usize,
    pub aut_order: usize,
    /// Character of `Ṽ` on the classes of `Aut(F)`, as residues mod `ℓ`.
    pub vtilde: ClassFn,
    pub vtilde_index: usize,
    pub vtilde_dim: u64,
    /// `dim V^H` for the unique orbit with nonzero fixed vectors, `H` its stabilizer.
    pub fixed_dim: u64,
    pub generic_orbit_size: usize,
    pub deg_in: Degree,
    pub deg_out: Degree,
    /// `F ≅ Hom(M, −)`; then `Ṽ = V` through the Yoneda identification.
    pub trivial: bool,
}

/// Surjectivity (and injectivity) data for `Φ_F: K Aut(F) → End(overline KF(M))`.
#[derive(Clone, Debug, Serialize)]
pub struct EpiCertificate {
    pub functor: usize,
    pub aut_order: usize,
    /// `Σ m_i²` over the `F`-typical irreducibles.
    pub target_dim: u64,
    /// `Σ dim(U)²` over the `Aut(F)`-irreducibles occurring in the multiplicity spaces.
    pub char_rank: u64,
    /// Rank over `F_ℓ` of `[t(α β^{-1})]`, `t` the trace on `overline KF(M)`; `None` above the cap.
    pub gram_rank: Option<u64>,
    pub surjective: bool,
    pub injective: bool,
}

/// Largest `|Aut(F)|` for which the explicit Gram matrix is built.
pub const GRAM_CAP: usize = 1200;

/// Per-class data needed for morphing.
#[derive(Clone, Debug)]
pub struct ClassData {
    pub aut: AutData,
    pub mixed: Vec<Vec<u128>>,
    pub orbits: OrbitData,
    pub support: usize,
}

#[derive(Clone, Debug)]
pub struct Stratification {
    pub cat: Arc<Category>,
    pub hom: FunctorObj,
    pub poset: SubquotientPoset,
    /// Representative module per class; the class of `Hom(M, −)` uses `hom.module` itself.
    pub reps: Vec<RModule>,
    pub evals: Vec<Evaluation>,
    pub perm: Vec<Vec<u128>>,
    /// `mult[c][i] = ⟨χ_i, KF_c(M)⟩`.
    pub mult: Vec<Vec<u64>>,
    /// Associated functor of each irreducible.
    pub typical: Vec<usize>,
    pub hom_class: usize,
}

impl Stratification {
    pub fn new(cat: &Arc<Category>, gd: &GroupData) -> Result<Self> {
        let hom = hom_functor(cat, &gd.block.mults)?;
        let poset = SubquotientPoset::new(cat, &hom.module)?;
        let hom_class = poset
            .classes
            .iter()
            .position(|c| c.inner == 0 && c.outer + 1 == poset.lattice.len())
            .ok_or_else(|| Error::TheoremViolation("Hom(M,−) missing from its own subquotients".into()))?;
        let reps: Vec<RModule> = poset
            .classes
            .iter()
            .enumerate()
            .map(|(c, cls)| if c == hom_class { hom.module.clone() } else { cls.module.clone() })
            .collect();
        let evals = reps.iter().map(|q| Evaluation::new(cat, q, &gd.block)).collect::<Result<Vec<_>>>()?;
        let perm: Vec<Vec<u128>> = evals.iter().map(|ev| gd.perm_character(ev)).collect();
        let mult: Vec<Vec<u64>> = perm.iter().map(|p| gd.table.decompose_checked(p)).collect::<Result<_>>()?;
        let mut typical = Vec::with_capacity(gd.table.len());
        for i in 0..gd.table.len() {
            let minimal = minimal_classes(&poset, &mult, i);
            if minimal.len() != 1 {
                return Err(Error::TheoremViolation(format!(
                    "irreducible {i} has {} minimal functors with positive multiplicity",
                    minimal.len()
                )));
            }
            typical.push(minimal[0]);
        }
        Ok(Stratification { cat: cat.clone(), hom, poset, reps, evals, perm, mult, typical, hom_class })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Irreducibles whose associated functor is class `c`.
    pub fn typical_of(&self, c: usize) -> Vec<usize> {
        (0..self.typical.len()).filter(|&i| self.typical[i] == c).collect()
    }

    /// Character of `overline KF_c(M)`, from its definition: constituents of `KF_c(M)` absent
    /// from every `KG(M)` with `G ≺ F_c`.
    pub fn bar_character(&self, gd: &GroupData, c: usize) -> ClassFn {
        let l = gd.ell();
        let mut out = vec![0u64; gd.classes.len()];
        for i in 0..gd.table.len() {
            let m = self.mult[c][i];
            if m == 0 || (0..self.len()).any(|d| self.poset.strictly_below(c, d) && self.mult[d][i] > 0) {
                continue;
            }
            for (o, v) in out.iter_mut().zip(&gd.table.values[i]) {
                *o = (*o + m % l * v) % l;
            }
        }
        out
    }

    /// Every constituent of every `KF_c(M)` has associated functor `≼ F_c`.
    pub fn check_reconstruction(&self) -> bool {
        (0..self.len())
            .all(|c| (0..self.typical.len()).all(|i| self.mult[c][i] == 0 || self.poset.below[c][self.typical[i]]))
    }

    pub fn functor(&self, c: usize) -> Result<FunctorObj> {
        minimal_presentation(&self.cat, &self.reps[c])
    }

    pub fn class_data(&self, gd: &GroupData, c: usize) -> Result<ClassData> {
        let aut = AutData::new(&self.reps[c], gd.ell())?;
        let mixed = mixed_fixed_points(gd, &self.evals[c], &aut);
        let orbits = orbit_data(gd, &self.reps[c], &self.evals[c])?;
        let support = support(&self.reps[c])?;
        Ok(ClassData { aut, mixed, orbits, support })
    }

    /// Class data for every class that is associated to some irreducible.
    pub fn all_class_data(&self, gd: &GroupData) -> Result<Vec<Option<ClassData>>> {
        use rayon::prelude::*;
        (0..self.len())
            .into_par_iter()
            .map(|c| if self.typical_of(c).is_empty() { Ok(None) } else { self.class_data(gd, c).map(Some) })
            .collect()
    }

    pub fn morph(&self, gd: &GroupData, data: &ClassData, i: usize) -> Result<Morphing> {
        let c = self.typical[i];
        let chi = &gd.table.values[i];
        let vt = vtilde_character(gd, &data.mixed, chi);
        let vtilde_index = data
            .aut
            .table
            .find(&vt)
            .ok_or_else(|| Error::TheoremViolation(format!("morphing of irreducible {i} is not irreducible")))?;
        let vtilde_dim = data.aut.table.degrees[vtilde_index];
        if vtilde_dim != self.mult[c][i] {
            return Err(Error::TheoremViolation(format!("dim of the morphing of {i} differs from its multiplicity")));
        }
        let fixed: Vec<(usize, i64)> = (0..data.orbits.reps.len())
            .map(|o| (o, gd.fixed_dim(&data.orbits.stab_counts[o], chi)))
            .filter(|&(_, d)| d != 0)
            .collect();
        if fixed.len() != 1 || !data.orbits.generic[fixed[0].0] || fixed[0].1 as u64 != vtilde_dim {
            return Err(Error::TheoremViolation(format!(
                "irreducible {i}: expected a single generic orbit with fixed vectors, found {fixed:?}"
            )));
        }
        let deg_in: Degree = (gd.table.degrees[i], gd.group.order() as u64, gd.support());
        let deg_out: Degree = (vtilde_dim, data.aut.order() as u64, data.support);
        if deg_out > deg_in {
            return Err(Error::TheoremViolation(format!("degree increases for irreducible {i}")));
        }
        let trivial = c == self.hom_class;
        if deg_out == deg_in && !trivial {
            return Err(Error::TheoremViolation(format!("degree equality without trivial morphing at {i}")));
        }
        if trivial {
            self.check_yoneda(gd, data, chi, &vt)?;
        }
        Ok(Morphing {
            irreducible: i,
            functor: c,
            aut_order: data.aut.order(),
            vtilde: vt,
            vtilde_index,
            vtilde_dim,
            fixed_dim: fixed[0].1 as u64,
            generic_orbit_size: data.orbits.sizes[fixed[0].0],
            deg_in,
            deg_out,
            trivial,
        })
    }

    /// Trivial morphing: `χ_Ṽ(φ ↦ φ h^{-1}) = χ_V(h)` for every class representative `h`.
    fn check_yoneda(&self, gd: &GroupData, data: &ClassData, chi: &[u64], vt: &[u64]) -> Result<()> {
        let y = yoneda_aut(&self.hom, &gd.group, &data.aut.group)?;
        for (k, &h) in gd.classes.reps.iter().enumerate() {
            if vt[data.aut.classes.of(y[h])] != chi[k] {
                return Err(Error::TheoremViolation("trivial morphing does not return V".into()));
            }
        }
        Ok(())
    }

    /// Trace of `α` on `overline KF_c(M)`, per class of `Aut(F_c)`.
    pub fn bar_trace(&self, gd: &GroupData, data: &ClassData, c: usize) -> ClassFn {
        let l = gd.ell();
        let na = data.aut.classes.len();
        let mut t = vec![0u64; na];
        for i in self.typical_of(c) {
            let conj = gd.table.conjugate(&gd.table.values[i]);
            let v = vtilde_character(gd, &data.mixed, &conj);
            let d = gd.table.degrees[i] % l;
            for a in 0..na {
                t[a] = (t[a] + d * v[a]) % l;
            }
        }
        t
    }

    pub fn epimorphism(&self, gd: &GroupData, data: &ClassData, c: usize) -> Result<EpiCertificate> {
        let typ = self.typical_of(c);
        let target_dim: u64 = typ.iter().map(|&i| self.mult[c][i] * self.mult[c][i]).sum();
        let mut occurring = BTreeSet::new();
        for &i in &typ {
            let vt = vtilde_character(gd, &data.mixed, &gd.table.values[i]);
            for (u, chi_u) in data.aut.table.values.iter().enumerate() {
                if data.aut.table.inner(&vt, chi_u) != 0 {
                    occurring.insert(u);
                }
            }
        }
        let char_rank: u64 = occurring.iter().map(|&u| data.aut.table.degrees[u].pow(2)).sum();
        let n = data.aut.order();
        let gram_rank = if n <= GRAM_CAP {
            let t = self.bar_trace(gd, data, c);
            let g = &data.aut.group;
            let rows: Vec<Vec<u64>> =
                (0..n).map(|a| (0..n).map(|b| t[data.aut.classes.of(g.mul(a, g.inv(b)))]).collect()).collect();
            Some(rank_mod(rows, gd.ell()) as u64)
        } else {
            None
        };
        if let Some(r) = gram_rank {
            if r > target_dim || (r == target_dim) != (char_rank == target_dim) {
                return Err(Error::TheoremViolation(format!(
                    "functor {c}: explicit rank {r} and character rank {char_rank} disagree (target {target_dim})"
                )));
            }
        }
        Ok(EpiCertificate {
            functor: c,
            aut_order: n,
            target_dim,
            char_rank,
            gram_rank,
            surjective: char_rank == target_dim,
            injective: char_rank == n as u64,
        })
    }
}

/// Irreducibles whose associated functor is `Hom(M, −)`, found without the full subquotient poset.
/// Every proper subquotient of `Q` lies under `Q/S` for a simple `S ⊆ Q` or under a maximal
/// `T ⊂ Q`, and `G ≼ F` makes the constituents of `KG(M)` constituents of `KF(M)`; so `V` morphs
/// trivially iff it occurs in `KQ(M)` but in none of these.
#[derive(Clone, Debug, Serialize)]
pub struct TrivialMorphing {
    pub irreducibles: Vec<usize>,
    pub simple_submodules: usize,
    pub maximal_submodules: usize,
}

pub fn trivially_morphing(cat: &Arc<Category>, gd: &GroupData) -> Result<TrivialMorphing> {
    let hom = hom_functor(cat, &gd.block.mults)?;
    let q = &hom.module;
    let mult_of = |m: &RModule| -> Result<Vec<u64>> {
        let ev = Evaluation::new(cat, m, &gd.block)?;
        gd.table.decompose_checked(&gd.perm_character(&ev))
    };
    let mut alive: Vec<bool> = mult_of(q)?.iter().map(|&m| m > 0).collect();
    let mut kill = |m: &RModule| -> Result<()> {
        for (a, x) in alive.iter_mut().zip(mult_of(m)?) {
            *a &= x == 0;
        }
        Ok(())
    };
    let simple = simple_submodules(cat, q)?;
    for s in &simple {
        kill(&q.quotient(s)?.0)?;
    }
    let maximal = maximal_submodules(cat, q)?;
    for t in &maximal {
        kill(&q.submodule(t)?.0)?;
    }
    Ok(TrivialMorphing {
        irreducibles: (0..alive.len()).filter(|&i| alive[i]).collect(),
        simple_submodules: simple.len(),
        maximal_submodules: maximal.len(),
    })
}

/// Simple submodules, all inside the socle `{x : Jx = 0}`.
pub fn simple_submodules(cat: &Category, q: &RModule) -> Result<Vec<SpanBasis>> {
    let maps: Vec<GrpMap> = cat.radical.rows.iter().map(|r| q.action_map(r)).collect();
    let mut soc = SpanBasis::full(&q.add);
    for f in &maps {
        soc = soc.intersect(&crate::linalg::kernel(f));
    }
    let elems = soc.elements()?;
    let mut cyclic: Vec<SpanBasis> = Vec::new();
    for x in elems.iter().filter(|x| !q.add.is_zero(x)) {
        let c = q.generated(std::slice::from_ref(x));
        if !cyclic.contains(&c) {
            cyclic.push(c);
        }
    }
    let minimal = cyclic.iter().filter(|c| !cyclic.iter().any(|d| d != *c && d.is_subset(c))).cloned().collect();
    Ok(minimal)
}

/// Maximal submodules, as preimages of the maximal submodules of the semisimple top `Q/JQ`.
pub fn maximal_submodules(cat: &Category, q: &RModule) -> Result<Vec<SpanBasis>> {
    if q.is_zero() {
        return Ok(Vec::new());
    }
    let jq = cat.jq(q);
    let (top, quot) = q.quotient(&jq)?;
    let subs = crate::functors::subfunctors(&top)?;
    let proper: Vec<&SpanBasis> = subs.iter().filter(|s| !s.is_full()).collect();
    proper
        .iter()
        .filter(|t| !proper.iter().any(|u| u != *t && t.is_subset(u)))
        .map(|t| crate::linalg::preimage(&quot.proj, t))
        .collect()
}

/// `≼`-minimal classes with positive multiplicity of irreducible `i`.
pub fn minimal_classes(poset: &SubquotientPoset, mult: &[Vec<u64>], i: usize) -> Vec<usize> {
    let pos: Vec<usize> = (0..mult.len()).filter(|&c| mult[c][i] > 0).collect();
    pos.iter().copied().filter(|&c| !pos.iter().any(|&d| poset.strictly_below(c, d))).collect()
}

/// Rank of a matrix over `F_ℓ` by Gaussian elimination.
pub fn rank_mod(mut rows: Vec<Vec<u64>>, l: u64) -> usize {
    let mut echelon = Echelon::new(l);
    for r in rows.drain(..) {
        echelon.insert(r);
    }
    echelon.rank()
}

/// Incremental row echelon form over `F_ℓ`.
#[derive(Clone, Debug)]
pub struct Echelon {
    l: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    pub fn new(l: u64) -> Self {
        Echelon { l, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v`; returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let l = self.l;
        for (p, r) in &self.rows {
            let c = v[*p];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(r) {
                    *x = (*x + (l - c) * y) % l;
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(p) => {
                let inv = invmod(v[p], l);
                for x in v.iter_mut() {
                    *x = *x * inv % l;
                }
                for (_, r) in self.rows.iter_mut() {
                    let c = r[p];
                    if c != 0 {
                        for (x, y) in r.iter_mut().zip(&v) {
                            *x = (*x + (l - c) * y) % l;
                        }
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }
}

/// Result of the stratification sweep on one group: Theorem A counts, morphings, certificates.
#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub morphings: Vec<Morphing>,
    pub epimorphisms: Vec<EpiCertificate>,
    pub reconstruction: bool,
}

pub fn sweep(strat: &Stratification, gd: &GroupData) -> Result<Sweep> {
    let data = strat.all_class_data(gd)?;
    let mut morphings = Vec::new();
    for i in 0..gd.table.len() {
        let d = data[strat.typical[i]].as_ref().expect("class data for associated functors");
        morphings.push(strat.morph(gd, d, i)?);
    }
    let mut epimorphisms = Vec::new();
    for (c, d) in data.iter().enumerate() {
        if let Some(d) = d {
            epimorphisms.push(strat.epimorphism(gd, d, c)?);
        }
    }
    Ok(Sweep { morphings, epimorphisms, reconstruction: strat.check_reconstruction() })
}

/// `Aut(F)` for a functor object (for callers holding a presentation).
pub fn aut_data_of(f: &FunctorObj, ell: u64) -> Result<AutData> {
    let group = aut_functor(f)?;
    let classes = Classes::new(&group);
    let table = dixon_char_table_mod(&group, &classes, ell)?;
    Ok(AutData { group, classes, table })
}

/// One step of the injectivity scan for `Φ_F` at a multiplicity profile of `M`.
#[derive(Clone, Debug, Serialize)]
pub struct InjectivityStep {
    pub mults: Vec<usize>,
    pub group_order: usize,
    /// `F` occurs among the subquotients of `Hom(M, −)`.
    pub present: bool,
    pub certificate: Option<EpiCertificate>,
}

impl InjectivityStep {
    pub fn injective(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.surjective && c.injective)
    }
}

/// `Φ_F` at each profile in turn, stopping after the first injective one. Multiplicity profiles
/// where `F` is not a subquotient of `Hom(M, −)` are reported without a certificate.
pub fn injectivity_scan(cat: &Arc<Category>, f: &RModule, profiles: &[Vec<usize>]) -> Result<Vec<InjectivityStep>> {
    let mut out = Vec::new();
    for mults in profiles {
        let block = cat.block(mults)?;
        let gd = GroupData::new(&block)?;
        let st = Stratification::new(cat, &gd)?;
        let step = match st.poset.class_of(cat, f)? {
            Some(c) => {
                let data = st.class_data(&gd, c)?;
                let cert = st.epimorphism(&gd, &data, c)?;
                InjectivityStep {
                    mults: mults.clone(),
                    group_order: gd.group.order(),
                    present: true,
                    certificate: Some(cert),
                }
            }
            None => InjectivityStep {
                mults: mults.clone(),
                group_order: gd.group.order(),
                present: false,
                certificate: None,
            },
        };
        let done = step.injective();
        out.push(step);
        if done {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn setup(inst: &fixtures::Instance) -> (Arc<Category>, GroupData, Stratification) {
        let cat = Category::new(inst.ctx.clone()).unwrap();
        let gd = GroupData::new(&inst.block().unwrap()).unwrap();
        let st = Stratification::new(&cat, &gd).unwrap();
        (cat, gd, st)
    }

    fn dim_of(st: &Stratification, c: usize) -> usize {
        st.reps[c].add.rank()
    }

    #[test]
    fn injectivity_thresholds() {
        // (context, F = Hom(X, −), profiles, expected: None absent, Some(injective))
        type Case = (fixtures::Instance, Vec<usize>, Vec<Vec<usize>>, Vec<Option<bool>>);
        let cases: Vec<Case> = vec![
            (fixtures::gl_field(1, 3).unwrap(), vec![1], vec![vec![1], vec![2]], vec![Some(false), Some(true)]),
            (
                fixtures::gl_field(1, 2).unwrap(),
                vec![2],
                vec![vec![1], vec![2], vec![3]],
                vec![None, Some(false), Some(false)],
            ),
            (
                fixtures::chain_instance(3, 2, &[1, 1]).unwrap(),
                vec![0, 1],
                vec![vec![0, 1], vec![1, 1], vec![0, 2]],
                vec![Some(false), Some(false), Some(true)],
            ),
        ];
        for (inst, fm, profiles, expected) in cases {
            let cat = Category::new(inst.ctx.clone()).unwrap();
            let f = hom_functor(&cat, &fm).unwrap().module;
            let steps = injectivity_scan(&cat, &f, &profiles).unwrap();
            let got: Vec<Option<bool>> = steps.iter().map(|s| s.present.then(|| s.injective())).collect();
            assert_eq!(got, expected, "{} {fm:?}", inst.name);
            assert!(steps.iter().flat_map(|s| &s.certificate).all(|c| c.surjective));
        }
    }

    #[test]
    fn gl2f2_morphing() {
        let inst = fixtures::gl_field(2, 2).unwrap();
        let (_, gd, st) = setup(&inst);
        assert_eq!(gd.table.degrees, vec![1, 1, 2]);
        let sw = sweep(&st, &gd).unwrap();
        // Trivial → 0; the nontrivial linear character → Hom(k², −) with equal degrees;
        // Steinberg → Hom(k, −) with Ṽ the regular character of GL_1(F_2).
        let ranks: Vec<usize> = sw.morphings.iter().map(|m| dim_of(&st, m.functor)).collect();
        assert_eq!(ranks, vec![0, 2, 1]);
        assert_eq!(sw.morphings[0].deg_out, (1, 1, 0));
        assert_eq!(sw.morphings[1].deg_in, sw.morphings[1].deg_out);
        assert!(sw.morphings[1].trivial);
        assert_eq!(sw.morphings[2].deg_out, (1, 1, 1));
        let bar = st.bar_character(&gd, st.typical[2]);
        assert_eq!(bar, gd.table.values[2]);
        assert!(sw.reconstruction);
        assert!(sw.epimorphisms.iter().all(|e| e.surjective));
        // Only the sign character is typical for Hom(k², −), so Φ has a kernel there.
        let hom = sw.epimorphisms.iter().find(|e| e.functor == st.hom_class).unwrap();
        assert_eq!((hom.target_dim, hom.aut_order, hom.injective), (1, 6, false));
    }

    #[test]
    fn p11_morphing() {
        let inst = fixtures::quiver_instance(3, 1, 1).unwrap();
        let (_, gd, st) = setup(&inst);
        let sw = sweep(&st, &gd).unwrap();
        assert!(sw.morphings.iter().all(|m| !m.trivial));
        let two_dim: Vec<&Morphing> = sw.morphings.iter().filter(|m| gd.table.degrees[m.irreducible] == 2).collect();
        assert_eq!(two_dim.len(), 2);
        assert_eq!(two_dim[0].functor, two_dim[1].functor);
        assert!(sw.epimorphisms.iter().all(|e| e.surjective));
    }

    #[test]
    fn trivial_morphing_agrees_with_poset() {
        for name in ["gl2-f2", "gl2-f3", "p11-f3", "chain-p2-l2-02", "chain-p2-l2-11", "cycle2-f2"] {
            let inst = fixtures::instance_by_name(name).unwrap();
            let (cat, gd, st) = setup(&inst);
            let fast = trivially_morphing(&cat, &gd).unwrap();
            let slow: Vec<usize> = (0..gd.table.len()).filter(|&i| st.typical[i] == st.hom_class).collect();
            assert_eq!(fast.irreducibles, slow, "{name}");
        }
    }

    #[test]
    fn echelon_rank() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(rank_mod(rows, 7), 2);
    }
}
