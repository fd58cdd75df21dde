//! Permutation modules `KF(M)`, the operators `T_H`, invariant tensors `v_F` and the
//! projections `P'`, `P''`. Matrices are integer and stored by sparse columns.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{Echelon, GroupData};
use crate::algebra::{is_isomorphic, BlockModule, RModule};
use crate::caps;
use crate::error::{Error, Result};
use crate::functors::{
    context_multiplicities, hom_functor, subfunctors, submodules_until, Category, Evaluation, FunctorObj,
};
use crate::groups::{orbit_labels, orbits_on_product, ClassFn};
use crate::linalg::{kernel, Elem, GrpMap, PGroup, SpanBasis};

/// Points of `F(M)` with the permutations induced by the generators of `Aut_R(M)`.
#[derive(Clone, Debug)]
pub struct PermRep {
    pub points: usize,
    pub gens: Vec<Vec<u32>>,
}

impl PermRep {
    pub fn new(gd: &GroupData, ev: &Evaluation) -> Result<Self> {
        let n = ev.group.check_cap("functor value")?;
        caps::check("functor value", n as u128, caps::tensor())?;
        let gens = gd
            .group
            .gens
            .iter()
            .map(|&s| {
                let f = ev.act(&gd.group.mat(s));
                (0..n).map(|x| ev.group.index(&f.apply(&ev.group.element(x))) as u32).collect()
            })
            .collect();
        Ok(PermRep { points: n, gens })
    }

    /// Orbit label per point and the number of orbits.
    pub fn orbits(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.points];
        let mut count = 0;
        for x in 0..self.points {
            if label[x] != usize::MAX {
                continue;
            }
            label[x] = count;
            let mut stack = vec![x];
            while let Some(y) = stack.pop() {
                for g in &self.gens {
                    let z = g[y] as usize;
                    if label[z] == usize::MAX {
                        label[z] = count;
                        stack.push(z);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }
}

/// Integer matrix `KF(M) → KG(M)` in the point bases, by sparse sorted columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intertwiner {
    pub rows: usize,
    pub cols: Vec<Vec<(u32, i64)>>,
    pub provenance: String,
}

impl Intertwiner {
    pub fn from_columns(rows: usize, cols: Vec<Vec<(u32, i64)>>, provenance: impl Into<String>) -> Self {
        let cols = cols.into_iter().map(normalize).collect();
        Intertwiner { rows, cols, provenance: provenance.into() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_columns(n, (0..n).map(|i| vec![(i as u32, 1)]).collect(), "identity")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Intertwiner) -> Intertwiner {
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc: Vec<(u32, i64)> = Vec::new();
                for &(k, v) in col {
                    acc.extend(self.cols[k as usize].iter().map(|&(r, w)| (r, v * w)));
                }
                acc
            })
            .collect();
        Self::from_columns(self.rows, cols, format!("{} ∘ {}", self.provenance, other.provenance))
    }

    pub fn scaled(&self, c: i64) -> Intertwiner {
        let cols = self.cols.iter().map(|col| col.iter().map(|&(r, v)| (r, c * v)).collect()).collect();
        Self::from_columns(self.rows, cols, self.provenance.clone())
    }

    pub fn same_matrix(&self, other: &Intertwiner) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// `ρ_target(g) T = T ρ_source(g)` for every generator, exactly.
    pub fn commutes(&self, source: &PermRep, target: &PermRep) -> bool {
        source.gens.iter().zip(&target.gens).all(|(gs, gt)| {
            (0..self.cols.len()).all(|c| {
                let moved = normalize(self.cols[c].iter().map(|&(r, v)| (gt[r as usize], v)).collect());
                moved == self.cols[gs[c] as usize]
            })
        })
    }

    /// Rank of the column space over `F_ℓ` (an exact lower bound for the rational rank).
    pub fn rank_mod(&self, l: u64) -> usize {
        let mut e = Echelon::new(l);
        for col in &self.cols {
            let mut v = vec![0u64; self.rows];
            for &(r, x) in col {
                v[r as usize] = x.rem_euclid(l as i64) as u64;
            }
            e.insert(v);
        }
        e.rank()
    }
}

fn normalize(mut col: Vec<(u32, i64)>) -> Vec<(u32, i64)> {
    col.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(u32, i64)> = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

/// `G ⊕ F` (in this order) evaluated at `M`, with the splitting of its points into pairs.
pub struct PairSpace {
    pub sum: RModule,
    pub ev_sum: Evaluation,
    pub ev_g: Evaluation,
    pub ev_f: Evaluation,
    split: usize,
}

impl PairSpace {
    pub fn new(cat: &Arc<Category>, qg: &RModule, qf: &RModule, m: &BlockModule) -> Result<Self> {
        let sum = qg.direct_sum(qf);
        let ev_sum = Evaluation::new(cat, &sum, m)?;
        let ev_g = Evaluation::new(cat, qg, m)?;
        let ev_f = Evaluation::new(cat, qf, m)?;
        Ok(PairSpace { sum, ev_sum, ev_g, ev_f, split: qg.add.rank() })
    }

    /// Point of `(G ⊕ F)(M)` for `d ∈ G(M)`, `c ∈ F(M)`.
    pub fn join(&self, d: &[u64], c: &[u64]) -> Elem {
        let comps: Vec<Elem> = (0..self.ev_sum.copies.len())
            .map(|a| {
                let mut v = self.ev_g.component(d, a);
                v.extend(self.ev_f.component(c, a));
                v
            })
            .collect();
        self.ev_sum.assemble(&comps).expect("pairs of points lie in the sum")
    }

    /// Inverse of [`join`](Self::join).
    pub fn split(&self, x: &[u64]) -> (Elem, Elem) {
        let n = self.ev_sum.copies.len();
        let (mut gs, mut fs) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for a in 0..n {
            let mut v = self.ev_sum.component(x, a);
            fs.push(v.split_off(self.split));
            gs.push(v);
        }
        (self.ev_g.assemble(&gs).expect("G-part"), self.ev_f.assemble(&fs).expect("F-part"))
    }

    /// `T_H: u_c ↦ Σ_{(d, c) ∈ H(M)} u_d`.
    pub fn t_h(&self, h: &SpanBasis) -> Result<Intertwiner> {
        let nf = self.ev_f.group.check_cap("functor value")?;
        let ng = self.ev_g.group.check_cap("functor value")?;
        caps::check("pair space", (nf as u128) * (ng as u128), caps::tensor())?;
        let member = self.ev_sum.sub_eval(h);
        let mut cols = vec![Vec::new(); nf];
        for d in 0..ng {
            let de = self.ev_g.group.element(d);
            for (c, col) in cols.iter_mut().enumerate() {
                if member(&self.join(&de, &self.ev_f.group.element(c))) {
                    col.push((d as u32, 1));
                }
            }
        }
        Ok(Intertwiner::from_columns(ng, cols, "T_H"))
    }

    /// `γ^* δ_*` through the pushout `P = (G ⊕ F)/{(−β h, α h)}` of the two projections of `H`.
    pub fn pushout_operator(&self, cat: &Arc<Category>, h: &SpanBasis) -> Result<Intertwiner> {
        let neg: Vec<Elem> = h
            .rows
            .iter()
            .map(|r| {
                let mut v = r.clone();
                for (j, x) in v.iter_mut().enumerate().take(self.split) {
                    *x = (self.sum.add.modulus(j) - *x) % self.sum.add.modulus(j);
                }
                v
            })
            .collect();
        let n = SpanBasis::from_gens(&self.sum.add, &neg)?;
        let (pm, quot) = self.sum.quotient(&n)?;
        let ev_p = Evaluation::new(cat, &pm, &self.ev_sum.target)?;
        let to_p = |x: &Elem| -> usize {
            let comps: Vec<Elem> =
                (0..self.ev_sum.copies.len()).map(|a| quot.proj.apply(&self.ev_sum.component(x, a))).collect();
            ev_p.group.index(&ev_p.assemble(&comps).expect("quotient of points"))
        };
        let gz = self.ev_g.group.zero();
        let fz = self.ev_f.group.zero();
        let nf = self.ev_f.group.check_cap("functor value")?;
        let ng = self.ev_g.group.check_cap("functor value")?;
        let delta: Vec<usize> = (0..nf).map(|c| to_p(&self.join(&gz, &self.ev_f.group.element(c)))).collect();
        let mut gamma_fibres: HashMap<usize, Vec<u32>> = HashMap::new();
        for d in 0..ng {
            gamma_fibres.entry(to_p(&self.join(&self.ev_g.group.element(d), &fz))).or_default().push(d as u32);
        }
        let cols = delta
            .iter()
            .map(|p| gamma_fibres.get(p).map_or_else(Vec::new, |ds| ds.iter().map(|&d| (d, 1)).collect()))
            .collect();
        Ok(Intertwiner::from_columns(ng, cols, "γ^* δ_*"))
    }

    /// Both projections `H → G`, `H → F` are onto.
    pub fn projections_onto(&self, h: &SpanBasis) -> bool {
        let ng = self.split;
        let nf = self.sum.add.rank() - ng;
        let gp: Vec<Elem> = h.rows.iter().map(|r| r[..ng].to_vec()).collect();
        let fp: Vec<Elem> = h.rows.iter().map(|r| r[ng..].to_vec()).collect();
        let gfull = PGroup::new(self.sum.add.p, (0..ng).map(|j| log_modulus(&self.sum.add, j)).collect());
        let ffull = PGroup::new(self.sum.add.p, (ng..ng + nf).map(|j| log_modulus(&self.sum.add, j)).collect());
        match (gfull, ffull) {
            (Ok(g), Ok(f)) => {
                SpanBasis::from_gens_unchecked(&g, &gp).is_full() && SpanBasis::from_gens_unchecked(&f, &fp).is_full()
            }
            _ => false,
        }
    }
}

fn log_modulus(g: &PGroup, j: usize) -> u32 {
    g.exps[j]
}

/// Outcome of the `T_H` span computation for one pair `(F, G)`.
#[derive(Clone, Debug, Serialize)]
pub struct IntertwinerSpan {
    pub orbits: u128,
    pub burnside: u128,
    pub mult_dot: u64,
    /// Rank over `F_ℓ` of the `T_H` found before the span was complete.
    pub span_rank: u64,
    pub submodules_visited: usize,
    /// Operators built explicitly and checked to commute with every generator.
    pub explicit_checked: usize,
    /// `true` when the whole lattice of `G ⊕ F` was visited and its size equals the rank.
    pub independent: Option<bool>,
}

/// Largest `|(G ⊕ F)(M)|` for which every rank-raising `T_H` is materialised and checked.
pub const EXPLICIT_POINTS: usize = 4096;

/// Span of `{T_H(M)}_{H ⊆ G ⊕ F}` versus the orbit count on `G(M) × F(M)`.
/// Each `T_H` is constant on `Aut_R(M)`-orbits of pairs, so it is a 0/1 vector in the orbit
/// basis; the search stops as soon as these vectors span.
pub fn intertwiner_span(
    cat: &Arc<Category>,
    gd: &GroupData,
    qf: &RModule,
    qg: &RModule,
    perm: (&[u128], &[u128]),
    mults: (&[u64], &[u64]),
) -> Result<IntertwinerSpan> {
    let ps = PairSpace::new(cat, qg, qf, &gd.block)?;
    let rep = PermRep::new(gd, &ps.ev_sum)?;
    let (labels, count) = rep.orbits();
    let mut reps = vec![usize::MAX; count];
    for (x, &o) in labels.iter().enumerate() {
        if reps[o] == usize::MAX {
            reps[o] = x;
        }
    }
    // `x ∈ H(M)` iff the submodule generated by the components of `x` lies in `H`.
    let generated: Vec<SpanBasis> = reps
        .iter()
        .map(|&x| {
            let e = ps.ev_sum.group.element(x);
            let comps: Vec<Elem> = (0..ps.ev_sum.copies.len()).map(|a| ps.ev_sum.component(&e, a)).collect();
            ps.sum.generated(&comps)
        })
        .collect();
    let explicit = rep.points <= EXPLICIT_POINTS;
    let (rep_f, rep_g) =
        if explicit { (Some(PermRep::new(gd, &ps.ev_f)?), Some(PermRep::new(gd, &ps.ev_g)?)) } else { (None, None) };
    let mut ech = Echelon::new(gd.ell());
    let mut checked = 0usize;
    let mut failure = None;
    let mut complete = true;
    let visited = submodules_until(&ps.sum, |h| {
        let v: Vec<u64> = generated.iter().map(|s| u64::from(s.is_subset(h))).collect();
        if ech.insert(v) && explicit {
            match ps.t_h(h) {
                Ok(t) if t.commutes(rep_f.as_ref().expect("explicit"), rep_g.as_ref().expect("explicit")) => {
                    checked += 1
                }
                Ok(_) => {
                    failure = Some(Error::TheoremViolation("T_H does not commute with the group".into()));
                    return false;
                }
                Err(e) => {
                    failure = Some(e);
                    return false;
                }
            }
        }
        if ech.rank() == count {
            complete = false;
            return false;
        }
        true
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let cl = &gd.classes;
    let burnside = orbits_on_product(cl, perm.0, perm.1);
    let mult_dot = mults.0.iter().zip(mults.1).map(|(a, b)| a * b).sum();
    // After an early stop every further `T_H` is dependent, so independence is only decidable
    // when the lattice was exhausted or a dependency was already seen.
    let independent = if complete || ech.rank() < visited { Some(ech.rank() == visited) } else { None };
    Ok(IntertwinerSpan {
        orbits: count as u128,
        burnside,
        mult_dot,
        span_rank: ech.rank() as u64,
        submodules_visited: visited,
        explicit_checked: checked,
        independent,
    })
}

/// `Fr_n = Hom(R^n, −)`, which needs `R` in `add` of the context.
pub struct FreeFunctor {
    pub n: usize,
    pub functor: FunctorObj,
    /// `Q → Σ^n`, `φ ↦ (φ(ι_k(1)))_k`; bijective.
    pub tuples: GrpMap,
}

pub fn free_functor(cat: &Arc<Category>, n: usize) -> Result<FreeFunctor> {
    let ring =
        cat.ctx.modules.first().map(|m| m.ring.clone()).ok_or_else(|| Error::Precondition("empty context".into()))?;
    let regular = RModule::regular(&ring);
    let base = context_multiplicities(cat, &regular)?;
    let mults: Vec<usize> = base.iter().map(|a| a * n).collect();
    let functor = hom_functor(cat, &mults)?;
    let x = cat.block(&mults)?;
    let rn = regular.power(n);
    let psi = is_isomorphic(&rn, &x.module)?
        .ok_or_else(|| Error::TheoremViolation("R^n is not isomorphic to its decomposition".into()))?;
    let sigma = &cat.sigma.module.add;
    let target = sigma.power(n);
    let hx = &functor.hx;
    let dim_r = ring.dim();
    let cols: Vec<Elem> = (0..hx.space.rank())
        .map(|u| {
            let phi = hx.map(&hx.space.unit(u)).compose(&psi);
            (0..n).flat_map(|k| phi.apply(&unit_at(&rn.add, k * dim_r, &ring.one))).collect()
        })
        .collect();
    let tuples = GrpMap::from_images(hx.space.clone(), target, &cols)?;
    Ok(FreeFunctor { n, functor, tuples })
}

fn unit_at(g: &PGroup, offset: usize, one: &[u64]) -> Elem {
    let mut v = g.zero();
    v[offset..offset + one.len()].copy_from_slice(one);
    v
}

impl FreeFunctor {
    /// Subfunctor `{φ : Σ_k c_k φ(ι_k 1) = 0 for each relation c}`.
    pub fn linear_subfunctor(&self, relations: &[Vec<i64>]) -> Result<SpanBasis> {
        let sigma = self.tuples.cod.clone();
        let block = sigma.rank() / self.n.max(1);
        let dom = &self.tuples.cod;
        let cod = PGroup::new(dom.p, (0..relations.len()).flat_map(|_| dom.exps[..block].to_vec()).collect())?;
        let images: Vec<Elem> = (0..dom.rank())
            .map(|u| {
                let (k, j) = (u / block, u % block);
                relations
                    .iter()
                    .flat_map(|c| {
                        let mut v = vec![0u64; block];
                        let m = dom.modulus(u) as i64;
                        v[j] = c[k].rem_euclid(m) as u64;
                        v
                    })
                    .collect()
            })
            .collect();
        let rel = GrpMap::from_images(dom.clone(), cod, &images)?;
        Ok(kernel(&rel.compose(&self.tuples)))
    }

    /// `F_Δ(M) = {(m, …, m)}`.
    pub fn diagonal(&self) -> Result<SpanBasis> {
        let rels: Vec<Vec<i64>> = (1..self.n)
            .map(|k| {
                (0..self.n)
                    .map(|j| {
                        if j == k - 1 {
                            1
                        } else if j == k {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        self.linear_subfunctor(&rels)
    }

    /// `F_μ(M) = {(m_1, m_2, m_1 + m_2)}`, for `n = 3`.
    pub fn multiplication(&self) -> Result<SpanBasis> {
        if self.n != 3 {
            return Err(Error::Precondition("the multiplication tensor lives in Fr_3".into()));
        }
        self.linear_subfunctor(&[vec![1, 1, -1]])
    }
}

/// `v_F(M)` as the sorted support `F(M) ⊆ Fr_n(M)`; checks invariance under `Aut_R(M)`.
pub fn v_f(gd: &GroupData, ev: &Evaluation, f: &SpanBasis) -> Result<Vec<u32>> {
    let rep = PermRep::new(gd, ev)?;
    let member = ev.sub_eval(f);
    let ind: Vec<bool> = (0..rep.points).map(|x| member(&ev.group.element(x))).collect();
    if rep.gens.iter().any(|g| (0..rep.points).any(|x| ind[x] != ind[g[x] as usize])) {
        return Err(Error::TheoremViolation("v_F is not invariant".into()));
    }
    Ok((0..rep.points as u32).filter(|&x| ind[x as usize]).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningRank {
    pub n: usize,
    pub rank: u64,
    pub orbits: u64,
    pub subfunctors: u64,
    /// The rank is certified exactly: it meets `min(orbits, subfunctors)`.
    pub exact: bool,
}

/// Rank of `{v_F(M)}_{F ⊆ Fr_n}` against the number of orbits on `M^n` and of subfunctors.
pub fn spanning_rank(cat: &Arc<Category>, gd: &GroupData, n: usize) -> Result<SpanningRank> {
    let fr = free_functor(cat, n)?;
    let ev = Evaluation::new(cat, &fr.functor.module, &gd.block)?;
    let rep = PermRep::new(gd, &ev)?;
    let (labels, count) = rep.orbits();
    let mut reps = vec![usize::MAX; count];
    for (x, &o) in labels.iter().enumerate() {
        if reps[o] == usize::MAX {
            reps[o] = x;
        }
    }
    let subs = subfunctors(&fr.functor.module)?;
    let mut ech = Echelon::new(gd.ell());
    for h in &subs {
        let support = v_f_on_orbits(&ev, h, &labels, &reps)?;
        ech.insert(support);
    }
    let rank = ech.rank() as u64;
    let bound = (count as u64).min(subs.len() as u64);
    Ok(SpanningRank { n, rank, orbits: count as u64, subfunctors: subs.len() as u64, exact: rank == bound })
}

/// `v_F` in the orbit basis, after checking it is constant on every orbit.
fn v_f_on_orbits(ev: &Evaluation, h: &SpanBasis, labels: &[usize], reps: &[usize]) -> Result<Vec<u64>> {
    let member = ev.sub_eval(h);
    let at: Vec<u64> = reps.iter().map(|&x| u64::from(member(&ev.group.element(x)))).collect();
    for (x, &o) in labels.iter().enumerate() {
        if u64::from(member(&ev.group.element(x))) != at[o] {
            return Err(Error::TheoremViolation("v_F is not constant on an orbit".into()));
        }
    }
    Ok(at)
}

#[derive(Clone, Debug, Serialize)]
pub struct Projections {
    pub points: usize,
    /// `|F_1(M)|`, the scale of the integer matrix `|F_1(M)| P''`.
    pub scale: u64,
    pub idempotent: bool,
    pub commute: bool,
    pub composite_rank: u64,
    /// `|F_2(M)| / |F_1(M)|`.
    pub coset_count: u64,
}

/// `P'_{F_2}` (restriction to `F_2(M)`) and `P''_{F_1}` (averaging over `F_1(M)`-cosets) on
/// `KFr_n(M)`, for `F_1 ⊆ F_2 ⊆ Fr_n` given as submodules of the same module `q`.
pub fn projections(gd: &GroupData, ev: &Evaluation, f1: &SpanBasis, f2: &SpanBasis) -> Result<Projections> {
    if !f1.is_subset(f2) {
        return Err(Error::Invalid("projections need nested subfunctors".into()));
    }
    let rep = PermRep::new(gd, ev)?;
    let n = rep.points;
    let g = &ev.group;
    let in1 = ev.sub_eval(f1);
    let in2 = ev.sub_eval(f2);
    let elems: Vec<Elem> = (0..n).map(|x| g.element(x)).collect();
    let f1_pts: Vec<&Elem> = elems.iter().filter(|e| in1(e)).collect();
    let f2_mask: Vec<bool> = elems.iter().map(|e| in2(e)).collect();
    let scale = f1_pts.len() as i64;
    caps::check("projection matrix", (n as u128) * (scale as u128), caps::tensor() * 16)?;
    let p1 = Intertwiner::from_columns(
        n,
        (0..n).map(|x| if f2_mask[x] { vec![(x as u32, 1)] } else { Vec::new() }).collect(),
        "P'",
    );
    let p2 = Intertwiner::from_columns(
        n,
        elems.iter().map(|m| f1_pts.iter().map(|f| (g.index(&g.add(m, f)) as u32, 1)).collect()).collect(),
        "|F_1| P''",
    );
    let idempotent = p1.compose(&p1).same_matrix(&p1) && p2.compose(&p2).same_matrix(&p2.scaled(scale));
    let commute = p1.compose(&p2).same_matrix(&p2.compose(&p1)) && p1.commutes(&rep, &rep) && p2.commutes(&rep, &rep);
    let comp = p1.compose(&p2);
    // Nonzero columns of the composite are indicators of `F_1(M)`-cosets inside `F_2(M)`;
    // distinct cosets have disjoint supports, so the rank is the number of distinct columns.
    let mut distinct: Vec<&Vec<(u32, i64)>> = comp.cols.iter().filter(|c| !c.is_empty()).collect();
    distinct.sort();
    distinct.dedup();
    let f2_count = f2_mask.iter().filter(|&&b| b).count() as u64;
    Ok(Projections {
        points: n,
        scale: scale as u64,
        idempotent,
        commute,
        composite_rank: distinct.len() as u64,
        coset_count: f2_count / scale as u64,
    })
}

/// `orbits` and permutation character of an evaluation, for callers that only need counts.
pub fn orbit_summary(gd: &GroupData, ev: &Evaluation) -> Result<(usize, ClassFn)> {
    let rep = PermRep::new(gd, ev)?;
    let (_, count) = orbit_labels(&gd.group, rep.points, |s, x| {
        let k = gd.group.gens.iter().position(|&t| t == s).expect("generator");
        rep.gens[k][x] as usize
    });
    let pi = gd.perm_character(ev);
    Ok((count, gd.table.embed_perm(&pi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::functors::hom_functor;

    fn gd_of(inst: &fixtures::Instance) -> (Arc<Category>, GroupData) {
        let cat = Category::new(inst.ctx.clone()).unwrap();
        (cat, GroupData::new(&inst.block().unwrap()).unwrap())
    }

    #[test]
    fn spanning_ranks() {
        let (cat, gd) = gd_of(&fixtures::gl_field(3, 2).unwrap());
        let s = spanning_rank(&cat, &gd, 2).unwrap();
        assert_eq!((s.rank, s.orbits, s.subfunctors), (5, 5, 5));
        let (cat, gd) = gd_of(&fixtures::gl_field(1, 2).unwrap());
        let s = spanning_rank(&cat, &gd, 2).unwrap();
        assert_eq!((s.rank, s.orbits, s.subfunctors), (4, 4, 5));
        assert!(s.exact);
        let s = spanning_rank(&cat, &gd, 1).unwrap();
        assert_eq!((s.rank, s.orbits, s.subfunctors), (2, 2, 2));
    }

    #[test]
    fn diagonal_and_multiplication_tensors() {
        let (cat, gd) = gd_of(&fixtures::gl_field(2, 2).unwrap());
        let fr = free_functor(&cat, 3).unwrap();
        let ev = Evaluation::new(&cat, &fr.functor.module, &gd.block).unwrap();
        assert_eq!(v_f(&gd, &ev, &fr.diagonal().unwrap()).unwrap().len(), 4);
        assert_eq!(v_f(&gd, &ev, &fr.multiplication().unwrap()).unwrap().len(), 16);
        let zero = SpanBasis::zero(&fr.functor.module.add);
        assert_eq!(v_f(&gd, &ev, &zero).unwrap(), vec![0]);
    }

    #[test]
    fn projection_example() {
        // ⟨O_2⟩ at M = O_2: F_1 = 2·Fr_1 inside Fr_1, image of the composite has dim 2.
        let (cat, gd) = gd_of(&fixtures::chain_instance(2, 2, &[0, 1]).unwrap());
        let fr = free_functor(&cat, 1).unwrap();
        let q = &fr.functor.module;
        let two: Vec<Elem> = (0..q.add.rank()).map(|u| q.add.scale(2, &q.add.unit(u))).collect();
        let f1 = SpanBasis::from_gens(&q.add, &two).unwrap();
        let f2 = SpanBasis::full(&q.add);
        let ev = Evaluation::new(&cat, q, &gd.block).unwrap();
        let p = projections(&gd, &ev, &f1, &f2).unwrap();
        assert!(p.idempotent && p.commute);
        assert_eq!((p.composite_rank, p.coset_count), (2, 2));
        let p = projections(&gd, &ev, &SpanBasis::zero(&q.add), &f2).unwrap();
        assert_eq!(p.composite_rank, 4);
        let p = projections(&gd, &ev, &f2, &f2).unwrap();
        assert_eq!(p.composite_rank, 1);
    }

    #[test]
    fn t_h_span_and_pushout() {
        let (cat, gd) = gd_of(&fixtures::gl_field(2, 2).unwrap());
        let fr = hom_functor(&cat, &[1]).unwrap();
        let ev = fr.eval(&gd.block).unwrap();
        let pi = gd.perm_character(&ev);
        let m = gd.table.decompose(&pi);
        let span = intertwiner_span(&cat, &gd, &fr.module, &fr.module, (&pi, &pi), (&m, &m)).unwrap();
        // Pairs in F_2²: (0,0), (0,v), (v,0), (v,v) and independent (v,w).
        assert_eq!((span.orbits, span.burnside, span.mult_dot, span.span_rank), (5, 5, 5, 5));
        assert!(span.explicit_checked > 0);

        let (cat, gd) = gd_of(&fixtures::chain_instance(2, 2, &[0, 1]).unwrap());
        let fr = hom_functor(&cat, &[1]).unwrap();
        let ps = PairSpace::new(&cat, &fr.module, &fr.module, &gd.block).unwrap();
        let mut checked = 0;
        for h in subfunctors(&ps.sum).unwrap() {
            if ps.projections_onto(&h) {
                let a = ps.t_h(&h).unwrap();
                let b = ps.pushout_operator(&cat, &h).unwrap();
                assert!(a.same_matrix(&b));
                checked += 1;
            }
        }
        assert!(checked >= 3);
    }
}
