//! The LM graph of a context, the abelian normal subgroups `N_i ≅ M_{a_i×D_i}(E_i)`, their
//! dual characters `χ_A(B) = ψ(tr(AB))`, and the Clifford reductions that classify the
//! irreducibles which morph trivially.
//!
//! `θ` and `χ_A` are built for prime residue fields `E_i = F_p`; there `E_i`-coordinates of
//! LM morphisms are plain additive coordinates, and a context with a larger residue field is
//! rejected with a precondition error.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::algebra::{build_tilde_ring, hom_r, lm_morphisms, rm_morphisms, Context, MaximalSpace};
use crate::error::{Error, Result};
use crate::groups::{dixon_char_table_mod, enumerate_aut, induce, invmod, restrict, Classes};
use crate::linalg::{hom_group, solve, GrpMap, PGroup, SpanBasis};
use crate::strat::{rank_mod, GroupData};

/// `d[i][j] = dim_{E_i} LM(M_j, M_i)` edges `j → i`.
#[derive(Clone, Debug, Serialize)]
pub struct LMGraph {
    pub n: usize,
    pub d: Vec<Vec<u32>>,
    #[serde(skip)]
    pub lm: Vec<Vec<MaximalSpace>>,
}

impl LMGraph {
    pub fn new(ctx: &Context) -> Self {
        let n = ctx.len();
        let lm: Vec<Vec<MaximalSpace>> = (0..n).map(|j| (0..n).map(|i| lm_morphisms(ctx, j, i)).collect()).collect();
        let d = (0..n).map(|i| (0..n).map(|j| lm[j][i].dim).collect()).collect();
        LMGraph { n, d, lm }
    }

    /// Edge multiset as `(source, target)` pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                out.extend(std::iter::repeat_n((j, i), self.d[i][j] as usize));
            }
        }
        out
    }

    pub fn out_degree(&self, v: usize) -> u32 {
        (0..self.n).map(|i| self.d[i][v]).sum()
    }

    pub fn in_degree(&self, v: usize) -> u32 {
        self.d[v].iter().sum()
    }

    /// `D_i = Σ_j a_j d_{i,j} = dim_{E_i} LM(M, M_i)`.
    pub fn big_d(&self, i: usize, mults: &[usize]) -> usize {
        (0..self.n).map(|j| mults[j] * self.d[i][j] as usize).sum()
    }

    /// `D_i ≤ a_i` at every vertex; necessary for any trivially morphing irreducible.
    pub fn valency_holds(&self, mults: &[usize]) -> bool {
        (0..self.n).all(|i| self.big_d(i, mults) <= mults[i])
    }

    /// Components as cycles `i_0 → i_1 → ⋯`, when every vertex has exactly one incoming and
    /// one outgoing edge.
    pub fn circles(&self) -> Option<Vec<Vec<usize>>> {
        if (0..self.n).any(|v| self.out_degree(v) != 1 || self.in_degree(v) != 1) {
            return None;
        }
        let succ = |v: usize| (0..self.n).find(|&i| self.d[i][v] == 1).unwrap();
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut v = succ(start);
            while v != start {
                seen[v] = true;
                cyc.push(v);
                v = succ(v);
            }
            out.push(cyc);
        }
        Some(out)
    }

    pub fn lm_equals_rm(&self, ctx: &Context) -> bool {
        (0..self.n).all(|j| {
            (0..self.n).all(|i| {
                let rm = rm_morphisms(ctx, j, i).span;
                let lm = &self.lm[j][i].span;
                rm.is_subset(lm) && lm.is_subset(&rm)
            })
        })
    }

    /// Basis maps `f^i_{j,1..d}: M_j → M_i` of `LM(M_j, M_i)`.
    pub fn basis(&self, ctx: &Context, j: usize, i: usize) -> Vec<GrpMap> {
        self.lm[j][i].span.rows.iter().map(|r| ctx.homs[j][i].map(r)).collect()
    }

    /// Plain-text adjacency table, rows = targets, columns = sources.
    pub fn adjacency_table(&self) -> String {
        let mut s = String::from("target\\source");
        for j in 0..self.n {
            let _ = write!(s, " {:>3}", j + 1);
        }
        s.push('\n');
        for i in 0..self.n {
            let _ = write!(s, "{:>13}", i + 1);
            for j in 0..self.n {
                let _ = write!(s, " {:>3}", self.d[i][j]);
            }
            s.push('\n');
        }
        s
    }
}

fn require_prime_fields(ctx: &Context) -> Result<()> {
    if ctx.local.iter().any(|l| l.residue_degree != 1) {
        return Err(Error::Precondition("N_i coordinates are implemented for prime residue fields only".into()));
    }
    Ok(())
}

/// `E`-coordinates of `f ∈ LM(M_j, M_i)` in the chosen basis.
fn lm_coords(ctx: &Context, graph: &LMGraph, j: usize, i: usize, f: &GrpMap) -> Result<Vec<u64>> {
    let hom = &ctx.homs[j][i];
    let rows = &graph.lm[j][i].span.rows;
    let c = hom.coords(f).ok_or_else(|| Error::TheoremViolation("component is not R-linear".into()))?;
    if rows.is_empty() {
        return if hom.space.is_zero(&c) {
            Ok(Vec::new())
        } else {
            Err(Error::TheoremViolation(format!("non-zero map M_{} → M_{} outside LM", j + 1, i + 1)))
        };
    }
    let dom = PGroup::free(hom.space.p, 1, rows.len());
    let basis = GrpMap::from_images(dom, hom.space.clone(), rows)?;
    solve(&basis, &c).ok_or_else(|| Error::TheoremViolation(format!("map M_{} → M_{} outside LM", j + 1, i + 1)))
}

/// `N_i = {1 + Σ g f : f ∈ LM(M, M_i)}` with `θ: N_i ≅ M_{a_i×D_i}(E_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct NiSubgroup {
    pub vertex: usize,
    pub p: u64,
    pub a: usize,
    pub d: usize,
    /// `θ`-columns `(j, copy, basis index)`: basis map `f^i_{j,k}` on that copy of `M_j`.
    pub columns: Vec<(usize, usize, usize)>,
    /// `elems[t]` is the group element whose `θ`-matrix has base-`p` digits `t` (row-major).
    pub elems: Vec<usize>,
    #[serde(skip)]
    lookup: HashMap<usize, usize>,
    pub normal: bool,
    /// `θ(uv) = θ(u) + θ(v)` on all pairs; implies abelian.
    pub theta_hom: bool,
}

impl NiSubgroup {
    pub fn new(ctx: &Context, gd: &GroupData, graph: &LMGraph, i: usize) -> Result<Self> {
        require_prime_fields(ctx)?;
        let bm = &gd.block;
        let p = bm.module.ring.p();
        let a = bm.mults[i];
        let mut columns = Vec::new();
        let mut maps = Vec::new();
        for j in 0..graph.n {
            let basis = graph.basis(ctx, j, i);
            for c in 0..bm.mults[j] {
                for (k, f) in basis.iter().enumerate() {
                    columns.push((j, c, k));
                    maps.push(f.compose(&bm.projection(j, c)));
                }
            }
        }
        let d = columns.len();
        let size = (p as u128).pow((a * d) as u32);
        crate::caps::check("N_i", size, crate::caps::group_order())?;
        let id = GrpMap::identity(&bm.module.add);
        let mut elems = Vec::with_capacity(size as usize);
        for t in 0..size as usize {
            let mut x = id.clone();
            let mut rest = t;
            for r in 0..a {
                for f in &maps {
                    let digit = (rest % p as usize) as u64;
                    rest /= p as usize;
                    if digit != 0 {
                        x = x.add(&bm.inclusion(i, r).compose(f).scale(digit));
                    }
                }
            }
            let g = gd
                .group
                .index_of_map(&x)
                .ok_or_else(|| Error::TheoremViolation(format!("1 + θ^-1({t}) is not an automorphism")))?;
            elems.push(g);
        }
        let lookup: HashMap<usize, usize> = elems.iter().enumerate().map(|(t, &g)| (g, t)).collect();
        if lookup.len() != elems.len() {
            return Err(Error::TheoremViolation(format!("θ is not injective at vertex {}", i + 1)));
        }
        let mut ni = NiSubgroup { vertex: i, p, a, d, columns, elems, lookup, normal: false, theta_hom: false };
        ni.normal = gd.group.is_normal(&ni.elems);
        ni.theta_hom = (0..ni.order()).all(|u| {
            (0..ni.order()).all(|v| {
                let w = gd.group.mul(ni.elems[u], ni.elems[v]);
                ni.lookup.get(&w) == Some(&ni.add(u, v))
            })
        });
        Ok(ni)
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    /// `θ`-matrix (`a × D`) of index `t`.
    pub fn matrix(&self, t: usize) -> Vec<Vec<u64>> {
        let p = self.p as usize;
        let mut rest = t;
        (0..self.a)
            .map(|_| {
                (0..self.d)
                    .map(|_| {
                        let v = (rest % p) as u64;
                        rest /= p;
                        v
                    })
                    .collect()
            })
            .collect()
    }

    pub fn index(&self, b: &[Vec<u64>]) -> usize {
        let p = self.p as usize;
        b.iter().flatten().rev().fold(0, |acc, &v| acc * p + v as usize)
    }

    fn add(&self, u: usize, v: usize) -> usize {
        let (mu, mv) = (self.matrix(u), self.matrix(v));
        let sum: Vec<Vec<u64>> =
            mu.iter().zip(&mv).map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a + b) % self.p).collect()).collect();
        self.index(&sum)
    }

    pub fn theta(&self, g: usize) -> Option<usize> {
        self.lookup.get(&g).copied()
    }

    /// `tr(A B) mod p` for `A: D × a`, `B = θ(elems[t])`.
    pub fn pairing(&self, a_mat: &[Vec<u64>], t: usize) -> u64 {
        let b = self.matrix(t);
        let mut s = 0;
        for x in 0..self.d {
            for r in 0..self.a {
                s += a_mat[x][r] * b[r][x];
            }
        }
        s % self.p
    }

    /// `θ`-indices of the elementary matrices, which generate `N_i`.
    fn generators(&self) -> Vec<usize> {
        (0..self.a * self.d).map(|k| (self.p as usize).pow(k as u32)).collect()
    }

    /// Membership mask of `Stab_G(χ_A)`.
    pub fn stabilizer(&self, gd: &GroupData, a_mat: &[Vec<u64>]) -> Vec<bool> {
        let gens = self.generators();
        (0..gd.group.order())
            .map(|g| {
                let gi = gd.group.inv(g);
                gens.iter().all(|&t| {
                    let c = gd.group.mul(gd.group.mul(gi, self.elems[t]), g);
                    self.theta(c).is_some_and(|u| self.pairing(a_mat, u) == self.pairing(a_mat, t))
                })
            })
            .collect()
    }
}

fn all_matrices(p: u64, rows: usize, cols: usize) -> impl Iterator<Item = Vec<Vec<u64>>> {
    let total = (p as usize).pow((rows * cols) as u32);
    (0..total).map(move |mut t| {
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let v = (t % p as usize) as u64;
                        t /= p as usize;
                        v
                    })
                    .collect()
            })
            .collect()
    })
}

/// A linear character `χ_A` of `N_i`, `A ∈ M_{D_i×a_i}(E_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCharacter {
    pub a: Vec<Vec<u64>>,
    pub rank: usize,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NiRestriction {
    pub vertex: usize,
    pub d: usize,
    pub constituents: Vec<DualCharacter>,
    /// Some constituent has rank `< D_i`.
    pub degenerate: bool,
}

/// `⟨Res_{N_i} V, χ_A⟩` for every `A`; `ψ(x) = ζ_p^x` with the table's primitive `p`-th root.
pub fn restrict_to_ni(gd: &GroupData, ni: &NiSubgroup, chi: &[u64]) -> NiRestriction {
    let l = gd.ell();
    let zeta = gd.table.zeta_p;
    let zpow: Vec<u64> = (0..ni.p).map(|e| crate::groups::powmod(zeta, (ni.p - e) % ni.p, l)).collect();
    let vals: Vec<u64> = ni.elems.iter().map(|&g| chi[gd.classes.of(g)]).collect();
    let inv_n = invmod(ni.order() as u64 % l, l);
    let mut constituents = Vec::new();
    for a_mat in all_matrices(ni.p, ni.d, ni.a) {
        let s = (0..ni.order()).fold(0u64, |acc, t| (acc + vals[t] * zpow[ni.pairing(&a_mat, t) as usize]) % l);
        let m = s * inv_n % l;
        if m != 0 {
            let rank = rank_mod(a_mat.clone(), ni.p);
            constituents.push(DualCharacter { a: a_mat, rank, multiplicity: m });
        }
    }
    let degenerate = constituents.iter().any(|c| c.rank < ni.d);
    NiRestriction { vertex: ni.vertex, d: ni.d, constituents, degenerate }
}

/// The degenerate-case witness: `0 ≠ f ∈ LM(M, M_i)` with `fA = 0`, the quotient
/// `F = Hom(M,−)/f^*Hom(M_i,−)`, and `V^H ≠ 0` for `H = Stab(q(Id_M)) = 1 + Hom(M_i,M) f`.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyWitness {
    pub vertex: usize,
    pub a: Vec<Vec<u64>>,
    pub f: Vec<u64>,
    pub hom_order: u128,
    pub quotient_order: u128,
    pub stabilizer_order: usize,
    pub stabilizer_is_one_plus_gf: bool,
    pub fixed_dim: i64,
    /// Filled by the caller from the trivial-morphing test: associated functor `≺ Hom(M,−)`.
    pub strictly_below_hom: Option<bool>,
}

impl DegeneracyWitness {
    pub fn holds(&self) -> bool {
        self.quotient_order < self.hom_order
            && self.stabilizer_is_one_plus_gf
            && self.fixed_dim > 0
            && self.strictly_below_hom != Some(false)
    }
}

pub fn degeneracy_reduction(
    ctx: &Context,
    gd: &GroupData,
    ni: &NiSubgroup,
    restriction: &NiRestriction,
    chi: &[u64],
) -> Result<DegeneracyWitness> {
    let a_mat = restriction
        .constituents
        .iter()
        .find(|c| c.rank < ni.d)
        .map(|c| c.a.clone())
        .ok_or_else(|| Error::Precondition(format!("irreducible is not degenerate at vertex {}", ni.vertex + 1)))?;
    let p = ni.p;
    let f = all_matrices(p, 1, ni.d)
        .map(|m| m.into_iter().next().unwrap())
        .find(|f| {
            f.iter().any(|&x| x != 0) && (0..ni.a).all(|r| (0..ni.d).map(|x| f[x] * a_mat[x][r]).sum::<u64>() % p == 0)
        })
        .ok_or_else(|| Error::TheoremViolation("rank-deficient matrix without left kernel".into()))?;
    let bm = &gd.block;
    let i = ni.vertex;
    let m = &bm.module;
    // f as a map M → M_i.
    let mut fmap = GrpMap::zero(&m.add, &bm.parts[i].add);
    for (x, &(j, c, k)) in ni.columns.iter().enumerate() {
        if f[x] != 0 {
            let basis = &ctx.homs[j][i].map(&ctx_lm_row(ctx, j, i, k)?);
            fmap = fmap.add(&basis.compose(&bm.projection(j, c)).scale(f[x]));
        }
    }
    let hg = hom_group(&m.add, &m.add)?;
    let mut gens = Vec::new();
    for (k, c) in bm.copies() {
        for g in ctx.homs[i][k].basis() {
            gens.push(hg.from_map(&bm.inclusion(k, c).compose(&g).compose(&fmap)));
        }
    }
    let image = SpanBasis::from_gens(&hg.group, &gens)?;
    let id = GrpMap::identity(&m.add);
    let stab: Vec<usize> =
        (0..gd.group.order()).filter(|&h| image.contains(&hg.from_map(&gd.group.mat(h).sub(&id)))).collect();
    let mut counts = vec![0u64; gd.classes.len()];
    for &h in &stab {
        counts[gd.classes.of(h)] += 1;
    }
    let hom_order = hom_r(m, m)?.order();
    Ok(DegeneracyWitness {
        vertex: i,
        a: a_mat,
        f,
        hom_order,
        quotient_order: hom_order / image.order(),
        stabilizer_order: stab.len(),
        stabilizer_is_one_plus_gf: stab.len() as u128 == image.order(),
        fixed_dim: gd.fixed_dim(&counts, chi),
        strictly_below_hom: None,
    })
}

fn ctx_lm_row(ctx: &Context, j: usize, i: usize, k: usize) -> Result<Vec<u64>> {
    lm_morphisms(ctx, j, i)
        .span
        .rows
        .get(k)
        .cloned()
        .ok_or_else(|| Error::Invalid(format!("LM basis index {k} out of range")))
}

/// Clifford correspondence data: `V = Ind_S^G W` with `χ ⊆ Res_N W`.
#[derive(Clone, Debug, Serialize)]
pub struct CliffordCheck {
    pub stabilizer_order: usize,
    pub index: usize,
    pub dim_v: u64,
    pub dim_w: u64,
    pub induced_matches: bool,
}

impl CliffordCheck {
    pub fn holds(&self) -> bool {
        self.induced_matches && self.dim_v == self.index as u64 * self.dim_w
    }
}

/// `n_elems` lists `N ⊆ S` with the `ψ`-exponent of the character at each element.
fn clifford_check(
    gd: &GroupData,
    stab: &[bool],
    n_elems: &[(usize, u64)],
    p: u64,
    chi: &[u64],
) -> Result<CliffordCheck> {
    let (sub, emb) = gd.group.subgroup(|g| stab[g])?;
    let cl = Classes::new(&sub);
    let ct = dixon_char_table_mod(&sub, &cl, gd.ell())?;
    let pos: HashMap<usize, usize> = emb.iter().enumerate().map(|(s, &g)| (g, s)).collect();
    let res = restrict(&gd.classes, &cl, &emb, chi);
    let l = gd.ell();
    let zeta = gd.table.zeta_p;
    let inv_n = invmod(n_elems.len() as u64 % l, l);
    let w = (0..ct.len())
        .find(|&w| {
            if ct.inner(&res, &ct.values[w]) == 0 {
                return false;
            }
            let s = n_elems.iter().fold(0u64, |acc, &(g, e)| {
                let v = ct.values[w][cl.of(pos[&g])];
                (acc + v * crate::groups::powmod(zeta, (p - e) % p, l)) % l
            });
            !(s * inv_n).is_multiple_of(l)
        })
        .ok_or_else(|| Error::TheoremViolation("no constituent of the restriction lies over the character".into()))?;
    let ind = induce(&gd.table, &sub, &cl, &emb, &ct.values[w]);
    let dim_v = gd.table.lift(chi[0]) as u64;
    Ok(CliffordCheck {
        stabilizer_order: sub.order(),
        index: gd.group.order() / sub.order(),
        dim_v,
        dim_w: ct.degrees[w],
        induced_matches: ind == chi,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum NoOutgoingKind {
    /// `D_i = 0`: `Aut_R(M) = GL_{a_i}(E_i) × Aut_R(M')`; vacuous when `M' = 0`.
    Split { vacuous: bool, block_diagonal: bool },
    /// `V` induced from `Stab(χ_A) = N_i ⋊ Aut_R(M_i^{a_i−D_i} ⊕ M')`, `A = [0 | I_D]`.
    Induced {
        normal_form_present: bool,
        reduced_mults: Vec<usize>,
        reduced_aut_order: usize,
        /// `(B, C, H) ↦ [[B, C], [0, Φ(H)]] ⊕ H` is an injective homomorphism into the stabilizer.
        embedding_ok: bool,
        clifford: CliffordCheck,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct NoOutgoing {
    pub vertex: usize,
    pub a: usize,
    pub d: usize,
    /// `Hom(M_i, M_j) = 0` for `j ≠ i` and `End(M_i) = E_i`.
    pub isolated_source: bool,
    pub kind: NoOutgoingKind,
}

impl NoOutgoing {
    pub fn holds(&self) -> bool {
        self.isolated_source
            && match &self.kind {
                NoOutgoingKind::Split { block_diagonal, .. } => *block_diagonal,
                NoOutgoingKind::Induced { normal_form_present, embedding_ok, clifford, .. } => {
                    *normal_form_present && *embedding_ok && clifford.holds()
                }
            }
    }
}

pub fn no_outgoing_reduction(
    ctx: &Context,
    gd: &GroupData,
    graph: &LMGraph,
    ni: &NiSubgroup,
    chi: &[u64],
) -> Result<NoOutgoing> {
    let i = ni.vertex;
    if graph.out_degree(i) != 0 {
        return Err(Error::Precondition(format!("vertex {} has outgoing edges", i + 1)));
    }
    let bm = &gd.block;
    let isolated_source = (0..graph.n).all(|j| j == i || ctx.homs[i][j].order() == 1) && ctx.local[i].radical.is_zero();
    let (a, d) = (ni.a, ni.d);
    let others: Vec<usize> = (0..graph.n).filter(|&j| j != i).collect();
    if d == 0 {
        let block_diagonal = (0..gd.group.order()).all(|g| {
            let x = gd.group.mat(g);
            (0..a).all(|r| {
                others.iter().all(|&j| {
                    (0..bm.mults[j])
                        .all(|c| bm.component(&x, i, r, j, c).is_zero() && bm.component(&x, j, c, i, r).is_zero())
                })
            })
        });
        let vacuous = others.iter().all(|&j| bm.mults[j] == 0);
        return Ok(NoOutgoing {
            vertex: i,
            a,
            d,
            isolated_source,
            kind: NoOutgoingKind::Split { vacuous, block_diagonal },
        });
    }
    let restriction = restrict_to_ni(gd, ni, chi);
    if restriction.degenerate {
        return Err(Error::Precondition(format!(
            "irreducible is degenerate at vertex {}; use the degeneracy reduction",
            i + 1
        )));
    }
    let a0: Vec<Vec<u64>> = (0..d).map(|x| (0..a).map(|r| u64::from(r == a - d + x)).collect()).collect();
    let normal_form_present = restriction.constituents.iter().any(|c| c.a == a0);
    let stab = ni.stabilizer(gd, &a0);

    // Aut(M'') for M'' = M_i^{a-D} ⊕ M', embedded through Φ.
    let mut reduced_mults = bm.mults.clone();
    reduced_mults[i] = a - d;
    let small = crate::algebra::BlockModule::new(bm.parts.clone(), reduced_mults.clone())?;
    let aut_small = enumerate_aut(&small.module)?;
    let e = |j: usize, c: usize, k: usize| -> Result<GrpMap> {
        Ok(ctx.homs[j][i].map(&ctx_lm_row(ctx, j, i, k)?).compose(&small.projection(j, c)))
    };
    // Φ(H)[x][y]: y-coordinate of e_x ∘ H, over the θ-columns (all sources are in M').
    let coords_of = |u: &GrpMap| -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(d);
        for &(j, c, _) in &ni.columns {
            let comp = u.compose(&small.inclusion(j, c));
            let v = lm_coords(ctx, graph, j, i, &comp)?;
            out.push((j, c, v));
        }
        // Flatten in column order: each (j, c) contributes d_{i,j} coordinates once.
        let mut flat = Vec::with_capacity(d);
        let mut seen = HashSet::new();
        for (j, c, v) in out {
            if seen.insert((j, c)) {
                flat.extend(v);
            }
        }
        Ok(flat)
    };
    let idp = GrpMap::identity(&bm.parts[i].add);
    let embed = |h: usize| -> Result<Option<usize>> {
        let hm = aut_small.mat(h);
        let mut g = bm.assemble(|ti, tc, si, sc| image_component(bm, &small, &hm, i, a - d, ti, tc, si, sc));
        // C: the M'-part of the first a − D rows of M_i, in E-coordinates on the last D copies.
        for s in 0..a - d {
            let mut row = GrpMap::zero(&small.module.add, &bm.parts[i].add);
            for (j, c) in small.copies().into_iter().filter(|&(j, _)| j != i) {
                row = row.add(&small.component(&hm, i, s, j, c).compose(&small.projection(j, c)));
            }
            for (x, &v) in coords_of(&row)?.iter().enumerate() {
                if v != 0 {
                    g = g.add(&bm.inclusion(i, s).compose(&idp.scale(v)).compose(&bm.projection(i, a - d + x)));
                }
            }
        }
        // Φ(H) on the last D copies.
        let mut hprime = GrpMap::zero(&small.module.add, &small.module.add);
        for (tj, tc) in small.copies().into_iter().filter(|&(j, _)| j != i) {
            for (sj, sc) in small.copies().into_iter().filter(|&(j, _)| j != i) {
                let comp = small.component(&hm, tj, tc, sj, sc);
                hprime = hprime.add(&small.inclusion(tj, tc).compose(&comp).compose(&small.projection(sj, sc)));
            }
        }
        for x in 0..d {
            let (j, c, k) = ni.columns[x];
            for (y, &v) in coords_of(&e(j, c, k)?.compose(&hprime))?.iter().enumerate() {
                if v != 0 {
                    g = g.add(&bm.inclusion(i, a - d + x).compose(&idp.scale(v)).compose(&bm.projection(i, a - d + y)));
                }
            }
        }
        Ok(gd.group.index_of_map(&g))
    };
    let mut images = Vec::with_capacity(aut_small.order());
    for h in 0..aut_small.order() {
        images.push(embed(h)?);
    }
    let mut embedding_ok = images.iter().all(|x| x.is_some_and(|g| stab[g]));
    if embedding_ok {
        let img: Vec<usize> = images.iter().map(|x| x.unwrap()).collect();
        embedding_ok = img.iter().collect::<HashSet<_>>().len() == img.len()
            && (0..aut_small.order())
                .all(|h| aut_small.gens.iter().all(|&s| img[aut_small.mul(h, s)] == gd.group.mul(img[h], img[s])));
    }
    let stab_order = stab.iter().filter(|&&b| b).count();
    embedding_ok &= stab_order == ni.order() * aut_small.order();
    let n_elems: Vec<(usize, u64)> = (0..ni.order()).map(|t| (ni.elems[t], ni.pairing(&a0, t))).collect();
    let clifford = clifford_check(gd, &stab, &n_elems, ni.p, chi)?;
    Ok(NoOutgoing {
        vertex: i,
        a,
        d,
        isolated_source,
        kind: NoOutgoingKind::Induced {
            normal_form_present,
            reduced_mults,
            reduced_aut_order: aut_small.order(),
            embedding_ok,
            clifford,
        },
    })
}

/// Component `(ti, tc) ← (si, sc)` of the image of `h ∈ Aut(M'')` outside the `M_i`-rows
/// that carry `C` and `Φ(H)`: `B` on the first `kept = a − D` copies of `M_i`, `H` on `M'`.
#[allow(clippy::too_many_arguments)]
fn image_component(
    bm: &crate::algebra::BlockModule,
    small: &crate::algebra::BlockModule,
    hm: &GrpMap,
    i: usize,
    kept: usize,
    ti: usize,
    tc: usize,
    si: usize,
    sc: usize,
) -> GrpMap {
    let zero = GrpMap::zero(&bm.parts[si].add, &bm.parts[ti].add);
    match (ti == i, si == i) {
        (true, true) if tc < kept && sc < kept => small.component(hm, i, tc, i, sc),
        (false, false) => small.component(hm, ti, tc, si, sc),
        _ => zero,
    }
}

/// Reduction along a cycle `i_0 → ⋯ → i_{k−1} → i_0`, `k > 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CycleReduction {
    pub cycle: Vec<usize>,
    pub a: usize,
    /// `|E_{i_t}|` along the cycle; equal by the field-chain injections.
    pub residue_orders: Vec<u128>,
    pub commutant_order: usize,
    pub tilde_aut_order: usize,
    /// `Stab(χ_{(I,…,I)}) = Aut_{R̃}(M̃)` as subsets of `Aut_R(M)`.
    pub stabilizer_equals_commutant: bool,
    pub normal_form_present: bool,
    /// `[G : Stab] > 1`; fails when every `GL_a(E)` is trivial (`a = 1`, `E = F_2`).
    pub proper: bool,
    pub clifford: CliffordCheck,
}

impl CycleReduction {
    pub fn holds(&self) -> bool {
        self.residue_orders.windows(2).all(|w| w[0] == w[1])
            && self.commutant_order == self.tilde_aut_order
            && self.stabilizer_equals_commutant
            && self.normal_form_present
            && self.clifford.holds()
    }
}

pub fn cycle_reduction(
    ctx: &Context,
    gd: &GroupData,
    graph: &LMGraph,
    nis: &[NiSubgroup],
    cycle: &[usize],
    chi: &[u64],
) -> Result<CycleReduction> {
    let k = cycle.len();
    if k < 2 {
        return Err(Error::Precondition("cycle reduction needs a cycle of length > 1".into()));
    }
    let circles = graph.circles().ok_or_else(|| Error::Precondition("LM graph is not a union of circles".into()))?;
    let rotated = |c: &Vec<usize>| c.len() == k && (0..k).any(|s| (0..k).all(|t| c[(s + t) % k] == cycle[t]));
    if !circles.iter().any(rotated) {
        return Err(Error::Precondition("not a component of the LM graph".into()));
    }
    let bm = &gd.block;
    let a = bm.mults[cycle[0]];
    if cycle.iter().any(|&v| bm.mults[v] != a) {
        return Err(Error::Precondition("multiplicities differ along the cycle".into()));
    }
    let maps: Vec<GrpMap> = (0..k - 1).map(|t| graph.basis(ctx, cycle[t], cycle[t + 1])[0].clone()).collect();
    let (_, mt, x) = build_tilde_ring(bm, cycle, &maps)?;
    let commutant: Vec<bool> = (0..gd.group.order())
        .map(|g| {
            let m = gd.group.mat(g);
            m.compose(&x) == x.compose(&m)
        })
        .collect();
    let tilde = enumerate_aut(&mt)?;
    let tilde_in_commutant =
        (0..tilde.order()).all(|h| gd.group.index_of_map(&tilde.mat(h)).is_some_and(|g| commutant[g]));
    let commutant_order = commutant.iter().filter(|&&b| b).count();

    // N = N_{i_1} ⋯ N_{i_{k−1}} with the character (I, …, I).
    let ident: Vec<Vec<u64>> = (0..a).map(|x| (0..a).map(|r| u64::from(x == r)).collect()).collect();
    let parts: Vec<&NiSubgroup> = cycle[1..].iter().map(|&v| &nis[v]).collect();
    let mut stab = vec![true; gd.group.order()];
    for ni in &parts {
        if ni.d != a {
            return Err(Error::TheoremViolation(format!("D_{} ≠ a on a circle", ni.vertex + 1)));
        }
        for (s, b) in stab.iter_mut().zip(ni.stabilizer(gd, &ident)) {
            *s &= b;
        }
    }
    let mut n_elems: Vec<(usize, u64)> = vec![(gd.group.identity, 0)];
    for ni in &parts {
        let mut next = Vec::with_capacity(n_elems.len() * ni.order());
        for &(g, e) in &n_elems {
            for t in 0..ni.order() {
                next.push((gd.group.mul(g, ni.elems[t]), (e + ni.pairing(&ident, t)) % ni.p));
            }
        }
        n_elems = next;
    }
    let l = gd.ell();
    let p = parts[0].p;
    let zeta = gd.table.zeta_p;
    let s = n_elems
        .iter()
        .fold(0u64, |acc, &(g, e)| (acc + chi[gd.classes.of(g)] * crate::groups::powmod(zeta, (p - e) % p, l)) % l);
    let normal_form_present = s != 0;
    let clifford = clifford_check(gd, &stab, &n_elems, p, chi)?;
    Ok(CycleReduction {
        cycle: cycle.to_vec(),
        a,
        residue_orders: cycle.iter().map(|&v| ctx.local[v].residue_order()).collect(),
        commutant_order,
        tilde_aut_order: tilde.order(),
        stabilizer_equals_commutant: tilde_in_commutant && stab == commutant,
        normal_form_present,
        proper: clifford.index > 1,
        clifford,
    })
}

/// Outcome of the classification of one irreducible.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "case")]
pub enum TheoremD {
    NonTrivialMorphing { degeneracy: Option<DegeneracyWitness> },
    Split(NoOutgoing),
    InducedReduction(NoOutgoing),
    CycleInduction(CycleReduction),
    SingletonSelfLoops { loops: Vec<usize>, lm_equals_rm: bool },
}

impl TheoremD {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremD::NonTrivialMorphing { .. } => "non-trivial-morphing",
            TheoremD::Split(n) if matches!(n.kind, NoOutgoingKind::Split { vacuous: true, .. }) => "vacuous-split",
            TheoremD::Split(_) => "split",
            TheoremD::InducedReduction(_) => "induced-reduction",
            TheoremD::CycleInduction(_) => "cycle-induction",
            TheoremD::SingletonSelfLoops { .. } => "singleton-self-loops",
        }
    }

    /// The attached certificate checks out.
    pub fn certified(&self) -> bool {
        match self {
            TheoremD::NonTrivialMorphing { degeneracy } => degeneracy.as_ref().is_none_or(|w| w.holds()),
            TheoremD::Split(n) | TheoremD::InducedReduction(n) => n.holds(),
            TheoremD::CycleInduction(c) => c.holds(),
            TheoremD::SingletonSelfLoops { lm_equals_rm, .. } => *lm_equals_rm,
        }
    }
}

/// Graph and `N_i` for one `M`, shared by all irreducibles.
#[derive(Clone, Debug)]
pub struct LmAnalysis {
    pub graph: LMGraph,
    pub nis: Vec<NiSubgroup>,
}

impl LmAnalysis {
    pub fn new(ctx: &Context, gd: &GroupData) -> Result<Self> {
        let graph = LMGraph::new(ctx);
        let nis = (0..graph.n).map(|i| NiSubgroup::new(ctx, gd, &graph, i)).collect::<Result<Vec<_>>>()?;
        Ok(LmAnalysis { graph, nis })
    }

    /// `N_i` is normal, and `θ` is an isomorphism onto the additive matrix group.
    pub fn subgroups_ok(&self) -> bool {
        self.nis.iter().all(|n| n.normal && n.theta_hom)
    }

    /// First degeneracy witness of irreducible `v`, if any.
    pub fn degeneracy(&self, ctx: &Context, gd: &GroupData, v: usize) -> Result<Option<DegeneracyWitness>> {
        let chi = &gd.table.values[v];
        for ni in self.nis.iter().filter(|n| n.d > 0) {
            let res = restrict_to_ni(gd, ni, chi);
            if res.degenerate {
                return degeneracy_reduction(ctx, gd, ni, &res, chi).map(Some);
            }
        }
        Ok(None)
    }

    /// Classifies irreducible `v`; `trivial` lists the irreducibles that morph trivially.
    pub fn classify(&self, ctx: &Context, gd: &GroupData, v: usize, trivial: &[usize]) -> Result<TheoremD> {
        let chi = &gd.table.values[v];
        let is_trivial = trivial.contains(&v);
        if !is_trivial {
            let mut degeneracy = self.degeneracy(ctx, gd, v)?;
            if let Some(w) = degeneracy.as_mut() {
                w.strictly_below_hom = Some(true);
            }
            return Ok(TheoremD::NonTrivialMorphing { degeneracy });
        }
        let mults = &gd.block.mults;
        if !self.graph.valency_holds(mults) {
            return Err(Error::TheoremViolation("trivially morphing irreducible violates D_i ≤ a_i".into()));
        }
        if let Some(w) = self.degeneracy(ctx, gd, v)? {
            return Err(Error::TheoremViolation(format!(
                "trivially morphing irreducible is degenerate at vertex {}",
                w.vertex + 1
            )));
        }
        if let Some(i) = (0..self.graph.n).find(|&i| self.graph.out_degree(i) == 0) {
            let red = no_outgoing_reduction(ctx, gd, &self.graph, &self.nis[i], chi)?;
            return Ok(match red.kind {
                NoOutgoingKind::Split { .. } => TheoremD::Split(red),
                NoOutgoingKind::Induced { .. } => TheoremD::InducedReduction(red),
            });
        }
        let circles = self
            .graph
            .circles()
            .ok_or_else(|| Error::TheoremViolation("every vertex has an outgoing edge but Γ is not circles".into()))?;
        if circles.iter().any(|c| c.iter().any(|&x| mults[x] != mults[c[0]])) {
            return Err(Error::TheoremViolation("multiplicities vary along a circle".into()));
        }
        let lm_equals_rm = self.graph.lm_equals_rm(ctx);
        if !lm_equals_rm {
            return Err(Error::TheoremViolation("LM and RM graphs differ on circles".into()));
        }
        if let Some(c) = circles.iter().find(|c| c.len() > 1) {
            return Ok(TheoremD::CycleInduction(cycle_reduction(ctx, gd, &self.graph, &self.nis, c, chi)?));
        }
        Ok(TheoremD::SingletonSelfLoops { loops: circles.iter().map(|c| c[0]).collect(), lm_equals_rm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::RModule;
    use crate::fixtures::{self, three_module_context, three_module_ring};
    use crate::functors::Category;
    use crate::strat::trivially_morphing;

    struct Setup {
        inst: fixtures::Instance,
        gd: GroupData,
        lm: LmAnalysis,
        trivial: Vec<usize>,
    }

    fn setup(name: &str) -> Setup {
        let inst = fixtures::instance_by_name(name).unwrap();
        let cat = Category::new(inst.ctx.clone()).unwrap();
        let gd = GroupData::new(&inst.block().unwrap()).unwrap();
        let trivial = trivially_morphing(&cat, &gd).unwrap().irreducibles;
        let lm = LmAnalysis::new(&inst.ctx, &gd).unwrap();
        Setup { inst, gd, lm, trivial }
    }

    /// Canonical generators (image of `1`) of `R`, `R/(x)`, `R/(x,y)` in module coordinates.
    fn three_generators() -> [Vec<u64>; 3] {
        let r = three_module_ring(2).unwrap();
        let reg = RModule::regular(&r);
        let x = reg.generated(&[vec![0, 1, 0]]);
        let xy = reg.generated(&[vec![0, 1, 0], vec![0, 0, 1]]);
        let one = vec![1, 0, 0];
        [one.clone(), reg.quotient(&x).unwrap().1.proj.apply(&one), reg.quotient(&xy).unwrap().1.proj.apply(&one)]
    }

    /// Span of the named maps `φ^{ji}_a: 1 ↦ a` inside `Hom(M_j, M_i)`.
    fn named_span(ctx: &Context, gens: &[&Vec<u64>], j: usize, i: usize, elems: &[[u64; 3]]) -> SpanBasis {
        let hom = &ctx.homs[j][i];
        let coords: Vec<Vec<u64>> = elems
            .iter()
            .map(|a| {
                let target = ctx.modules[i].act(a, gens[i]);
                let c = hom.space.elements().unwrap().into_iter().find(|c| hom.map(c).apply(gens[j]) == target);
                c.expect("φ is well defined")
            })
            .collect();
        SpanBasis::from_gens(&hom.space, &coords).unwrap()
    }

    fn same(a: &SpanBasis, b: &SpanBasis) -> bool {
        a.is_subset(b) && b.is_subset(a)
    }

    const X: [u64; 3] = [0, 1, 0];
    const Y: [u64; 3] = [0, 0, 1];

    #[test]
    fn three_module_graph_matches_named_morphisms() {
        let g = three_generators();
        let ctx = three_module_context(2, &[0, 1, 2]).unwrap();
        let graph = LMGraph::new(&ctx);
        assert_eq!(graph.edges(), vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
        let gens = [&g[0], &g[1], &g[2]];
        let expected: [(usize, usize, &[[u64; 3]]); 6] =
            [(0, 0, &[X]), (0, 1, &[Y]), (1, 0, &[X]), (1, 1, &[Y]), (2, 0, &[X]), (2, 1, &[Y])];
        for (j, i, elems) in expected {
            assert!(same(&graph.lm[j][i].span, &named_span(&ctx, &gens, j, i, elems)), "LM(M_{}, M_{})", j + 1, i + 1);
        }
        // 1 ↦ y from M_3 survives the quotient M_1 → R/(x), so it is not left maximal.
        let y31 = named_span(&ctx, &gens, 2, 0, &[Y]);
        assert!(!y31.is_subset(&graph.lm[2][0].span));
        for (j, i) in [(0, 2), (1, 2), (2, 2)] {
            assert!(graph.lm[j][i].span.is_zero());
        }
    }

    #[test]
    fn two_module_subgraph_has_a_double_edge() {
        let g = three_generators();
        let ctx = three_module_context(2, &[0, 2]).unwrap();
        let graph = LMGraph::new(&ctx);
        assert_eq!(graph.edges(), vec![(0, 0), (0, 0), (1, 0), (1, 0)]);
        let gens = [&g[0], &g[2]];
        assert!(same(&graph.lm[0][0].span, &named_span(&ctx, &gens, 0, 0, &[X, Y])));
        assert!(same(&graph.lm[1][0].span, &named_span(&ctx, &gens, 1, 0, &[X, Y])));
        assert!(graph.lm[0][1].span.is_zero() && graph.lm[1][1].span.is_zero());
    }

    #[test]
    fn field_context_has_no_edges() {
        let s = setup("gl2-f2");
        assert!(s.lm.graph.edges().is_empty());
        assert_eq!(s.lm.nis[0].order(), 1);
        assert!(s.lm.graph.adjacency_table().contains("  0"));
    }

    #[test]
    fn ni_orders_and_theta() {
        // O_1 ⊕ O_2: LM(O_1, O_2) and LM(O_2, O_2) are both lines, so D_2 = 2.
        let s = setup("chain-p2-l2-11");
        assert_eq!((s.lm.nis[0].order(), s.lm.nis[1].order()), (1, 4));
        assert_eq!(s.lm.nis[1].d, 2);
        let s = setup("p11-f3");
        assert_eq!((s.lm.nis[0].order(), s.lm.nis[1].order()), (3, 1));
        for name in ["chain-p2-l2-11", "p11-f3", "cycle2-f3", "gl2-o2", "three-f2-111"] {
            let s = if name == "p11-f3" { s.clone_shallow() } else { setup(name) };
            assert!(s.lm.subgroups_ok(), "{name}");
            for ni in &s.lm.nis {
                assert_eq!(ni.order() as u128, (ni.p as u128).pow((ni.a * ni.d) as u32));
            }
        }
    }

    impl Setup {
        fn clone_shallow(&self) -> Setup {
            Setup { inst: self.inst.clone(), gd: self.gd.clone(), lm: self.lm.clone(), trivial: self.trivial.clone() }
        }
    }

    #[test]
    fn dual_characters_are_distinct_and_trivial_at_zero() {
        let s = setup("gl2-o2");
        let ni = &s.lm.nis[0];
        let regular: Vec<u64> = {
            let n = s.gd.group.order() as u64;
            (0..s.gd.classes.len()).map(|k| if k == 0 { n } else { 0 }).collect()
        };
        // The regular character restricts to |G|/|N| copies of every χ_A, each A once.
        let res = restrict_to_ni(&s.gd, ni, &regular);
        assert_eq!(res.constituents.len(), ni.order());
        assert!(res.constituents.iter().all(|c| c.multiplicity == (s.gd.group.order() / ni.order()) as u64));
        let triv = restrict_to_ni(&s.gd, ni, &s.gd.table.values[s.gd.table.trivial()]);
        assert_eq!(triv.constituents.len(), 1);
        assert!(triv.constituents[0].a.iter().flatten().all(|&v| v == 0));
        assert!(triv.degenerate);
    }

    #[test]
    fn quiver_restrictions_and_no_outgoing_vertex() {
        let s = setup("p11-f3");
        let ni = &s.lm.nis[0];
        assert_eq!(s.lm.graph.out_degree(0), 0);
        for v in 0..s.gd.table.len() {
            let chi = &s.gd.table.values[v];
            let res = restrict_to_ni(&s.gd, ni, chi);
            if s.gd.table.degrees[v] == 1 {
                assert!(res.constituents.iter().all(|c| c.rank == 0), "linear characters see A = 0");
                assert!(no_outgoing_reduction(&s.inst.ctx, &s.gd, &s.lm.graph, ni, chi).is_err());
            } else {
                assert!(res.constituents.iter().all(|c| c.rank == 1));
                let red = no_outgoing_reduction(&s.inst.ctx, &s.gd, &s.lm.graph, ni, chi).unwrap();
                assert!(red.holds());
                match red.kind {
                    NoOutgoingKind::Induced { clifford, reduced_aut_order, .. } => {
                        assert_eq!((clifford.stabilizer_order, clifford.index, clifford.dim_w), (6, 2, 1));
                        assert_eq!(reduced_aut_order, 2);
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }

    #[test]
    fn classifier_cases() {
        let s = setup("gl2-f2");
        let labels: Vec<&str> =
            (0..3).map(|v| s.lm.classify(&s.inst.ctx, &s.gd, v, &s.trivial).unwrap().label()).collect();
        let cusp = s.trivial[0];
        assert_eq!(s.gd.table.degrees[cusp], 1);
        assert_eq!(labels[cusp], "vacuous-split");
        assert_eq!(labels.iter().filter(|l| **l == "non-trivial-morphing").count(), 2);

        let s = setup("chain-p2-l2-01");
        let sign = s.trivial[0];
        let c = s.lm.classify(&s.inst.ctx, &s.gd, sign, &s.trivial).unwrap();
        assert_eq!(c.label(), "singleton-self-loops");

        let s = setup("p11-f3");
        assert!(s.trivial.is_empty());
        for v in 0..s.gd.table.len() {
            let c = s.lm.classify(&s.inst.ctx, &s.gd, v, &s.trivial).unwrap();
            assert_eq!(c.label(), "non-trivial-morphing");
            assert!(c.certified());
        }

        let s = setup("cycle2-f3");
        assert!(!s.trivial.is_empty());
        for &v in &s.trivial {
            let c = s.lm.classify(&s.inst.ctx, &s.gd, v, &s.trivial).unwrap();
            match &c {
                TheoremD::CycleInduction(r) => {
                    assert!(r.holds() && r.proper);
                    assert_eq!(r.commutant_order, r.tilde_aut_order);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn degeneracy_and_valency_hold_on_fixtures() {
        for name in
            ["gl2-f2", "chain-p2-l2-01", "chain-p2-l2-11", "p11-f2", "p11-f3", "cycle2-f2", "cycle2-f3", "gl2-o2"]
        {
            let s = setup(name);
            for v in 0..s.gd.table.len() {
                if let Some(w) = s.lm.degeneracy(&s.inst.ctx, &s.gd, v).unwrap() {
                    assert!(!s.trivial.contains(&v), "{name}: degenerate {v} morphs trivially");
                    assert!(w.quotient_order < w.hom_order && w.stabilizer_is_one_plus_gf && w.fixed_dim > 0);
                }
                let c = s.lm.classify(&s.inst.ctx, &s.gd, v, &s.trivial).unwrap();
                assert!(c.certified() || matches!(&c, TheoremD::CycleInduction(r) if !r.proper), "{name} {v}");
            }
            if !s.trivial.is_empty() {
                assert!(s.lm.graph.valency_holds(&s.gd.block.mults), "{name}");
                let all_out = (0..s.lm.graph.n).all(|i| s.lm.graph.out_degree(i) > 0);
                if all_out {
                    assert!(s.lm.graph.circles().is_some() && s.lm.graph.lm_equals_rm(&s.inst.ctx), "{name}");
                }
            }
        }
    }
}
