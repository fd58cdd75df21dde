//! Additive functors on `C = ⟨M_1,…,M_n⟩` as left modules over `R' = End_R(Σ)`, `Σ = ⊕ M_i`.
//!
//! A functor `F` is stored twice: as a presentation `Hom(Y,−) → Hom(X,−) → F → 0` given by an
//! `R`-map `f: X → Y`, and as the `R'`-module `Q = F(Σ)`, with `F(M_k) = e_k Q`. Lattice and
//! isomorphism questions run on `Q`; the presentation is kept in sync and evaluated as a check.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{
    decompose_indecomposable, end_algebra, hom_r, images_map, invert, is_isomorphic, jacobson_radical, BlockModule,
    Context, EndRing, FiniteAlgebra, RHom, RModule,
};
use crate::caps;
use crate::error::{invalid, mismatch, Error, Result};
use crate::groups::{enumerate_aut, FiniteGroup};
use crate::linalg::{image, kernel, quotient, solve, Elem, GrpMap, PGroup, Quotient, SpanBasis};

/// The context together with `R'`, its idempotents `e_i` and radical.
#[derive(Clone, Debug)]
pub struct Category {
    pub ctx: Context,
    pub sigma: BlockModule,
    pub end: EndRing,
    pub ring: Arc<FiniteAlgebra>,
    pub idem: Vec<Elem>,
    pub radical: SpanBasis,
    /// `rp[j][i][k]`: basis map `k` of `Hom(M_j, M_i)` as an element of `R'`.
    rp: Vec<Vec<Vec<Elem>>>,
}

impl Category {
    pub fn new(ctx: Context) -> Result<Arc<Self>> {
        let n = ctx.len();
        let sigma = ctx.block(&vec![1; n])?;
        let end = end_algebra(&sigma.module)?;
        let ring = Arc::new(end.alg.clone());
        let to_r = |i: usize, j: usize, f: &GrpMap| {
            end.from_map(&sigma.inclusion(i, 0).compose(f).compose(&sigma.projection(j, 0)))
                .expect("components of R-maps are R-maps")
        };
        let idem = (0..n).map(|i| to_r(i, i, &GrpMap::identity(&ctx.modules[i].add))).collect();
        let radical = jacobson_radical(&ring);
        let rp = (0..n)
            .map(|j| (0..n).map(|i| ctx.homs[j][i].basis().iter().map(|f| to_r(i, j, f)).collect()).collect())
            .collect();
        Ok(Arc::new(Category { ctx, sigma, end, ring, idem, radical, rp }))
    }

    pub fn len(&self) -> usize {
        self.ctx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ctx.is_empty()
    }

    /// `f: M_j → M_i` as the element `ι_i f π_j` of `R'`.
    pub fn to_rprime(&self, i: usize, j: usize, f: &GrpMap) -> Elem {
        let c = self.ctx.homs[j][i].coords(f).expect("map between context modules is R-linear");
        let mut out = self.ring.zero();
        for (k, &a) in c.iter().enumerate() {
            if a != 0 {
                out = self.ring.add.add(&out, &self.ring.add.scale(a, &self.rp[j][i][k]));
            }
        }
        out
    }

    /// `Hom_R(X, Σ)` as a left `R'`-module (post-composition).
    pub fn hom_module(&self, x: &BlockModule) -> Result<(RHom, RModule)> {
        let hx = hom_r(&x.module, &self.sigma.module)?;
        let action = (0..self.ring.dim())
            .map(|b| {
                let r = self.end.to_map(&self.ring.add.unit(b));
                let cols: Vec<Elem> = (0..hx.space.rank())
                    .map(|u| hx.coords(&r.compose(&hx.map(&hx.space.unit(u)))).expect("post-composition is R-linear"))
                    .collect();
                images_map(&hx.space, &hx.space, &cols)
            })
            .collect();
        let module = RModule::new(self.ring.clone(), hx.space.clone(), action)?;
        Ok((hx, module))
    }

    pub fn block(&self, mults: &[usize]) -> Result<BlockModule> {
        if mults.len() != self.len() {
            return Err(mismatch("one multiplicity per context module required"));
        }
        self.ctx.block(mults)
    }

    /// `e_i Q` as a subgroup of `Q`.
    pub fn part(&self, q: &RModule, i: usize) -> SpanBasis {
        image(&q.action_map(&self.idem[i]))
    }

    pub fn jq(&self, q: &RModule) -> SpanBasis {
        let gens: Vec<Elem> =
            self.radical.rows.iter().flat_map(|r| (0..q.add.rank()).map(|u| q.act(r, &q.add.unit(u)))).collect();
        SpanBasis::from_gens_unchecked(&q.add, &gens)
    }
}

/// Cheap isomorphism invariant of an `R'`-module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Fingerprint {
    /// Sorted exponents of `e_i Q`, per context module.
    pub parts: Vec<Vec<u32>>,
    /// Sorted exponents of `e_i JQ`.
    pub radical: Vec<Vec<u32>>,
}

fn sorted_exps(s: &SpanBasis) -> Vec<u32> {
    let mut e = s.structure().0.exps;
    e.sort_unstable();
    e
}

pub fn fingerprint(cat: &Category, q: &RModule) -> Fingerprint {
    let jq = cat.jq(q);
    let parts = (0..cat.len()).map(|i| sorted_exps(&cat.part(q, i))).collect();
    let radical = (0..cat.len()).map(|i| sorted_exps(&cat.part(q, i).intersect(&jq))).collect();
    Fingerprint { parts, radical }
}

/// Isomorphism of `R'`-modules, prefiltered by fingerprint.
pub fn iso_test(cat: &Category, a: &RModule, b: &RModule) -> Result<Option<GrpMap>> {
    if fingerprint(cat, a) != fingerprint(cat, b) {
        return Ok(None);
    }
    is_isomorphic(a, b)
}

/// A functor on the context: presentation `f: X → Y` plus `Q = F(Σ)`.
#[derive(Clone, Debug)]
pub struct FunctorObj {
    pub cat: Arc<Category>,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// `R`-map `X → Y` between the block modules of `x` and `y`.
    pub f: GrpMap,
    pub module: RModule,
    /// `Hom(X, Σ)` and the quotient by `f^* Hom(Y, Σ)`.
    pub hx: RHom,
    pub quot: Quotient,
}

impl FunctorObj {
    pub fn from_presentation(cat: &Arc<Category>, x: &[usize], y: &[usize], f: GrpMap) -> Result<Self> {
        let bx = cat.block(x)?;
        let by = cat.block(y)?;
        if f.dom != bx.module.add || f.cod != by.module.add || !bx.module.is_r_linear(&by.module, &f) {
            return Err(invalid("presentation map is not an R-map X → Y"));
        }
        let (hx, px) = cat.hom_module(&bx)?;
        let hy = hom_r(&by.module, &cat.sigma.module)?;
        let rows: Vec<Elem> = hy.basis().iter().map(|h| hx.coords(&h.compose(&f)).expect("R-linear")).collect();
        let k = SpanBasis::from_gens(&hx.space, &rows)?;
        let (module, quot) = px.quotient(&k)?;
        Ok(FunctorObj { cat: cat.clone(), x: x.to_vec(), y: y.to_vec(), f, module, hx, quot })
    }

    /// Image of `f^*` inside `Hom(X, Σ)`.
    pub fn relations(&self) -> &SpanBasis {
        &self.quot.sub
    }

    pub fn order(&self) -> u128 {
        self.module.order()
    }

    /// `|F(M_i)|` per context module.
    pub fn part_orders(&self) -> Vec<u128> {
        (0..self.cat.len()).map(|i| self.cat.part(&self.module, i).order()).collect()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        fingerprint(&self.cat, &self.module)
    }

    /// Number of isomorphism types of indecomposable summands.
    pub fn support(&self) -> Result<usize> {
        support(&self.module)
    }

    pub fn is_zero(&self) -> bool {
        self.module.is_zero()
    }

    /// `F(N)` with the induced action of `End_R(N)`.
    pub fn eval(&self, n: &BlockModule) -> Result<Evaluation> {
        Evaluation::new(&self.cat, &self.module, n)
    }

    /// `F(N) = Hom(X,N) / f^* Hom(Y,N)` computed from the presentation.
    pub fn eval_presentation(&self, n: &BlockModule) -> Result<PresentationEval> {
        let bx = self.cat.block(&self.x)?;
        let by = self.cat.block(&self.y)?;
        let hx = hom_r(&bx.module, &n.module)?;
        let hy = hom_r(&by.module, &n.module)?;
        let rows: Vec<Elem> = hy.basis().iter().map(|h| hx.coords(&h.compose(&self.f)).expect("R-linear")).collect();
        let quot = quotient(&SpanBasis::from_gens(&hx.space, &rows)?);
        Ok(PresentationEval { hx, quot })
    }
}

pub fn support(q: &RModule) -> Result<usize> {
    Ok(decompose_indecomposable(q)?.len())
}

/// `Hom(X, −)` for `X = ⊕ M_i^{x_i}`.
pub fn hom_functor(cat: &Arc<Category>, x: &[usize]) -> Result<FunctorObj> {
    let bx = cat.block(x)?;
    let y = vec![0; cat.len()];
    let by = cat.block(&y)?;
    FunctorObj::from_presentation(cat, x, &y, GrpMap::zero(&bx.module.add, &by.module.add))
}

/// Multiplicities of the context modules in `X`; fails if `X` has other summands.
pub fn context_multiplicities(cat: &Category, x: &RModule) -> Result<Vec<usize>> {
    let mut mults = vec![0; cat.len()];
    for s in decompose_indecomposable(x)? {
        let mut found = false;
        for (i, m) in cat.ctx.modules.iter().enumerate() {
            if is_isomorphic(&s.module, m)?.is_some() {
                mults[i] += s.multiplicity();
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Precondition("module has a summand outside the context".into()));
        }
    }
    Ok(mults)
}

/// `F(N)` through `Q`: one copy of `e_i Q` for every summand copy `(i, c)` of `N`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub target: BlockModule,
    pub group: PGroup,
    pub copies: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    pieces: Vec<PGroup>,
    incl: Vec<GrpMap>,
    /// `blocks[j][i][k]`: `F` of basis map `k` of `Hom(M_j, M_i)`, as `piece_j → piece_i`.
    blocks: Vec<Vec<Vec<GrpMap>>>,
    cat: Arc<Category>,
}

impl Evaluation {
    pub fn new(cat: &Arc<Category>, q: &RModule, n: &BlockModule) -> Result<Self> {
        if n.parts.len() != cat.len() {
            return Err(mismatch("target is not a block module over the context"));
        }
        let structs: Vec<(PGroup, GrpMap)> = (0..cat.len()).map(|i| cat.part(q, i).structure()).collect();
        let pieces: Vec<PGroup> = structs.iter().map(|s| s.0.clone()).collect();
        let incl: Vec<GrpMap> = structs.iter().map(|s| s.1.clone()).collect();
        let blocks = (0..cat.len())
            .map(|j| {
                (0..cat.len())
                    .map(|i| {
                        cat.rp[j][i]
                            .iter()
                            .map(|r| {
                                let rho = q.action_map(r);
                                let cols: Vec<Elem> = (0..pieces[j].rank())
                                    .map(|u| solve(&incl[i], &rho.apply(&incl[j].column(u))).expect("e_i Q is stable"))
                                    .collect();
                                images_map(&pieces[j], &pieces[i], &cols)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let copies = n.copies();
        let mut offsets = Vec::new();
        let mut group = PGroup::trivial(q.add.p);
        for &(i, _) in &copies {
            offsets.push(group.rank());
            group = group.direct_sum(&pieces[i]);
        }
        Ok(Evaluation { target: n.clone(), group, copies, offsets, pieces, incl, blocks, cat: cat.clone() })
    }

    pub fn order(&self) -> u128 {
        self.group.order()
    }

    /// `F(g)` for an endomorphism `g` of the target.
    pub fn act(&self, g: &GrpMap) -> GrpMap {
        let n = self.group.rank();
        let mut m = vec![vec![0u64; n]; n];
        for (a, &(i, c)) in self.copies.iter().enumerate() {
            for (b, &(j, d)) in self.copies.iter().enumerate() {
                let comp = self.target.component(g, i, c, j, d);
                if comp.is_zero() {
                    continue;
                }
                let coords = self.cat.ctx.homs[j][i].coords(&comp).expect("component is R-linear");
                for (k, &s) in coords.iter().enumerate() {
                    if s == 0 {
                        continue;
                    }
                    let blk = &self.blocks[j][i][k];
                    for (r, row) in blk.m.iter().enumerate() {
                        let modulus = self.group.modulus(self.offsets[a] + r);
                        for (t, &v) in row.iter().enumerate() {
                            let cell = &mut m[self.offsets[a] + r][self.offsets[b] + t];
                            *cell = ((*cell as u128 + s as u128 * v as u128) % modulus as u128) as u64;
                        }
                    }
                }
            }
        }
        GrpMap::new_unchecked(self.group.clone(), self.group.clone(), m)
    }

    /// Action of an `R'`-endomorphism `alpha` of `Q`, copy by copy.
    pub fn act_natural(&self, alpha: &GrpMap) -> GrpMap {
        let restricted: Vec<GrpMap> = (0..self.pieces.len())
            .map(|i| {
                let cols: Vec<Elem> = (0..self.pieces[i].rank())
                    .map(|u| {
                        solve(&self.incl[i], &alpha.apply(&self.incl[i].column(u))).expect("R'-maps preserve e_i Q")
                    })
                    .collect();
                images_map(&self.pieces[i], &self.pieces[i], &cols)
            })
            .collect();
        let n = self.group.rank();
        let mut m = vec![vec![0u64; n]; n];
        for (a, &(i, _)) in self.copies.iter().enumerate() {
            for (r, row) in restricted[i].m.iter().enumerate() {
                for (t, &v) in row.iter().enumerate() {
                    m[self.offsets[a] + r][self.offsets[a] + t] = v;
                }
            }
        }
        GrpMap::new_unchecked(self.group.clone(), self.group.clone(), m)
    }

    /// Component of `x ∈ F(N)` at copy `a`, in the coordinates of `Q`.
    pub fn component(&self, x: &[u64], a: usize) -> Elem {
        let i = self.copies[a].0;
        let off = self.offsets[a];
        self.incl[i].apply(&x[off..off + self.pieces[i].rank()])
    }

    /// Element of `F(N)` from per-copy components given in `Q` coordinates.
    pub fn assemble(&self, comps: &[Elem]) -> Option<Elem> {
        let mut out = Vec::with_capacity(self.group.rank());
        for (a, &(i, _)) in self.copies.iter().enumerate() {
            out.extend(solve(&self.incl[i], &comps[a])?);
        }
        Some(out)
    }

    /// `x` is generic when its components generate `Q`, i.e. the induced map `Hom(N,−) → F` is onto.
    pub fn is_generic(&self, q: &RModule, x: &[u64]) -> bool {
        let comps: Vec<Elem> = (0..self.copies.len()).map(|a| self.component(x, a)).collect();
        q.generated(&comps).is_full()
    }

    /// `H(N) ⊆ F(N)` for a submodule `H ⊆ Q`.
    pub fn sub_eval(&self, h: &SpanBasis) -> impl Fn(&[u64]) -> bool + '_ {
        let h = h.clone();
        move |x: &[u64]| (0..self.copies.len()).all(|a| h.contains(&self.component(x, a)))
    }
}

/// `F(N)` computed from the presentation.
#[derive(Clone, Debug)]
pub struct PresentationEval {
    pub hx: RHom,
    pub quot: Quotient,
}

impl PresentationEval {
    pub fn group(&self) -> &PGroup {
        &self.quot.group
    }

    /// `F(g)`: post-composition by `g` on `Hom(X, N)`, pushed to the quotient.
    pub fn act(&self, g: &GrpMap) -> GrpMap {
        let cols: Vec<Elem> = self
            .quot
            .lift_rows
            .iter()
            .map(|l| self.quot.proj.apply(&self.hx.coords(&g.compose(&self.hx.map(l))).expect("R-linear")))
            .collect();
        images_map(&self.quot.group, &self.quot.group, &cols)
    }
}

/// All `R'`-submodules of `q`, by breadth-first joins of cyclic submodules, zero first.
pub fn subfunctors(q: &RModule) -> Result<Vec<SpanBasis>> {
    let mut out = Vec::new();
    submodules_until(q, |s| {
        out.push(s.clone());
        true
    })?;
    Ok(out)
}

/// Cyclic submodules `R' x`, deduplicated, in order of first appearance.
pub fn cyclic_submodules(q: &RModule) -> Result<Vec<SpanBasis>> {
    let total = q.add.check_cap("module enumeration")?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for idx in 1..total {
        let x = q.add.element(idx);
        let c = q.generated(&[x]);
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Breadth-first submodule enumeration; `visit` returns `false` to stop early.
/// Returns the number of submodules visited.
pub fn submodules_until(q: &RModule, mut visit: impl FnMut(&SpanBasis) -> bool) -> Result<usize> {
    let cyclic = cyclic_submodules(q)?;
    let cap = caps::submodules();
    let zero = SpanBasis::zero(&q.add);
    let mut seen: HashSet<SpanBasis> = HashSet::new();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    let mut count = 0usize;
    while let Some(s) = queue.pop_front() {
        count += 1;
        if !visit(&s) {
            return Ok(count);
        }
        for c in &cyclic {
            if c.is_subset(&s) {
                continue;
            }
            let t = s.join(c);
            if seen.insert(t.clone()) {
                caps::check("submodules (lower bound)", seen.len() as u128, cap)?;
                queue.push_back(t);
            }
        }
    }
    Ok(count)
}

/// Quotient `outer / inner` as an `R'`-module.
pub fn subquotient(q: &RModule, inner: &SpanBasis, outer: &SpanBasis) -> Result<RModule> {
    if !inner.is_subset(outer) {
        return Err(invalid("inner submodule is not contained in the outer one"));
    }
    let (qa, quot) = q.quotient(inner)?;
    let img: Vec<Elem> = outer.rows.iter().map(|r| quot.proj.apply(r)).collect();
    let b = SpanBasis::from_gens(&qa.add, &img)?;
    Ok(qa.submodule(&b)?.0)
}

/// A subquotient pair `inner ⊆ outer` of a parent module.
#[derive(Clone, Debug)]
pub struct SubquotientHandle {
    pub inner: SpanBasis,
    pub outer: SpanBasis,
}

/// One isomorphism class of subquotients of `Q`.
#[derive(Clone, Debug)]
pub struct SubquotientClass {
    pub module: RModule,
    pub fingerprint: Fingerprint,
    /// Representative pair, as indices into [`SubquotientPoset::lattice`].
    pub inner: usize,
    pub outer: usize,
}

/// Isomorphism classes of subquotients of `Q` with the order `≼` restricted to them.
#[derive(Clone, Debug)]
pub struct SubquotientPoset {
    pub lattice: Vec<SpanBasis>,
    pub classes: Vec<SubquotientClass>,
    /// `below[a][b]`: class `b` is a subquotient of class `a`.
    pub below: Vec<Vec<bool>>,
}

impl SubquotientPoset {
    pub fn new(cat: &Category, q: &RModule) -> Result<Self> {
        let mut lattice = subfunctors(q)?;
        // Outer submodules descending by order, inner ascending: first match wins.
        lattice.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
        let n = lattice.len();
        let sub: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| lattice[a].is_subset(&lattice[b])).collect()).collect();
        let mut classes: Vec<SubquotientClass> = Vec::new();
        let mut by_fp: HashMap<Fingerprint, Vec<usize>> = HashMap::new();
        let mut pair_class: HashMap<(usize, usize), usize> = HashMap::new();
        for a in 0..n {
            let (qa, quot) = q.quotient(&lattice[a])?;
            for b in (0..n).rev() {
                if !sub[a][b] {
                    continue;
                }
                let img: Vec<Elem> = lattice[b].rows.iter().map(|r| quot.proj.apply(r)).collect();
                let m = qa.submodule(&SpanBasis::from_gens(&qa.add, &img)?)?.0;
                let fp = fingerprint(cat, &m);
                let mut found = None;
                for &c in by_fp.get(&fp).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if is_isomorphic(&classes[c].module, &m)?.is_some() {
                        found = Some(c);
                        break;
                    }
                }
                let c = match found {
                    Some(c) => c,
                    None => {
                        classes.push(SubquotientClass { module: m, fingerprint: fp.clone(), inner: a, outer: b });
                        by_fp.entry(fp).or_default().push(classes.len() - 1);
                        classes.len() - 1
                    }
                };
                pair_class.insert((a, b), c);
            }
        }
        let k = classes.len();
        let mut below = vec![vec![false; k]; k];
        for (c, cls) in classes.iter().enumerate() {
            for (&(a, b), &d) in &pair_class {
                if sub[cls.inner][a] && sub[b][cls.outer] {
                    below[c][d] = true;
                }
            }
        }
        Ok(SubquotientPoset { lattice, classes, below })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `b ≺ a`.
    pub fn strictly_below(&self, a: usize, b: usize) -> bool {
        a != b && self.below[a][b]
    }

    pub fn class_of(&self, cat: &Category, m: &RModule) -> Result<Option<usize>> {
        let fp = fingerprint(cat, m);
        for (c, cls) in self.classes.iter().enumerate() {
            if cls.fingerprint == fp && is_isomorphic(&cls.module, m)?.is_some() {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    pub fn handle(&self, c: usize) -> SubquotientHandle {
        let cls = &self.classes[c];
        SubquotientHandle { inner: self.lattice[cls.inner].clone(), outer: self.lattice[cls.outer].clone() }
    }
}

/// Some pair `inner ⊆ outer` of submodules of `g` with `outer/inner ≅ f`.
pub fn find_subquotient(cat: &Category, f: &RModule, g: &RModule) -> Result<Option<SubquotientHandle>> {
    let mut lattice = subfunctors(g)?;
    lattice.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
    let fp = fingerprint(cat, f);
    for outer in lattice.iter().rev() {
        for inner in &lattice {
            if inner.order() * f.order() != outer.order() || !inner.is_subset(outer) {
                continue;
            }
            let m = subquotient(g, inner, outer)?;
            if fingerprint(cat, &m) == fp && is_isomorphic(&m, f)?.is_some() {
                return Ok(Some(SubquotientHandle { inner: inner.clone(), outer: outer.clone() }));
            }
        }
    }
    Ok(None)
}

/// `F ≼ G`.
pub fn is_subquotient(f: &FunctorObj, g: &FunctorObj) -> Result<bool> {
    Ok(find_subquotient(&f.cat, &f.module, &g.module)?.is_some())
}

/// `F ≺ G`: a subquotient that is not isomorphic to `G`.
pub fn is_strict_subquotient(f: &FunctorObj, g: &FunctorObj) -> Result<bool> {
    Ok(is_subquotient(f, g)? && iso_test(&f.cat, &f.module, &g.module)?.is_none())
}

/// Greedy generators `q ∈ e_i Q` whose images form a basis of the top `Q/JQ`.
fn top_generators(cat: &Category, q: &RModule) -> Result<Vec<(usize, Elem)>> {
    let mut span = cat.jq(q);
    let mut gens = Vec::new();
    for i in 0..cat.len() {
        let part = cat.part(q, i);
        while let Some(r) = part.rows.iter().find(|r| !span.contains(r)) {
            let r = r.clone();
            span = span.join(&q.generated(std::slice::from_ref(&r)));
            gens.push((i, r));
        }
    }
    if !span.is_full() {
        return Err(Error::TheoremViolation("top generators do not generate the module".into()));
    }
    Ok(gens)
}

/// Projective cover `Hom(X, −) → F` with the explicit map `Hom(X, Σ) → Q`.
#[derive(Clone, Debug)]
pub struct Cover {
    pub x: Vec<usize>,
    pub gens: Vec<(usize, Elem)>,
    pub hx: RHom,
    pub px: RModule,
    pub map: GrpMap,
    pub kernel: SpanBasis,
}

pub fn projective_cover(cat: &Arc<Category>, q: &RModule) -> Result<Cover> {
    let gens = top_generators(cat, q)?;
    let mut x = vec![0; cat.len()];
    for &(i, _) in &gens {
        x[i] += 1;
    }
    // x_i = dim over E_i of e_i(Q/JQ).
    let top = q.quotient(&cat.jq(q))?.0;
    for (i, &xi) in x.iter().enumerate() {
        let expect = cat.part(&top, i).rows_log_order();
        if expect != xi as u32 * cat.ctx.local[i].residue_degree {
            return Err(Error::TheoremViolation(format!("cover multiplicity at {i} disagrees with the top")));
        }
    }
    let bx = cat.block(&x)?;
    let (hx, px) = cat.hom_module(&bx)?;
    let mut counter = vec![0; cat.len()];
    let copy_gen: Vec<((usize, usize), Elem)> = gens
        .iter()
        .map(|(i, g)| {
            let c = counter[*i];
            counter[*i] += 1;
            ((*i, c), g.clone())
        })
        .collect();
    let cols: Vec<Elem> = (0..hx.space.rank())
        .map(|u| {
            let phi = hx.map(&hx.space.unit(u));
            let mut v = q.add.zero();
            for ((i, c), g) in &copy_gen {
                let r = cat.end.from_map(&phi.compose(&bx.inclusion(*i, *c)).compose(&cat.sigma.projection(*i, 0)));
                let r = r.expect("restriction of an R-map is R-linear");
                v = q.add.add(&v, &q.act(&r, g));
            }
            v
        })
        .collect();
    let map = images_map(&hx.space, &q.add, &cols);
    if !px.is_r_linear(q, &map) || !map.is_surjective() {
        return Err(Error::TheoremViolation("projective cover map is not an R'-epimorphism".into()));
    }
    let kernel = kernel(&map);
    Ok(Cover { x, gens: copy_gen.into_iter().map(|((i, _), g)| (i, g)).collect(), hx, px, map, kernel })
}

/// Minimal presentation of the functor with `F(Σ) = q`, checked against `q`.
pub fn minimal_presentation(cat: &Arc<Category>, q: &RModule) -> Result<FunctorObj> {
    let cover = projective_cover(cat, q)?;
    let (kmod, kincl) = cover.px.submodule(&cover.kernel)?;
    let kgens = top_generators(cat, &kmod)?;
    let mut y = vec![0; cat.len()];
    for &(j, _) in &kgens {
        y[j] += 1;
    }
    let bx = cat.block(&cover.x)?;
    let by = cat.block(&y)?;
    let mut counter = vec![0; cat.len()];
    let mut f = GrpMap::zero(&bx.module.add, &by.module.add);
    for (j, kg) in &kgens {
        let d = counter[*j];
        counter[*j] += 1;
        let k = cover.hx.map(&kincl.apply(kg));
        f = f.add(&by.inclusion(*j, d).compose(&cat.sigma.projection(*j, 0)).compose(&k));
    }
    let obj = FunctorObj::from_presentation(cat, &cover.x, &y, f)?;
    if obj.relations() != &cover.kernel {
        return Err(Error::TheoremViolation("presentation relations differ from the cover kernel".into()));
    }
    Ok(obj)
}

/// `S_i = Hom(M_i, −) / rad`.
pub fn simple_functors(cat: &Arc<Category>) -> Result<Vec<FunctorObj>> {
    (0..cat.len())
        .map(|i| {
            let mut x = vec![0; cat.len()];
            x[i] = 1;
            let p = hom_functor(cat, &x)?;
            let top = p.module.quotient(&cat.jq(&p.module))?.0;
            minimal_presentation(cat, &top)
        })
        .collect()
}

pub fn direct_sum(f: &FunctorObj, g: &FunctorObj) -> Result<FunctorObj> {
    if !Arc::ptr_eq(&f.cat, &g.cat) {
        return Err(mismatch("functors over different contexts"));
    }
    minimal_presentation(&f.cat, &f.module.direct_sum(&g.module))
}

/// `Aut(F) = Aut_{R'}(Q)`, acting on `Q`.
pub fn aut_functor(f: &FunctorObj) -> Result<FiniteGroup> {
    enumerate_aut(&f.module)
}

/// `A_F`, `B_F` from the presentation: `A_F` = automorphisms of `X` preserving the relations
/// under precomposition, `B_F = {1 + g f}`; `|A_F| / |B_F|` should equal `|Aut(F)|`.
#[derive(Clone, Debug, Serialize)]
pub struct AutPresentation {
    pub a_order: usize,
    pub b_order: usize,
    /// `B_F` equals the set of automorphisms of `X` acting trivially on `F`.
    pub b_matches_kernel: bool,
}

pub fn aut_via_presentation(f: &FunctorObj) -> Result<AutPresentation> {
    let cat = &f.cat;
    let bx = cat.block(&f.x)?;
    let by = cat.block(&f.y)?;
    let autx = enumerate_aut(&bx.module)?;
    let rel = f.relations();
    let hx = &f.hx;
    let pre = |phi: &GrpMap, c: &[u64]| hx.coords(&hx.map(c).compose(phi)).expect("R-linear");
    let mut a_set = Vec::new();
    let mut acting_trivially = HashSet::new();
    for idx in 0..autx.order() {
        let phi = autx.mat(idx);
        if !rel.rows.iter().all(|r| rel.contains(&pre(&phi, r))) {
            continue;
        }
        a_set.push(idx);
        let trivial = (0..hx.space.rank()).all(|u| {
            let e = hx.space.unit(u);
            rel.contains(&hx.space.sub(&pre(&phi, &e), &e))
        });
        if trivial {
            acting_trivially.insert(idx);
        }
    }
    let hyx = hom_r(&by.module, &bx.module)?;
    let mut b_set = HashSet::new();
    let id = GrpMap::identity(&bx.module.add);
    for g in hyx.elements()? {
        let u = id.add(&g.compose(&f.f));
        match autx.index_of_map(&u) {
            Some(i) => {
                b_set.insert(i);
            }
            None => return Err(Error::TheoremViolation("1 + g f is not invertible".into())),
        }
    }
    Ok(AutPresentation { a_order: a_set.len(), b_order: b_set.len(), b_matches_kernel: b_set == acting_trivially })
}

/// For `F = Hom(M, −)`: the element of `Aut(F)` induced by `h ∈ Aut(M)`, namely `φ ↦ φ ∘ h^{-1}`.
pub fn yoneda_aut(f: &FunctorObj, g: &FiniteGroup, aut: &FiniteGroup) -> Result<Vec<usize>> {
    if f.y.iter().any(|&v| v > 0) {
        return Err(Error::Precondition("Yoneda identification needs a hom functor".into()));
    }
    let hx = &f.hx;
    (0..g.order())
        .map(|h| {
            let hinv = g.mat(g.inv(h));
            let cols: Vec<Elem> = f
                .quot
                .lift_rows
                .iter()
                .map(|l| f.quot.proj.apply(&hx.coords(&hx.map(l).compose(&hinv)).expect("R-linear")))
                .collect();
            let alpha = images_map(&f.module.add, &f.module.add, &cols);
            aut.index_of_map(&alpha)
                .ok_or_else(|| Error::TheoremViolation("precomposition is not an automorphism".into()))
        })
        .collect()
}

/// Inverse of an automorphism of `Q`, as a map.
pub fn inverse_map(f: &GrpMap) -> Result<GrpMap> {
    invert(f).ok_or_else(|| invalid("map is not invertible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::groups::{linear_fixed_points, Classes};

    fn cat_of(i: &fixtures::Instance) -> Arc<Category> {
        Category::new(i.ctx.clone()).unwrap()
    }

    #[test]
    fn hom_functor_basics() {
        let i = fixtures::gl_field(1, 2).unwrap();
        let cat = cat_of(&i);
        let fr1 = hom_functor(&cat, &[1]).unwrap();
        assert_eq!(subfunctors(&fr1.module).unwrap().len(), 2);
        let zero = hom_functor(&cat, &[0]).unwrap();
        assert!(zero.is_zero());
        let o2 = fixtures::chain_instance(2, 2, &[0, 1]).unwrap();
        let cat = cat_of(&o2);
        let f2 = hom_functor(&cat, &[1]).unwrap();
        assert_eq!(f2.module.add.exps, vec![2]);
        assert_eq!(subfunctors(&f2.module).unwrap().len(), 3);
    }

    #[test]
    fn quiver_functor_values() {
        let i = fixtures::quiver_instance(3, 1, 1).unwrap();
        let cat = cat_of(&i);
        let simples = simple_functors(&cat).unwrap();
        assert_eq!(simples.len(), 2);
        assert_eq!(simples[0].part_orders(), vec![3, 1]);
        assert_eq!(simples[1].part_orders(), vec![1, 3]);
        assert!(iso_test(&cat, &simples[0].module, &simples[1].module).unwrap().is_none());
        for s in &simples {
            // Cover of S_i is Hom(M_i, −).
            assert_eq!(s.x.iter().sum::<usize>(), 1);
        }
    }

    #[test]
    fn presentation_and_module_agree() {
        for inst in [fixtures::quiver_instance(2, 1, 1).unwrap(), fixtures::chain_instance(2, 2, &[1, 1]).unwrap()] {
            let cat = cat_of(&inst);
            let hm = hom_functor(&cat, &inst.mults).unwrap();
            let n = inst.block().unwrap();
            let g = enumerate_aut(&n.module).unwrap();
            let cl = Classes::new(&g);
            let poset = SubquotientPoset::new(&cat, &hm.module).unwrap();
            for c in &poset.classes {
                let f = minimal_presentation(&cat, &c.module).unwrap();
                let ev = f.eval(&n).unwrap();
                let pe = f.eval_presentation(&n).unwrap();
                assert_eq!(ev.order(), pe.group().order());
                for &r in &cl.reps {
                    let gm = g.mat(r);
                    assert_eq!(linear_fixed_points(&ev.act(&gm)), linear_fixed_points(&pe.act(&gm)));
                }
                // Functoriality of the module route.
                for &a in g.gens.iter().take(3) {
                    for &b in g.gens.iter().take(3) {
                        let lhs = ev.act(&g.mat(g.mul(a, b)));
                        assert_eq!(lhs, ev.act(&g.mat(a)).compose(&ev.act(&g.mat(b))));
                    }
                }
                assert!(ev.act(&GrpMap::identity(&n.module.add)).is_identity());
            }
        }
    }

    #[test]
    fn chain_subquotients() {
        // Over ⟨O_2⟩: Hom(O_2², −) has proper subquotients 0, F_1, F_1², F_2, F_1 ⊕ F_2.
        let inst = fixtures::chain_instance(2, 2, &[0, 2]).unwrap();
        let cat = cat_of(&inst);
        let hm = hom_functor(&cat, &[2]).unwrap();
        let poset = SubquotientPoset::new(&cat, &hm.module).unwrap();
        let mut shapes: Vec<Vec<u32>> = poset.classes.iter().map(|c| c.fingerprint.parts[0].clone()).collect();
        shapes.sort();
        assert_eq!(shapes, vec![vec![], vec![1], vec![1, 1], vec![1, 2], vec![2], vec![2, 2]]);
        for a in 0..poset.len() {
            assert!(poset.below[a][a]);
            for b in 0..poset.len() {
                if a != b && poset.below[a][b] {
                    assert!(!poset.below[b][a], "antisymmetry");
                }
                for c in 0..poset.len() {
                    if poset.below[a][b] && poset.below[b][c] {
                        assert!(poset.below[a][c], "transitivity");
                    }
                }
            }
        }
        // F_1 ⊕ F_2 ≼ F_2 ⊕ F_2, with an explicit pair.
        let f1 = poset.classes.iter().find(|c| c.fingerprint.parts[0] == vec![1, 2]).unwrap();
        assert!(find_subquotient(&cat, &f1.module, &hm.module).unwrap().is_some());
    }

    #[test]
    fn chain_presentations_and_automorphisms() {
        // Context ⟨O_2⟩ over Z/9: F_1 = Hom(O_2,−)/(3), presentation by multiplication by 3.
        let inst = fixtures::chain_instance(3, 2, &[0, 1]).unwrap();
        let cat = cat_of(&inst);
        let o2 = cat.ctx.modules[0].add.clone();
        let f1 = FunctorObj::from_presentation(&cat, &[1], &[1], GrpMap::identity(&o2).scale(3)).unwrap();
        assert_eq!(f1.module.add.exps, vec![1]);
        let min = minimal_presentation(&cat, &f1.module).unwrap();
        assert_eq!((min.x.clone(), min.y.clone()), (vec![1], vec![1]));
        assert_eq!(aut_functor(&f1).unwrap().order(), 2);
        let ap = aut_via_presentation(&min).unwrap();
        assert_eq!(ap.a_order / ap.b_order, 2);
        assert!(ap.b_matches_kernel);
        let f2 = hom_functor(&cat, &[1]).unwrap();
        assert_eq!(aut_functor(&f2).unwrap().order(), 6);
        let ap = aut_via_presentation(&f2).unwrap();
        assert_eq!((ap.a_order, ap.b_order), (6, 1));
    }

    #[test]
    fn quiver_automorphisms_and_sums() {
        let inst = fixtures::quiver_instance(3, 1, 1).unwrap();
        let cat = cat_of(&inst);
        let s = simple_functors(&cat).unwrap();
        let sum = direct_sum(&s[0], &s[1]).unwrap();
        assert_eq!(aut_functor(&sum).unwrap().order(), 4);
        assert_eq!(sum.support().unwrap(), 2);
        let zero = hom_functor(&cat, &[0, 0]).unwrap();
        let s0 = direct_sum(&s[0], &zero).unwrap();
        assert!(iso_test(&cat, &s0.module, &s[0].module).unwrap().is_some());
        // Aut(Hom(M,−)) ≅ Aut(M) through precomposition.
        let hm = hom_functor(&cat, &[1, 1]).unwrap();
        let aut = aut_functor(&hm).unwrap();
        let g = enumerate_aut(&inst.block().unwrap().module).unwrap();
        let y = yoneda_aut(&hm, &g, &aut).unwrap();
        let distinct: HashSet<usize> = y.iter().copied().collect();
        assert_eq!(distinct.len(), g.order());
        assert_eq!(aut.order(), g.order());
        for a in 0..g.order() {
            for b in 0..g.order() {
                assert_eq!(y[g.mul(a, b)], aut.mul(y[a], y[b]));
            }
        }
    }

    #[test]
    fn free_functor_splits() {
        let i = fixtures::gl_field(2, 2).unwrap();
        let cat = cat_of(&i);
        let fr2 = hom_functor(&cat, &[2]).unwrap();
        let fr1 = hom_functor(&cat, &[1]).unwrap();
        let sum = direct_sum(&fr1, &fr1).unwrap();
        assert!(iso_test(&cat, &sum.module, &fr2.module).unwrap().is_some());
        assert_eq!(subfunctors(&fr2.module).unwrap().len(), 5);
        let mults = context_multiplicities(&cat, &i.block().unwrap().module).unwrap();
        assert_eq!(mults, vec![2]);
    }
}
