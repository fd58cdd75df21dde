//! Finite `Z/p^l`-algebras, their modules, R-linear hom groups, radicals,
//! Krull-Schmidt decomposition and left/right maximal morphisms.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::linalg::{
    hom_group, image, kernel, pow, quotient, solve, Elem, GrpMap, HomGroup, PGroup, Quotient, SpanBasis,
};

/// Additive group plus structure constants `table[a][b] = e_a * e_b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    pub add: PGroup,
    pub table: Vec<Vec<Elem>>,
    pub one: Elem,
}

impl FiniteAlgebra {
    /// Checks bilinearity, associativity and unitality on generators.
    pub fn new(add: PGroup, table: Vec<Vec<Elem>>, one: Elem) -> Result<Self> {
        let n = add.rank();
        if table.len() != n || table.iter().any(|r| r.len() != n) || !add.contains(&one) {
            return Err(mismatch("multiplication table shape"));
        }
        for a in 0..n {
            for b in 0..n {
                let c = &table[a][b];
                if !add.contains(c) {
                    return Err(invalid(format!("product ({a},{b}) is not a reduced element")));
                }
                let o = add.exps[a].min(add.exps[b]);
                if !add.is_zero(&add.scale(pow(add.p, o), c)) {
                    return Err(invalid(format!("product ({a},{b}) is not bilinear")));
                }
            }
        }
        let alg = FiniteAlgebra { add, table, one };
        alg.check_axioms()?;
        Ok(alg)
    }

    pub fn from_fn(add: PGroup, one: Elem, f: impl Fn(usize, usize) -> Elem) -> Result<Self> {
        let n = add.rank();
        let table = (0..n).map(|a| (0..n).map(|b| add.reduced(f(a, b))).collect()).collect();
        FiniteAlgebra::new(add, table, one)
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.dim();
        for a in 0..n {
            let ea = self.add.unit(a);
            if self.mul(&self.one, &ea) != ea || self.mul(&ea, &self.one) != ea {
                return Err(invalid(format!("unit fails on generator {a}")));
            }
            for b in 0..n {
                let ab = &self.table[a][b];
                for c in 0..n {
                    let bc = &self.table[b][c];
                    if self.mul(ab, &self.add.unit(c)) != self.mul(&ea, bc) {
                        return Err(invalid(format!("associativity fails on ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of additive generators.
    pub fn dim(&self) -> usize {
        self.add.rank()
    }

    pub fn p(&self) -> u64 {
        self.add.p
    }

    pub fn order(&self) -> u128 {
        self.add.order()
    }

    pub fn zero(&self) -> Elem {
        self.add.zero()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Elem {
        let g = &self.add;
        let mut out = g.zero();
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                out = g.add(&out, &g.scale(xa * yb, &self.table[a][b]));
            }
        }
        out
    }

    pub fn pow(&self, x: &[u64], k: usize) -> Elem {
        let mut r = self.one.clone();
        for _ in 0..k {
            r = self.mul(&r, x);
        }
        r
    }

    /// `y ↦ x y`.
    pub fn left_map(&self, x: &[u64]) -> GrpMap {
        let cols: Vec<Elem> = (0..self.dim()).map(|b| self.mul(x, &self.add.unit(b))).collect();
        images_map(&self.add, &self.add, &cols)
    }

    /// `y ↦ y x`.
    pub fn right_map(&self, x: &[u64]) -> GrpMap {
        let cols: Vec<Elem> = (0..self.dim()).map(|b| self.mul(&self.add.unit(b), x)).collect();
        images_map(&self.add, &self.add, &cols)
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.dim()).all(|a| (0..self.dim()).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn is_nilpotent(&self, x: &[u64]) -> bool {
        let mut y = x.to_vec();
        for _ in 0..=self.add.log_order() {
            if self.add.is_zero(&y) {
                return true;
            }
            y = self.mul(&y, x);
        }
        self.add.is_zero(&y)
    }

    pub fn is_unit(&self, x: &[u64]) -> bool {
        self.left_map(x).is_surjective()
    }

    pub fn center(&self) -> SpanBasis {
        let n = self.dim();
        let target = self.add.power(n);
        let cols: Vec<Elem> = (0..n)
            .map(|a| {
                let ea = self.add.unit(a);
                (0..n)
                    .flat_map(|b| {
                        let eb = self.add.unit(b);
                        self.add.sub(&self.mul(&ea, &eb), &self.mul(&eb, &ea))
                    })
                    .collect()
            })
            .collect();
        kernel(&images_map(&self.add, &target, &cols))
    }

    /// Two-sided ideal generated by `gens`.
    pub fn ideal(&self, gens: &[Elem]) -> SpanBasis {
        let mut s = SpanBasis::from_gens_unchecked(&self.add, gens);
        loop {
            let mut extra = Vec::new();
            for r in &s.rows {
                for b in 0..self.dim() {
                    let eb = self.add.unit(b);
                    extra.push(self.mul(&eb, r));
                    extra.push(self.mul(r, &eb));
                }
            }
            let t = s.join_elems(&extra);
            if t == s {
                return s;
            }
            s = t;
        }
    }

    /// Additive span of all products `x y`, `x ∈ a`, `y ∈ b`.
    pub fn product(&self, a: &SpanBasis, b: &SpanBasis) -> SpanBasis {
        let gens: Vec<Elem> =
            a.rows.iter().flat_map(|x| b.rows.iter().map(move |y| (x, y))).map(|(x, y)| self.mul(x, y)).collect();
        SpanBasis::from_gens_unchecked(&self.add, &gens)
    }

    /// Direct product of algebras.
    pub fn product_ring(&self, other: &FiniteAlgebra) -> FiniteAlgebra {
        let add = self.add.direct_sum(&other.add);
        let (n, m) = (self.dim(), other.dim());
        let mut table = vec![vec![add.zero(); n + m]; n + m];
        for a in 0..n {
            for b in 0..n {
                table[a][b][..n].copy_from_slice(&self.table[a][b]);
            }
        }
        for a in 0..m {
            for b in 0..m {
                table[n + a][n + b][n..].copy_from_slice(&other.table[a][b]);
            }
        }
        let mut one = self.one.clone();
        one.extend_from_slice(&other.one);
        FiniteAlgebra { add, table, one }
    }
}

pub(crate) fn images_map(dom: &PGroup, cod: &PGroup, cols: &[Elem]) -> GrpMap {
    let m = (0..cod.rank()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    GrpMap::new_unchecked(dom.clone(), cod.clone(), m)
}

/// `A / I` for a two-sided ideal `I`.
pub fn quotient_algebra(a: &FiniteAlgebra, ideal: &SpanBasis) -> (FiniteAlgebra, Quotient) {
    let q = quotient(ideal);
    let n = q.group.rank();
    let table =
        (0..n).map(|s| (0..n).map(|t| q.proj.apply(&a.mul(&q.lift_rows[s], &q.lift_rows[t]))).collect()).collect();
    let one = q.proj.apply(&a.one);
    (FiniteAlgebra { add: q.group.clone(), table, one }, q)
}

fn mat_mul_mod(x: &[Vec<u64>], y: &[Vec<u64>], m: u64) -> Vec<Vec<u64>> {
    let n = x.len();
    let mut out = vec![vec![0u64; n]; n];
    for i in 0..n {
        for k in 0..n {
            let a = x[i][k];
            if a == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] = ((out[i][j] as u128 + a as u128 * y[k][j] as u128) % m as u128) as u64;
            }
        }
    }
    out
}

fn mat_pow_mod(x: &[Vec<u64>], mut e: u64, m: u64) -> Vec<Vec<u64>> {
    let n = x.len();
    let mut r: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j) % m).collect()).collect();
    let mut b = x.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = mat_mul_mod(&r, &b, m);
        }
        b = mat_mul_mod(&b, &b, m);
        e >>= 1;
    }
    r
}

/// `Tr(L̂^{p^i}) / p^i mod p` where `L̂` is the integer lift of the left-regular matrix of `x`.
fn frobenius_trace(a: &FiniteAlgebra, x: &[u64], i: u32) -> u64 {
    let p = a.p();
    let m = pow(p, i + 1);
    let l = a.left_map(x).m;
    let pw = mat_pow_mod(&l, pow(p, i), m);
    let tr = (0..pw.len()).fold(0u64, |acc, k| (acc + pw[k][k]) % m);
    debug_assert_eq!(tr % pow(p, i), 0, "trace not divisible on I_(i-1)");
    (tr / pow(p, i)) % p
}

/// Radical of an algebra whose additive group is elementary abelian, by iterated
/// Frobenius-trace kernels.
fn radical_mod_p(a: &FiniteAlgebra) -> SpanBasis {
    let n = a.dim();
    let p = a.p();
    let mut cur = SpanBasis::full(&a.add);
    let mut i = 0u32;
    while pow(p, i) <= n as u64 && !cur.is_zero() {
        let basis = cur.rows.clone();
        let coeff = PGroup::free(p, 1, basis.len());
        let target = PGroup::free(p, 1, n);
        let cols: Vec<Elem> =
            basis.iter().map(|u| (0..n).map(|k| frobenius_trace(a, &a.mul(u, &a.add.unit(k)), i)).collect()).collect();
        let k = kernel(&images_map(&coeff, &target, &cols));
        let gens: Vec<Elem> = k
            .rows
            .iter()
            .map(|c| c.iter().zip(&basis).fold(a.zero(), |acc, (&ct, u)| a.add.add(&acc, &a.add.scale(ct, u))))
            .collect();
        cur = SpanBasis::from_gens_unchecked(&a.add, &gens);
        i += 1;
    }
    cur
}

/// Jacobson radical: preimage of the radical of `A / pA`.
pub fn jacobson_radical(a: &FiniteAlgebra) -> SpanBasis {
    let p = a.p();
    let pa: Vec<Elem> = (0..a.dim()).map(|j| a.add.scale(p, &a.add.unit(j))).collect();
    let pa = SpanBasis::from_gens_unchecked(&a.add, &pa);
    let (abar, q) = quotient_algebra(a, &pa);
    let jbar = radical_mod_p(&abar);
    crate::linalg::preimage(&q.proj, &jbar).expect("radical lives in the quotient")
}

/// A nontrivial idempotent of `a`, or `None` when `a` is local (or zero).
pub fn find_idempotent(a: &FiniteAlgebra) -> Result<Option<Elem>> {
    if a.add.rank() == 0 {
        return Ok(None);
    }
    let j = jacobson_radical(a);
    let (s, q) = quotient_algebra(a, &j);
    let Some(ebar) = semisimple_idempotent(&s)? else { return Ok(None) };
    let mut e = q.lift(&ebar);
    loop {
        let e2 = a.mul(&e, &e);
        if e2 == e {
            return Ok(Some(e));
        }
        let e3 = a.mul(&e2, &e);
        e = a.add.sub(&a.add.scale(3, &e2), &a.add.scale(2, &e3));
    }
}

fn semisimple_idempotent(s: &FiniteAlgebra) -> Result<Option<Elem>> {
    let p = s.p();
    let n = s.dim();
    let g = &s.add;
    let z = s.center();
    // Frobenius fixed points of the center: the span of its primitive idempotents.
    let zb = z.rows.clone();
    let coeff = PGroup::free(p, 1, zb.len());
    let cols: Vec<Elem> = zb.iter().map(|u| g.sub(&s.pow(u, p as usize), u)).collect();
    let fixed = kernel(&images_map(&coeff, g, &cols));
    let fixed: Vec<Elem> = fixed
        .rows
        .iter()
        .map(|c| c.iter().zip(&zb).fold(g.zero(), |acc, (&ct, u)| g.add(&acc, &g.scale(ct, u))))
        .collect();
    let scalars = SpanBasis::from_gens_unchecked(g, std::slice::from_ref(&s.one));
    if let Some(k) = fixed.iter().find(|k| !scalars.contains(k)) {
        for c in 0..p {
            let shifted = g.sub(k, &g.scale(c, &s.one));
            let e = g.sub(&s.one, &s.pow(&shifted, (p - 1) as usize));
            if !g.is_zero(&e) && e != s.one {
                return Ok(Some(e));
            }
        }
        unreachable!("a non-scalar Frobenius-fixed central element has two eigenvalues");
    }
    if zb.len() == n {
        return Ok(None);
    }
    // Simple but not a division ring: find a zero divisor, then an idempotent power.
    let total = g.check_cap("semisimple quotient scan")?;
    for idx in 1..total {
        let x = g.element(idx);
        if s.left_map(&x).is_surjective() {
            continue;
        }
        let y = if s.is_nilpotent(&x) {
            match (0..n).map(|b| s.mul(&x, &g.unit(b))).find(|y| !s.is_nilpotent(y)) {
                Some(y) => y,
                None => continue,
            }
        } else {
            x
        };
        return Ok(Some(idempotent_power(s, &y)));
    }
    Err(Error::TheoremViolation("simple algebra without zero divisors that is not commutative".into()))
}

fn idempotent_power(s: &FiniteAlgebra, x: &[u64]) -> Elem {
    let mut seen: HashMap<Elem, usize> = HashMap::new();
    let mut powers = vec![x.to_vec()];
    seen.insert(x.to_vec(), 1);
    loop {
        let next = s.mul(powers.last().unwrap(), x);
        let k = powers.len() + 1;
        if let Some(&i) = seen.get(&next) {
            let c = k - i;
            let m = i.div_ceil(c) * c;
            return powers[m - 1].clone();
        }
        seen.insert(next.clone(), k);
        powers.push(next);
    }
}

pub fn is_local(a: &FiniteAlgebra) -> Result<bool> {
    Ok(a.dim() > 0 && find_idempotent(a)?.is_none())
}

/// A finite module over a [`FiniteAlgebra`]; `action[a]` is the action of generator `e_a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RModule {
    pub ring: Arc<FiniteAlgebra>,
    pub add: PGroup,
    pub action: Vec<GrpMap>,
}

impl RModule {
    pub fn new(ring: Arc<FiniteAlgebra>, add: PGroup, action: Vec<GrpMap>) -> Result<Self> {
        if action.len() != ring.dim() {
            return Err(mismatch("one action map per ring generator required"));
        }
        if add.p != ring.p() && add.rank() > 0 {
            return Err(mismatch("module and ring have different primes"));
        }
        for (a, rho) in action.iter().enumerate() {
            if rho.dom != add || rho.cod != add {
                return Err(mismatch(format!("action {a} is not an endomorphism of the module")));
            }
            if !rho.scale(ring.add.modulus(a)).is_zero() {
                return Err(invalid(format!("action {a} is not killed by the order of its generator")));
            }
        }
        let m = RModule { ring, add, action };
        if !m.action_map(&m.ring.one).is_identity() {
            return Err(invalid("unit does not act as identity"));
        }
        for a in 0..m.ring.dim() {
            for b in 0..m.ring.dim() {
                if m.action[a].compose(&m.action[b]) != m.action_map(&m.ring.table[a][b]) {
                    return Err(invalid(format!("action does not respect the product ({a},{b})")));
                }
            }
        }
        Ok(m)
    }

    pub fn zero(ring: &Arc<FiniteAlgebra>) -> Self {
        let add = PGroup::trivial(ring.p());
        let action = (0..ring.dim()).map(|_| GrpMap::zero(&add, &add)).collect();
        RModule { ring: ring.clone(), add, action }
    }

    /// `R` acting on itself by left multiplication.
    pub fn regular(ring: &Arc<FiniteAlgebra>) -> Self {
        let action = (0..ring.dim()).map(|a| ring.left_map(&ring.add.unit(a))).collect();
        RModule { ring: ring.clone(), add: ring.add.clone(), action }
    }

    pub fn free(ring: &Arc<FiniteAlgebra>, n: usize) -> Self {
        RModule::regular(ring).power(n)
    }

    pub fn same_ring(&self, other: &RModule) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    pub fn is_zero(&self) -> bool {
        self.add.rank() == 0
    }

    pub fn order(&self) -> u128 {
        self.add.order()
    }

    pub fn action_map(&self, r: &[u64]) -> GrpMap {
        let mut out = GrpMap::zero(&self.add, &self.add);
        for (a, &c) in r.iter().enumerate() {
            if c != 0 {
                out = out.add(&self.action[a].scale(c));
            }
        }
        out
    }

    pub fn act(&self, r: &[u64], m: &[u64]) -> Elem {
        self.action_map(r).apply(m)
    }

    pub fn direct_sum(&self, other: &RModule) -> RModule {
        let action = self.action.iter().zip(&other.action).map(|(x, y)| x.direct_sum(y)).collect();
        RModule { ring: self.ring.clone(), add: self.add.direct_sum(&other.add), action }
    }

    pub fn power(&self, n: usize) -> RModule {
        let mut out = RModule::zero(&self.ring);
        for _ in 0..n {
            out = out.direct_sum(self);
        }
        out
    }

    pub fn is_submodule(&self, s: &SpanBasis) -> bool {
        s.rows.iter().all(|r| self.action.iter().all(|rho| s.contains(&rho.apply(r))))
    }

    /// Smallest submodule containing `gens`.
    pub fn generated(&self, gens: &[Elem]) -> SpanBasis {
        let mut s = SpanBasis::from_gens_unchecked(&self.add, gens);
        loop {
            let extra: Vec<Elem> =
                s.rows.iter().flat_map(|r| self.action.iter().map(move |rho| rho.apply(r))).collect();
            let t = s.join_elems(&extra);
            if t == s {
                return s;
            }
            s = t;
        }
    }

    /// Submodule as a module in its own coordinates, with the inclusion.
    pub fn submodule(&self, s: &SpanBasis) -> Result<(RModule, GrpMap)> {
        if s.ambient != self.add {
            return Err(mismatch("subgroup not inside the module"));
        }
        if !self.is_submodule(s) {
            return Err(invalid("subgroup is not stable under the ring action"));
        }
        let (grp, incl) = s.structure();
        let action = self
            .action
            .iter()
            .map(|rho| {
                let cols: Vec<Elem> = (0..grp.rank())
                    .map(|u| solve(&incl, &rho.apply(&incl.column(u))).expect("submodule is stable"))
                    .collect();
                images_map(&grp, &grp, &cols)
            })
            .collect();
        Ok((RModule { ring: self.ring.clone(), add: grp, action }, incl))
    }

    pub fn quotient(&self, s: &SpanBasis) -> Result<(RModule, Quotient)> {
        if s.ambient != self.add {
            return Err(mismatch("subgroup not inside the module"));
        }
        if !self.is_submodule(s) {
            return Err(invalid("subgroup is not stable under the ring action"));
        }
        let q = quotient(s);
        let action = self
            .action
            .iter()
            .map(|rho| {
                let cols: Vec<Elem> = q.lift_rows.iter().map(|l| q.proj.apply(&rho.apply(l))).collect();
                images_map(&q.group, &q.group, &cols)
            })
            .collect();
        Ok((RModule { ring: self.ring.clone(), add: q.group.clone(), action }, q))
    }

    pub fn is_r_linear(&self, target: &RModule, f: &GrpMap) -> bool {
        self.action.iter().zip(&target.action).all(|(a, b)| f.compose(a) == b.compose(f))
    }
}

/// `Hom_R(src, tgt)` as a subgroup of `Hom_Z`, with abstract coordinates in `space`.
#[derive(Clone, Debug)]
pub struct RHom {
    pub src: RModule,
    pub tgt: RModule,
    pub hg: HomGroup,
    pub space: PGroup,
    /// `space → hg.group`, injective.
    pub incl: GrpMap,
}

impl RHom {
    pub fn order(&self) -> u128 {
        self.space.order()
    }

    pub fn log_order(&self) -> u32 {
        self.space.log_order()
    }

    pub fn map(&self, c: &[u64]) -> GrpMap {
        self.hg.to_map(&self.incl.apply(c))
    }

    /// Coordinates of an R-linear map, `None` if `f` is not R-linear.
    pub fn coords(&self, f: &GrpMap) -> Option<Elem> {
        if f.dom != self.src.add || f.cod != self.tgt.add {
            return None;
        }
        solve(&self.incl, &self.hg.from_map(f))
    }

    pub fn contains(&self, f: &GrpMap) -> bool {
        self.coords(f).is_some()
    }

    pub fn basis(&self) -> Vec<GrpMap> {
        (0..self.space.rank()).map(|k| self.map(&self.space.unit(k))).collect()
    }

    pub fn elements(&self) -> Result<Vec<GrpMap>> {
        Ok(self.space.elements()?.iter().map(|c| self.map(c)).collect())
    }

    /// Subgroup of `hg.group` spanned by a subgroup of `space`.
    pub fn to_maps_span(&self, s: &SpanBasis) -> Vec<GrpMap> {
        s.rows.iter().map(|r| self.map(r)).collect()
    }
}

pub fn hom_r(src: &RModule, tgt: &RModule) -> Result<RHom> {
    if !src.same_ring(tgt) {
        return Err(mismatch("modules over different rings"));
    }
    let hg = hom_group(&src.add, &tgt.add)?;
    let k = src.ring.dim();
    let target = hg.group.power(k);
    let cols: Vec<Elem> = (0..hg.group.rank())
        .map(|t| {
            let phi = hg.to_map(&hg.group.unit(t));
            (0..k)
                .flat_map(|b| {
                    let d = phi.compose(&src.action[b]).sub(&tgt.action[b].compose(&phi));
                    hg.from_map(&d)
                })
                .collect()
        })
        .collect();
    let sol = kernel(&images_map(&hg.group, &target, &cols));
    let (space, incl) = sol.structure();
    Ok(RHom { src: src.clone(), tgt: tgt.clone(), hg, space, incl })
}

/// `End_R(M)` as an algebra on the coordinates of [`RHom::space`], product = composition.
#[derive(Clone, Debug)]
pub struct EndRing {
    pub hom: RHom,
    pub alg: FiniteAlgebra,
}

impl EndRing {
    pub fn to_map(&self, x: &[u64]) -> GrpMap {
        self.hom.map(x)
    }

    pub fn from_map(&self, f: &GrpMap) -> Option<Elem> {
        self.hom.coords(f)
    }
}

pub fn end_algebra(m: &RModule) -> Result<EndRing> {
    let hom = hom_r(m, m)?;
    let basis = hom.basis();
    let n = basis.len();
    let table = (0..n)
        .map(|a| {
            (0..n).map(|b| hom.coords(&basis[a].compose(&basis[b])).expect("End is closed under composition")).collect()
        })
        .collect();
    let one = hom.coords(&GrpMap::identity(&m.add)).expect("identity is R-linear");
    let alg = FiniteAlgebra { add: hom.space.clone(), table, one };
    Ok(EndRing { hom, alg })
}

/// An indecomposable module with its local endomorphism ring.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub module: RModule,
    pub end: EndRing,
    /// `J_i` in the coordinates of `end.hom.space`.
    pub radical: SpanBasis,
    /// `|E_i| = p^residue_degree`.
    pub residue_degree: u32,
}

impl LocalData {
    pub fn new(m: &RModule) -> Result<Self> {
        let end = end_algebra(m)?;
        if !is_local(&end.alg)? {
            return Err(Error::Precondition("module is not indecomposable (End is not local)".into()));
        }
        let radical = jacobson_radical(&end.alg);
        let residue_degree = end.alg.add.log_order() - radical.rows_log_order();
        Ok(LocalData { module: m.clone(), end, radical, residue_degree })
    }

    pub fn residue_order(&self) -> u128 {
        (self.module.ring.p() as u128).pow(self.residue_degree)
    }

    pub fn is_invertible(&self, x: &[u64]) -> bool {
        !self.radical.contains(x)
    }
}

/// Some R-isomorphism `m → n`, found by enumerating `Hom_R(m, n)` in index order.
pub fn is_isomorphic(m: &RModule, n: &RModule) -> Result<Option<GrpMap>> {
    let mut a = m.add.exps.clone();
    let mut b = n.add.exps.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b || !m.same_ring(n) {
        return Ok(None);
    }
    let hom = hom_r(m, n)?;
    let total = hom.space.check_cap("isomorphism search")?;
    for idx in 0..total {
        let f = hom.map(&hom.space.element(idx));
        if f.is_bijective() {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Inverse of a bijective additive map.
pub fn invert(f: &GrpMap) -> Option<GrpMap> {
    if !f.is_bijective() {
        return None;
    }
    let cols: Vec<Elem> = (0..f.cod.rank()).map(|u| solve(f, &f.cod.unit(u)).unwrap()).collect();
    Some(images_map(&f.cod, &f.dom, &cols))
}

/// One isotypic part of a Krull-Schmidt decomposition.
#[derive(Clone, Debug)]
pub struct Summand {
    pub module: RModule,
    /// Per copy: inclusion `module → M` and projection `M → module`.
    pub copies: Vec<(GrpMap, GrpMap)>,
}

impl Summand {
    pub fn multiplicity(&self) -> usize {
        self.copies.len()
    }
}

fn split(m: &RModule) -> Result<Vec<(RModule, GrpMap, GrpMap)>> {
    if m.is_zero() {
        return Ok(vec![]);
    }
    let end = end_algebra(m)?;
    let Some(e) = find_idempotent(&end.alg)? else {
        let id = GrpMap::identity(&m.add);
        return Ok(vec![(m.clone(), id.clone(), id)]);
    };
    let e = end.to_map(&e);
    let f = GrpMap::identity(&m.add).sub(&e);
    let mut out = Vec::new();
    for idem in [e, f] {
        let (sub, incl) = m.submodule(&image(&idem))?;
        let cols: Vec<Elem> = (0..m.add.rank()).map(|u| solve(&incl, &idem.column(u)).unwrap()).collect();
        let proj = images_map(&m.add, &sub.add, &cols);
        for (piece, i2, p2) in split(&sub)? {
            out.push((piece, incl.compose(&i2), p2.compose(&proj)));
        }
    }
    Ok(out)
}

/// Krull-Schmidt decomposition; isotypic parts in order of first appearance.
pub fn decompose_indecomposable(m: &RModule) -> Result<Vec<Summand>> {
    let mut parts: Vec<Summand> = Vec::new();
    for (piece, incl, proj) in split(m)? {
        let mut placed = false;
        for s in parts.iter_mut() {
            if let Some(phi) = is_isomorphic(&s.module, &piece)? {
                let psi = invert(&phi).expect("isomorphism");
                s.copies.push((incl.compose(&phi), psi.compose(&proj)));
                placed = true;
                break;
            }
        }
        if !placed {
            parts.push(Summand { module: piece, copies: vec![(incl, proj)] });
        }
    }
    Ok(parts)
}

/// `M = ⊕_i M_i^{a_i}` with coordinates concatenated block by block.
#[derive(Clone, Debug)]
pub struct BlockModule {
    pub parts: Vec<RModule>,
    pub mults: Vec<usize>,
    pub module: RModule,
}

impl BlockModule {
    pub fn new(parts: Vec<RModule>, mults: Vec<usize>) -> Result<Self> {
        if parts.len() != mults.len() || parts.is_empty() {
            return Err(mismatch("one multiplicity per summand"));
        }
        let mut module = RModule::zero(&parts[0].ring);
        for (m, &a) in parts.iter().zip(&mults) {
            if !m.same_ring(&parts[0]) {
                return Err(mismatch("summands over different rings"));
            }
            module = module.direct_sum(&m.power(a));
        }
        Ok(BlockModule { parts, mults, module })
    }

    /// First coordinate of copy `c` of summand `i`.
    pub fn offset(&self, i: usize, c: usize) -> usize {
        let before: usize = (0..i).map(|k| self.parts[k].add.rank() * self.mults[k]).sum();
        before + c * self.parts[i].add.rank()
    }

    pub fn copies(&self) -> Vec<(usize, usize)> {
        (0..self.parts.len()).flat_map(|i| (0..self.mults[i]).map(move |c| (i, c))).collect()
    }

    pub fn inclusion(&self, i: usize, c: usize) -> GrpMap {
        let part = &self.parts[i];
        let off = self.offset(i, c);
        let g = &self.module.add;
        let m = (0..g.rank()).map(|r| (0..part.add.rank()).map(|s| u64::from(r == off + s)).collect()).collect();
        GrpMap::new_unchecked(part.add.clone(), g.clone(), m)
    }

    pub fn projection(&self, i: usize, c: usize) -> GrpMap {
        let part = &self.parts[i];
        let off = self.offset(i, c);
        let g = &self.module.add;
        let m = (0..part.add.rank()).map(|s| (0..g.rank()).map(|r| u64::from(r == off + s)).collect()).collect();
        GrpMap::new_unchecked(g.clone(), part.add.clone(), m)
    }

    /// Component `M_j (copy d) → M_i (copy c)` of an endomorphism of `M`.
    pub fn component(&self, g: &GrpMap, i: usize, c: usize, j: usize, d: usize) -> GrpMap {
        self.projection(i, c).compose(g).compose(&self.inclusion(j, d))
    }

    /// Endomorphism of `M` assembled from components `(i,c) ← (j,d)`.
    pub fn assemble(&self, comp: impl Fn(usize, usize, usize, usize) -> GrpMap) -> GrpMap {
        let g = &self.module.add;
        let mut out = GrpMap::zero(g, g);
        for &(i, c) in &self.copies() {
            for &(j, d) in &self.copies() {
                let f = comp(i, c, j, d);
                if !f.is_zero() {
                    out = out.add(&self.inclusion(i, c).compose(&f).compose(&self.projection(j, d)));
                }
            }
        }
        out
    }
}

/// Pairwise non-isomorphic indecomposables with cached local data and hom groups.
#[derive(Clone, Debug)]
pub struct Context {
    pub modules: Vec<RModule>,
    pub local: Vec<LocalData>,
    /// `homs[j][i] = Hom_R(M_j, M_i)`.
    pub homs: Vec<Vec<RHom>>,
}

impl Context {
    pub fn new(modules: Vec<RModule>) -> Result<Self> {
        let local = modules.iter().map(LocalData::new).collect::<Result<Vec<_>>>()?;
        for a in 0..modules.len() {
            for b in a + 1..modules.len() {
                if is_isomorphic(&modules[a], &modules[b])?.is_some() {
                    return Err(Error::Precondition(format!("context modules {a} and {b} are isomorphic")));
                }
            }
        }
        let homs = modules
            .iter()
            .map(|mj| modules.iter().map(|mi| hom_r(mj, mi)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Context { modules, local, homs })
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    /// Non-invertible maps `M_j → M_i`: all of Hom when `i ≠ j`, the radical when `i = j`.
    pub fn rad(&self, j: usize, i: usize) -> SpanBasis {
        if i == j {
            self.local[i].radical.clone()
        } else {
            SpanBasis::full(&self.homs[j][i].space)
        }
    }

    pub fn block(&self, mults: &[usize]) -> Result<BlockModule> {
        BlockModule::new(self.modules.clone(), mults.to_vec())
    }
}

/// `LM` or `RM` subspace of `Hom_R(M_j, M_i)`, zero included.
#[derive(Clone, Debug)]
pub struct MaximalSpace {
    pub source: usize,
    pub target: usize,
    pub span: SpanBasis,
    /// Dimension over the residue field of the side that acts on it.
    pub dim: u32,
}

fn constrained(ctx: &Context, j: usize, i: usize, others: &[(usize, usize)], left: bool) -> SpanBasis {
    // left: g∘f = 0 for g ∈ rad(M_i, M_k); right: f∘g = 0 for g ∈ rad(M_k, M_j).
    let hom = &ctx.homs[j][i];
    let rad = ctx.rad(j, i);
    let (rgrp, rincl) = rad.structure();
    let mut pieces: Vec<(HomGroup, GrpMap)> = Vec::new();
    for &(a, b) in others {
        let rh = &ctx.homs[a][b];
        for row in &ctx.rad(a, b).rows {
            let g = rh.map(row);
            let hg = if left { &ctx.homs[j][b].hg } else { &ctx.homs[a][i].hg };
            pieces.push((hg.clone(), g));
        }
    }
    let target = pieces.iter().fold(PGroup::trivial(hom.space.p), |acc, (hg, _)| acc.direct_sum(&hg.group));
    let cols: Vec<Elem> = (0..rgrp.rank())
        .map(|u| {
            let f = hom.map(&rincl.apply(&rgrp.unit(u)));
            pieces
                .iter()
                .flat_map(|(hg, g)| if left { hg.from_map(&g.compose(&f)) } else { hg.from_map(&f.compose(g)) })
                .collect()
        })
        .collect();
    let k = kernel(&images_map(&rgrp, &target, &cols));
    let gens: Vec<Elem> = k.rows.iter().map(|r| rincl.apply(r)).collect();
    SpanBasis::from_gens_unchecked(&hom.space, &gens)
}

pub fn lm_morphisms(ctx: &Context, j: usize, i: usize) -> MaximalSpace {
    let others: Vec<(usize, usize)> = (0..ctx.len()).map(|k| (i, k)).collect();
    let span = constrained(ctx, j, i, &others, true);
    let dim = span.rows_log_order() / ctx.local[i].residue_degree;
    MaximalSpace { source: j, target: i, span, dim }
}

pub fn rm_morphisms(ctx: &Context, j: usize, i: usize) -> MaximalSpace {
    let others: Vec<(usize, usize)> = (0..ctx.len()).map(|k| (k, j)).collect();
    let span = constrained(ctx, j, i, &others, false);
    let dim = span.rows_log_order() / ctx.local[j].residue_degree;
    MaximalSpace { source: j, target: i, span, dim }
}

/// `R̃ = R ⊕ R⊗R` with `(R x R)^2 = 0`, and `M̃ = M` with `x` acting by `maps[t]` from
/// every copy of `M_{cycle[t]}` to the matching copy of `M_{cycle[t+1]}`.
pub fn build_tilde_ring(
    bm: &BlockModule,
    cycle: &[usize],
    maps: &[GrpMap],
) -> Result<(Arc<FiniteAlgebra>, RModule, GrpMap)> {
    if cycle.len() < 2 {
        return Err(Error::Precondition("cycle must have length > 1".into()));
    }
    if maps.len() != cycle.len() - 1 {
        return Err(mismatch("one map per chain edge 1→2→…→k required"));
    }
    let a = bm.mults[cycle[0]];
    if cycle.iter().any(|&v| bm.mults[v] != a) {
        return Err(Error::Precondition("multiplicities differ along the cycle".into()));
    }
    for (t, f) in maps.iter().enumerate() {
        let (s, d) = (&bm.parts[cycle[t]], &bm.parts[cycle[t + 1]]);
        if f.dom != s.add || f.cod != d.add || !s.is_r_linear(d, f) {
            return Err(invalid(format!("map {t} is not an R-map between consecutive cycle modules")));
        }
    }
    let r = bm.module.ring.clone();
    let n = r.dim();
    let mut exps = r.add.exps.clone();
    for j in 0..n {
        for k in 0..n {
            exps.push(r.add.exps[j].min(r.add.exps[k]));
        }
    }
    let add = PGroup { p: r.p(), exps };
    let t = |j: usize, k: usize| n + j * n + k;
    let mut table = vec![vec![add.zero(); add.rank()]; add.rank()];
    for i in 0..n {
        for j in 0..n {
            table[i][j][..n].copy_from_slice(&r.table[i][j]);
            for k in 0..n {
                for m in 0..n {
                    let c = r.table[i][j][m];
                    if c != 0 {
                        let mm = add.modulus(t(m, k));
                        table[i][t(j, k)][t(m, k)] = (table[i][t(j, k)][t(m, k)] + c) % mm;
                    }
                    let c = r.table[k][i][m];
                    if c != 0 {
                        let mm = add.modulus(t(j, m));
                        table[t(j, k)][i][t(j, m)] = (table[t(j, k)][i][t(j, m)] + c) % mm;
                    }
                }
            }
        }
    }
    let mut one = r.one.clone();
    one.resize(add.rank(), 0);
    let tilde = Arc::new(FiniteAlgebra::new(add, table, one)?);
    let x = bm.assemble(|i, c, j, d| match cycle.iter().position(|&v| v == j) {
        Some(pos) if pos + 1 < cycle.len() && cycle[pos + 1] == i && c == d => maps[pos].clone(),
        _ => GrpMap::zero(&bm.parts[j].add, &bm.parts[i].add),
    });
    let m = &bm.module;
    let mut action = m.action.clone();
    for j in 0..n {
        for k in 0..n {
            action.push(m.action[j].compose(&x).compose(&m.action[k]));
        }
    }
    let mt = RModule::new(tilde.clone(), m.add.clone(), action)?;
    Ok((tilde, mt, x))
}

/// `Z/p^l` as a ring.
pub fn chain_ring(p: u64, l: u32) -> Result<Arc<FiniteAlgebra>> {
    let add = PGroup::new(p, vec![l])?;
    Ok(Arc::new(FiniteAlgebra::new(add, vec![vec![vec![1]]], vec![1])?))
}

/// `Z/p^i` as a module over `Z/p^l`, `1 ≤ i ≤ l`.
pub fn chain_module(ring: &Arc<FiniteAlgebra>, i: u32) -> Result<RModule> {
    let add = PGroup::new(ring.p(), vec![i])?;
    let id = GrpMap::identity(&add);
    RModule::new(ring.clone(), add, vec![id])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force radical oracle: `x ∈ J` iff `y x` is nilpotent for every `y`.
    fn brute_radical(a: &FiniteAlgebra) -> Vec<Elem> {
        let els = a.add.elements().unwrap();
        els.iter().filter(|x| els.iter().all(|y| a.is_nilpotent(&a.mul(y, x)))).cloned().collect()
    }

    fn check_radical(a: &FiniteAlgebra) {
        let j = jacobson_radical(a);
        let brute = brute_radical(a);
        assert_eq!(j.order(), brute.len() as u128);
        assert!(brute.iter().all(|x| j.contains(x)));
    }

    fn matrix_algebra(p: u64, n: usize) -> FiniteAlgebra {
        let add = PGroup::free(p, 1, n * n);
        let mut one = add.zero();
        for i in 0..n {
            one[i * n + i] = 1;
        }
        FiniteAlgebra::from_fn(add.clone(), one, |a, b| {
            let (i, j) = (a / n, a % n);
            let (k, l) = (b / n, b % n);
            let mut v = add.zero();
            if j == k {
                v[i * n + l] = 1;
            }
            v
        })
        .unwrap()
    }

    fn upper_triangular(p: u64) -> FiniteAlgebra {
        // basis e11, e12, e22
        let add = PGroup::free(p, 1, 3);
        FiniteAlgebra::from_fn(add, vec![1, 0, 1], |a, b| match (a, b) {
            (0, 0) => vec![1, 0, 0],
            (0, 1) => vec![0, 1, 0],
            (1, 2) => vec![0, 1, 0],
            (2, 2) => vec![0, 0, 1],
            _ => vec![0, 0, 0],
        })
        .unwrap()
    }

    #[test]
    fn radical_examples() {
        let o2 = chain_ring(2, 2).unwrap();
        let j = jacobson_radical(&o2);
        assert_eq!(j.rows, vec![vec![2]]);
        let f3 = chain_ring(3, 1).unwrap();
        assert!(jacobson_radical(&f3).is_zero());
        for p in [2, 3] {
            let t = upper_triangular(p);
            assert_eq!(jacobson_radical(&t).rows, vec![vec![0, 1, 0]]);
            check_radical(&t);
            check_radical(&matrix_algebra(p, 2));
        }
        check_radical(&o2);
        // F_2[x]/(x^2) ⊗ F_2[y]/(y^2): dimension 4, radical of order 8.
        let add = PGroup::free(2, 1, 4);
        let a = FiniteAlgebra::from_fn(add, vec![1, 0, 0, 0], |a, b| {
            let (xa, ya) = (a & 1, a >> 1);
            let (xb, yb) = (b & 1, b >> 1);
            let mut v = vec![0; 4];
            if xa + xb < 2 && ya + yb < 2 {
                v[(xa + xb) | ((ya + yb) << 1)] = 1;
            }
            v
        })
        .unwrap();
        check_radical(&a);
    }

    #[test]
    fn rejects_bad_tables() {
        let add = PGroup::free(2, 1, 2);
        // e0 * e1 = e1 but e1 * e0 = 0 and e1*e1 = e0: not associative.
        let bad = FiniteAlgebra::from_fn(add, vec![1, 0], |a, b| match (a, b) {
            (0, x) => {
                let mut v = vec![0, 0];
                v[x] = 1;
                v
            }
            (1, 1) => vec![1, 1],
            _ => vec![0, 0],
        });
        assert!(bad.is_err());
    }

    #[test]
    fn hom_examples() {
        let o2 = chain_ring(2, 2).unwrap();
        let m1 = chain_module(&o2, 1).unwrap();
        let m2 = chain_module(&o2, 2).unwrap();
        let h = hom_r(&m1, &m2).unwrap();
        assert_eq!(h.order(), 2);
        assert_eq!(h.basis()[0].m, vec![vec![2]]);
        let e = end_algebra(&m2).unwrap();
        assert_eq!(e.alg.order(), 4);
        let e1 = end_algebra(&m1).unwrap();
        assert_eq!(e1.alg.order(), 2);
    }

    #[test]
    fn decomposition_examples() {
        let o2 = chain_ring(2, 2).unwrap();
        let m = RModule::free(&o2, 2);
        let d = decompose_indecomposable(&m).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].multiplicity(), 2);
        assert_eq!(d[0].module.add.exps, vec![2]);
        let k = chain_ring(2, 1).unwrap();
        let d = decompose_indecomposable(&RModule::free(&k, 3)).unwrap();
        assert_eq!((d.len(), d[0].multiplicity()), (1, 3));
        // Re-assembly is bijective.
        let total = d[0]
            .copies
            .iter()
            .fold(GrpMap::zero(&PGroup::free(2, 1, 3), &PGroup::free(2, 1, 3)), |acc, (i, p)| acc.add(&i.compose(p)));
        assert!(total.is_identity());
        let mixed = chain_module(&o2, 1).unwrap().direct_sum(&chain_module(&o2, 2).unwrap());
        let d = decompose_indecomposable(&mixed).unwrap();
        assert_eq!(d.len(), 2);
        for s in &d {
            assert!(is_local(&end_algebra(&s.module).unwrap().alg).unwrap());
        }
    }

    #[test]
    fn isomorphism_examples() {
        let o2 = chain_ring(2, 2).unwrap();
        let m2 = chain_module(&o2, 2).unwrap();
        let m1 = chain_module(&o2, 1).unwrap();
        assert!(is_isomorphic(&m2, &m2).unwrap().unwrap().is_identity());
        assert!(is_isomorphic(&m2, &m1.direct_sum(&m1)).unwrap().is_none());
    }

    #[test]
    fn chain_lm_spaces_hit_the_socle() {
        let l = 3;
        let r = chain_ring(2, l).unwrap();
        let mods: Vec<RModule> = (1..=l).map(|i| chain_module(&r, i).unwrap()).collect();
        let ctx = Context::new(mods).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                let lm = lm_morphisms(&ctx, j, i);
                if i + 1 < l as usize {
                    assert!(lm.span.is_zero(), "LM(O_{},O_{}) should vanish", j + 1, i + 1);
                } else {
                    assert_eq!(lm.dim, 1);
                    for row in &lm.span.rows {
                        let f = ctx.homs[j][i].map(row);
                        assert_eq!(f.apply(&[1])[0] % 4, 0, "image lies in the socle");
                    }
                }
                // Brute-force left maximality.
                let hom = &ctx.homs[j][i];
                for f in hom.space.elements().unwrap() {
                    let is_lm = ctx.rad(j, i).contains(&f)
                        && (0..3).all(|k| {
                            ctx.homs[i][k]
                                .space
                                .elements()
                                .unwrap()
                                .iter()
                                .filter(|g| ctx.rad(i, k).contains(g))
                                .all(|g| ctx.homs[i][k].map(g).compose(&hom.map(&f)).is_zero())
                        });
                    assert_eq!(is_lm, lm.span.contains(&f));
                }
            }
        }
    }
}
