//! Canonical-form linear algebra for finite abelian p-groups `⊕_j Z/p^{e_j}`.
//!
//! A subgroup of `G = ⊕ Z/p^{e_j}` is handled by embedding `G` into `(Z/p^L)^r`,
//! `L = max e_j`, via `x_j ↦ p^{L-e_j} x_j`, and taking the Howell form of the
//! embedded generators. Howell forms are unique, so two subgroups are equal iff
//! their [`SpanBasis`] rows coincide.

use serde::{Deserialize, Serialize};

use crate::caps;
use crate::error::{invalid, mismatch, Result};

/// Coordinates of a group element, coordinate `j` reduced mod `p^{e_j}`.
pub type Elem = Vec<u64>;

pub fn pow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("prime power overflows u64")
}

/// p-adic valuation of `x` inside `Z/p^l`; zero has valuation `l`.
pub fn val(mut x: u64, p: u64, l: u32) -> u32 {
    let m = pow(p, l);
    x %= m;
    if x == 0 {
        return l;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// Inverse of a unit modulo `m`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
fn subm(a: u64, b: u64, m: u64) -> u64 {
    (a + m - b % m) % m
}

/// The group `⊕_j Z/p^{e_j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PGroup {
    pub p: u64,
    pub exps: Vec<u32>,
}

impl PGroup {
    pub fn new(p: u64, exps: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        if exps.contains(&0) {
            return Err(invalid("exponents must be positive"));
        }
        Ok(PGroup { p, exps })
    }

    pub fn trivial(p: u64) -> Self {
        PGroup { p, exps: vec![] }
    }

    pub fn cyclic(p: u64, e: u32) -> Self {
        PGroup { p, exps: vec![e] }
    }

    /// `(Z/p^l)^r`.
    pub fn free(p: u64, l: u32, r: usize) -> Self {
        PGroup { p, exps: vec![l; r] }
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn max_exp(&self) -> u32 {
        self.exps.iter().copied().max().unwrap_or(0)
    }

    pub fn modulus(&self, j: usize) -> u64 {
        pow(self.p, self.exps[j])
    }

    /// `log_p |G|`.
    pub fn log_order(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).saturating_pow(self.log_order())
    }

    pub fn check_cap(&self, what: &str) -> Result<usize> {
        let n = self.order();
        caps::check(what, n, caps::group_order())?;
        Ok(n as usize)
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.rank()]
    }

    pub fn unit(&self, j: usize) -> Elem {
        let mut v = self.zero();
        v[j] = 1 % self.modulus(j);
        v
    }

    pub fn reduce(&self, v: &mut [u64]) {
        for (j, x) in v.iter_mut().enumerate() {
            *x %= self.modulus(j);
        }
    }

    pub fn reduced(&self, mut v: Elem) -> Elem {
        self.reduce(&mut v);
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        v.len() == self.rank() && v.iter().enumerate().all(|(j, &x)| x < self.modulus(j))
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Elem {
        (0..self.rank()).map(|j| (a[j] + b[j]) % self.modulus(j)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Elem {
        (0..self.rank()).map(|j| subm(a[j], b[j], self.modulus(j))).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Elem {
        (0..self.rank()).map(|j| subm(0, a[j], self.modulus(j))).collect()
    }

    pub fn scale(&self, c: u64, a: &[u64]) -> Elem {
        (0..self.rank()).map(|j| mulm(c, a[j], self.modulus(j))).collect()
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().enumerate().all(|(j, &x)| x % self.modulus(j) == 0)
    }

    /// `log_p` of the order of `a`.
    pub fn elem_log_order(&self, a: &[u64]) -> u32 {
        (0..self.rank()).map(|j| self.exps[j] - val(a[j], self.p, self.exps[j])).max().unwrap_or(0)
    }

    /// Element with mixed-radix index `idx`, last coordinate fastest.
    pub fn element(&self, mut idx: usize) -> Elem {
        let mut v = self.zero();
        for j in (0..self.rank()).rev() {
            let m = self.modulus(j) as usize;
            v[j] = (idx % m) as u64;
            idx /= m;
        }
        v
    }

    pub fn index(&self, v: &[u64]) -> usize {
        let mut idx = 0usize;
        for j in 0..self.rank() {
            idx = idx * self.modulus(j) as usize + (v[j] % self.modulus(j)) as usize;
        }
        idx
    }

    pub fn elements(&self) -> Result<Vec<Elem>> {
        let n = self.check_cap("group enumeration")?;
        Ok((0..n).map(|i| self.element(i)).collect())
    }

    pub fn direct_sum(&self, other: &PGroup) -> PGroup {
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        PGroup { p: self.p, exps }
    }

    pub fn power(&self, n: usize) -> PGroup {
        PGroup { p: self.p, exps: self.exps.iter().copied().cycle().take(self.rank() * n).collect() }
    }

    fn same_prime(&self, other: &PGroup) -> Result<()> {
        if self.p != other.p {
            return Err(mismatch(format!("prime {} vs {}", self.p, other.p)));
        }
        Ok(())
    }
}

/// Additive map; `m[i][j]` is the `i`-th codomain coordinate of the image of the `j`-th unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GrpMap {
    pub dom: PGroup,
    pub cod: PGroup,
    pub m: Vec<Vec<u64>>,
}

impl GrpMap {
    /// Validates `p^{max(0, f_i - e_j)} | a_ij` and reduces entries mod `p^{f_i}`.
    pub fn new(dom: PGroup, cod: PGroup, mut m: Vec<Vec<u64>>) -> Result<Self> {
        dom.same_prime(&cod)?;
        if m.len() != cod.rank() || m.iter().any(|r| r.len() != dom.rank()) {
            return Err(mismatch("matrix shape does not match codomain x domain"));
        }
        for (i, row) in m.iter_mut().enumerate() {
            let fi = cod.exps[i];
            for (j, a) in row.iter_mut().enumerate() {
                *a %= cod.modulus(i);
                let need = fi.saturating_sub(dom.exps[j]);
                if need > 0 && *a % pow(dom.p, need) != 0 {
                    return Err(invalid(format!(
                        "entry ({i},{j}) = {a} does not define a map Z/p^{} -> Z/p^{fi}",
                        dom.exps[j]
                    )));
                }
            }
        }
        Ok(GrpMap { dom, cod, m })
    }

    pub(crate) fn new_unchecked(dom: PGroup, cod: PGroup, m: Vec<Vec<u64>>) -> Self {
        GrpMap { dom, cod, m }
    }

    /// Map determined by the images of the domain units.
    pub fn from_images(dom: PGroup, cod: PGroup, images: &[Elem]) -> Result<Self> {
        if images.len() != dom.rank() {
            return Err(mismatch("one image per domain coordinate required"));
        }
        let m = (0..cod.rank()).map(|i| images.iter().map(|c| c[i]).collect()).collect();
        GrpMap::new(dom, cod, m)
    }

    pub fn zero(dom: &PGroup, cod: &PGroup) -> Self {
        GrpMap { dom: dom.clone(), cod: cod.clone(), m: vec![vec![0; dom.rank()]; cod.rank()] }
    }

    pub fn identity(g: &PGroup) -> Self {
        let mut m = vec![vec![0; g.rank()]; g.rank()];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1 % g.modulus(i);
        }
        GrpMap { dom: g.clone(), cod: g.clone(), m }
    }

    pub fn apply(&self, x: &[u64]) -> Elem {
        (0..self.cod.rank())
            .map(|i| {
                let q = self.cod.modulus(i);
                self.m[i].iter().zip(x).fold(0u64, |acc, (&a, &b)| (acc + mulm(a, b, q)) % q)
            })
            .collect()
    }

    /// Image of the `j`-th domain unit.
    pub fn column(&self, j: usize) -> Elem {
        self.m.iter().map(|r| r[j]).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GrpMap) -> GrpMap {
        debug_assert_eq!(self.dom, other.cod);
        let m = (0..self.cod.rank())
            .map(|i| {
                let q = self.cod.modulus(i);
                (0..other.dom.rank())
                    .map(|j| (0..self.dom.rank()).fold(0u64, |acc, k| (acc + mulm(self.m[i][k], other.m[k][j], q)) % q))
                    .collect()
            })
            .collect();
        GrpMap { dom: other.dom.clone(), cod: self.cod.clone(), m }
    }

    pub fn add(&self, other: &GrpMap) -> GrpMap {
        self.zip(other, |a, b, q| (a + b) % q)
    }

    pub fn sub(&self, other: &GrpMap) -> GrpMap {
        self.zip(other, subm)
    }

    pub fn scale(&self, c: u64) -> GrpMap {
        let m = self
            .m
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|&a| mulm(a, c, self.cod.modulus(i))).collect())
            .collect();
        GrpMap { dom: self.dom.clone(), cod: self.cod.clone(), m }
    }

    fn zip(&self, other: &GrpMap, f: impl Fn(u64, u64, u64) -> u64) -> GrpMap {
        debug_assert!(self.dom == other.dom && self.cod == other.cod);
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .enumerate()
            .map(|(i, (r, s))| r.iter().zip(s).map(|(&a, &b)| f(a, b, self.cod.modulus(i))).collect())
            .collect();
        GrpMap { dom: self.dom.clone(), cod: self.cod.clone(), m }
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|r| r.iter().all(|&a| a == 0))
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && *self == GrpMap::identity(&self.dom)
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &GrpMap) -> GrpMap {
        let dom = self.dom.direct_sum(&other.dom);
        let cod = self.cod.direct_sum(&other.cod);
        let mut m = vec![vec![0; dom.rank()]; cod.rank()];
        for (i, r) in self.m.iter().enumerate() {
            m[i][..r.len()].copy_from_slice(r);
        }
        for (i, r) in other.m.iter().enumerate() {
            m[self.cod.rank() + i][self.dom.rank()..].copy_from_slice(r);
        }
        GrpMap { dom, cod, m }
    }

    /// Surjective iff the induced map on `cod / p·cod` is onto (Nakayama).
    pub fn is_surjective(&self) -> bool {
        image(self).rows_log_order() == self.cod.log_order()
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.log_order() == self.cod.log_order() && self.is_surjective()
    }
}

/// Canonical rows over `Z/p^l` (Howell form), lexicographic pivot choice.
fn howell_raw(rows: Vec<Vec<u64>>, p: u64, l: u32, ncols: usize) -> Vec<Vec<u64>> {
    let q = pow(p, l);
    let mut work: Vec<Vec<u64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|x| x % q).collect::<Vec<_>>())
        .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
        .collect();
    let mut out: Vec<(usize, u32, Vec<u64>)> = Vec::new();
    for c in 0..ncols {
        if work.is_empty() {
            break;
        }
        let mut best: Option<(u32, usize)> = None;
        for (k, r) in work.iter().enumerate() {
            if r[c] != 0 {
                let v = val(r[c], p, l);
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, k));
                }
            }
        }
        let Some((v, k)) = best else { continue };
        let mut piv = work.swap_remove(k);
        let pv = pow(p, v);
        let u = inv_mod(piv[c] / pv, q).expect("unit part is invertible");
        for x in piv.iter_mut() {
            *x = mulm(*x, u, q);
        }
        for r in work.iter_mut() {
            if r[c] != 0 {
                let t = r[c] / pv;
                for (x, &y) in r.iter_mut().zip(&piv) {
                    *x = subm(*x, mulm(t, y, q), q);
                }
            }
        }
        if v > 0 {
            let s = pow(p, l - v);
            let extra: Vec<u64> = piv.iter().map(|&y| mulm(s, y, q)).collect();
            work.push(extra);
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
        out.push((c, v, piv));
    }
    for k in 0..out.len() {
        let (c, v, row) = (out[k].0, out[k].1, out[k].2.clone());
        let pv = pow(p, v);
        for r in out.iter_mut().take(k) {
            let t = r.2[c] / pv;
            if t != 0 {
                for (x, &y) in r.2.iter_mut().zip(&row) {
                    *x = subm(*x, mulm(t, y, q), q);
                }
            }
        }
    }
    out.into_iter().map(|(_, _, r)| r).collect()
}

/// Reduce `x` by Howell rows over `Z/p^l`; returns the remainder.
fn reduce_by(rows: &[Vec<u64>], x: &mut [u64], p: u64, l: u32) {
    let q = pow(p, l);
    for r in rows {
        let c = r.iter().position(|&a| a != 0).expect("Howell rows are nonzero");
        if x[c] == 0 {
            continue;
        }
        let pv = r[c];
        if !x[c].is_multiple_of(pv) {
            return;
        }
        let t = x[c] / pv;
        for (a, &b) in x.iter_mut().zip(r) {
            *a = subm(*a, mulm(t, b, q), q);
        }
    }
}

fn embed(g: &PGroup, l: u32, x: &[u64]) -> Vec<u64> {
    x.iter().enumerate().map(|(j, &a)| (a % g.modulus(j)) * pow(g.p, l - g.exps[j])).collect()
}

fn unembed(g: &PGroup, l: u32, x: &[u64]) -> Elem {
    x.iter()
        .enumerate()
        .map(|(j, &a)| {
            let s = pow(g.p, l - g.exps[j]);
            debug_assert_eq!(a % s, 0);
            (a / s) % g.modulus(j)
        })
        .collect()
}

/// A subgroup of `ambient`, stored as its canonical Howell rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpanBasis {
    pub ambient: PGroup,
    /// Canonical generators in ambient coordinates.
    pub rows: Vec<Elem>,
}

impl SpanBasis {
    pub fn from_gens(ambient: &PGroup, gens: &[Elem]) -> Result<Self> {
        for g in gens {
            if g.len() != ambient.rank() {
                return Err(mismatch(format!("row length {} vs ambient rank {}", g.len(), ambient.rank())));
            }
        }
        Ok(Self::from_gens_unchecked(ambient, gens))
    }

    pub(crate) fn from_gens_unchecked(ambient: &PGroup, gens: &[Elem]) -> Self {
        let l = ambient.max_exp();
        let emb = gens.iter().map(|g| embed(ambient, l, g)).collect();
        let rows = howell_raw(emb, ambient.p, l, ambient.rank());
        SpanBasis { ambient: ambient.clone(), rows: rows.iter().map(|r| unembed(ambient, l, r)).collect() }
    }

    pub fn zero(ambient: &PGroup) -> Self {
        SpanBasis { ambient: ambient.clone(), rows: vec![] }
    }

    pub fn full(ambient: &PGroup) -> Self {
        let gens: Vec<Elem> = (0..ambient.rank()).map(|j| ambient.unit(j)).collect();
        Self::from_gens_unchecked(ambient, &gens)
    }

    fn embedded(&self) -> (u32, Vec<Vec<u64>>) {
        let l = self.ambient.max_exp();
        (l, self.rows.iter().map(|r| embed(&self.ambient, l, r)).collect())
    }

    /// `log_p` of the subgroup order.
    pub fn rows_log_order(&self) -> u32 {
        let (l, emb) = self.embedded();
        emb.iter()
            .map(|r| {
                let c = r.iter().position(|&a| a != 0).unwrap();
                l - val(r[c], self.ambient.p, l)
            })
            .sum()
    }

    pub fn order(&self) -> u128 {
        (self.ambient.p as u128).saturating_pow(self.rows_log_order())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.rows_log_order() == self.ambient.log_order()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        let (l, emb) = self.embedded();
        let mut v = embed(&self.ambient, l, x);
        reduce_by(&emb, &mut v, self.ambient.p, l);
        v.iter().all(|&a| a == 0)
    }

    pub fn is_subset(&self, other: &SpanBasis) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn join(&self, other: &SpanBasis) -> SpanBasis {
        let mut gens = self.rows.clone();
        gens.extend(other.rows.iter().cloned());
        Self::from_gens_unchecked(&self.ambient, &gens)
    }

    pub fn join_elems(&self, extra: &[Elem]) -> SpanBasis {
        let mut gens = self.rows.clone();
        gens.extend(extra.iter().cloned());
        Self::from_gens_unchecked(&self.ambient, &gens)
    }

    pub fn intersect(&self, other: &SpanBasis) -> SpanBasis {
        // A ∩ B = image of ker(A ⊕ B → ambient, (a,b) ↦ a - b) under the first projection.
        let g = &self.ambient;
        let na = self.rows.len();
        let nb = other.rows.len();
        if na == 0 || nb == 0 {
            return SpanBasis::zero(g);
        }
        let l = g.max_exp();
        let free = PGroup::free(g.p, l, na + nb);
        let mut images: Vec<Elem> = self.rows.clone();
        images.extend(other.rows.iter().map(|r| g.neg(r)));
        let f = GrpMap::new_unchecked(
            free.clone(),
            g.clone(),
            (0..g.rank()).map(|i| images.iter().map(|c| c[i]).collect()).collect(),
        );
        let k = kernel(&f);
        let first = GrpMap::new_unchecked(
            free,
            g.clone(),
            (0..g.rank())
                .map(|i| images.iter().enumerate().map(|(j, c)| if j < na { c[i] } else { 0 }).collect())
                .collect(),
        );
        let gens: Vec<Elem> = k.rows.iter().map(|r| first.apply(r)).collect();
        Self::from_gens_unchecked(g, &gens)
    }

    /// Isomorphism `⊕ Z/p^{a_t} → self` (cyclic decomposition of the subgroup).
    pub fn structure(&self) -> (PGroup, GrpMap) {
        let g = &self.ambient;
        let l = g.max_exp().max(1);
        let t = self.rows.len();
        let free = PGroup::free(g.p, l, t);
        let f = GrpMap::new_unchecked(
            free.clone(),
            g.clone(),
            (0..g.rank()).map(|i| self.rows.iter().map(|c| c[i]).collect()).collect(),
        );
        let q = quotient(&kernel(&f));
        let images: Vec<Elem> = (0..q.group.rank()).map(|k| f.apply(&q.lift_rows[k])).collect();
        let incl = GrpMap::new_unchecked(
            q.group.clone(),
            g.clone(),
            (0..g.rank()).map(|i| images.iter().map(|c| c[i]).collect()).collect(),
        );
        (q.group, incl)
    }

    pub fn elements(&self) -> Result<Vec<Elem>> {
        let (s, incl) = self.structure();
        Ok(s.elements()?.iter().map(|x| incl.apply(x)).collect())
    }
}

/// Howell form of the span of `rows` inside `ambient`.
pub fn howell_form(ambient: &PGroup, rows: &[Elem]) -> Result<SpanBasis> {
    SpanBasis::from_gens(ambient, rows)
}

fn augmented(f: &GrpMap, l: u32) -> Vec<Vec<u64>> {
    let s = f.cod.rank();
    (0..f.dom.rank())
        .map(|j| {
            let mut row = embed(&f.cod, l, &f.column(j));
            row.resize(s + f.dom.rank(), 0);
            row[s + j] = pow(f.dom.p, l - f.dom.exps[j]);
            row
        })
        .collect()
}

fn joint_exp(f: &GrpMap) -> u32 {
    f.dom.max_exp().max(f.cod.max_exp()).max(1)
}

fn tail_span(f: &GrpMap, h: &[Vec<u64>], l: u32) -> SpanBasis {
    let s = f.cod.rank();
    let gens: Vec<Elem> =
        h.iter().filter(|r| r[..s].iter().all(|&a| a == 0)).map(|r| unembed(&f.dom, l, &r[s..])).collect();
    SpanBasis::from_gens_unchecked(&f.dom, &gens)
}

pub fn kernel(f: &GrpMap) -> SpanBasis {
    let l = joint_exp(f);
    let h = howell_raw(augmented(f, l), f.dom.p, l, f.cod.rank() + f.dom.rank());
    tail_span(f, &h, l)
}

pub fn image(f: &GrpMap) -> SpanBasis {
    let gens: Vec<Elem> = (0..f.dom.rank()).map(|j| f.column(j)).collect();
    SpanBasis::from_gens_unchecked(&f.cod, &gens)
}

pub fn preimage(f: &GrpMap, s: &SpanBasis) -> Result<SpanBasis> {
    if s.ambient != f.cod {
        return Err(mismatch("subgroup is not inside the codomain"));
    }
    let l = joint_exp(f);
    let mut rows = augmented(f, l);
    for r in &s.rows {
        let mut row = embed(&f.cod, l, r);
        row.resize(f.cod.rank() + f.dom.rank(), 0);
        rows.push(row);
    }
    let h = howell_raw(rows, f.dom.p, l, f.cod.rank() + f.dom.rank());
    Ok(tail_span(f, &h, l))
}

/// Some `x` with `f(x) = b`, chosen by reducing `(b, 0)` against the Howell form of the graph.
pub fn solve(f: &GrpMap, b: &[u64]) -> Option<Elem> {
    let l = joint_exp(f);
    let s = f.cod.rank();
    let h = howell_raw(augmented(f, l), f.dom.p, l, s + f.dom.rank());
    let mut x = embed(&f.cod, l, b);
    x.resize(s + f.dom.rank(), 0);
    reduce_by(&h, &mut x, f.dom.p, l);
    if x[..s].iter().any(|&a| a != 0) {
        return None;
    }
    let q = pow(f.dom.p, l);
    let neg: Vec<u64> = x[s..].iter().map(|&a| subm(0, a, q)).collect();
    Some(unembed(&f.dom, l, &neg))
}

/// A quotient `ambient / sub` with a cyclic decomposition.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub ambient: PGroup,
    pub sub: SpanBasis,
    pub group: PGroup,
    pub proj: GrpMap,
    /// `lift_rows[t]` is a coset representative of the `t`-th cyclic generator.
    pub lift_rows: Vec<Elem>,
}

impl Quotient {
    /// Deterministic coset representative.
    pub fn lift(&self, q: &[u64]) -> Elem {
        let mut v = self.ambient.zero();
        for (t, &c) in q.iter().enumerate() {
            if c != 0 {
                v = self.ambient.add(&v, &self.ambient.scale(c, &self.lift_rows[t]));
            }
        }
        v
    }
}

/// Smith normal form of the relations `sub ∪ {p^{e_i} u_i}` over `Z/p^L`.
pub fn quotient(sub: &SpanBasis) -> Quotient {
    let g = &sub.ambient;
    let p = g.p;
    let l = g.max_exp().max(1);
    let q = pow(p, l);
    let n = g.rank();
    let mut r: Vec<Vec<u64>> = sub.rows.clone();
    for i in 0..n {
        if g.exps[i] < l {
            let mut row = vec![0; n];
            row[i] = g.modulus(i);
            r.push(row);
        }
    }
    let mut cq: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut cqi = cq.clone();
    let mut diag: Vec<u32> = Vec::new();
    let mut t = 0;
    while t < n {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in r.iter().enumerate().skip(t) {
            for (j, &a) in row.iter().enumerate().skip(t) {
                if a != 0 {
                    let v = val(a, p, l);
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        r.swap(t, i);
        if j != t {
            for row in r.iter_mut() {
                row.swap(t, j);
            }
            for row in cq.iter_mut() {
                row.swap(t, j);
            }
            cqi.swap(t, j);
        }
        let pv = pow(p, v);
        let u = inv_mod(r[t][t] / pv, q).unwrap();
        for x in r[t].iter_mut() {
            *x = mulm(*x, u, q);
        }
        let pivot_row = r[t].clone();
        for (k, row) in r.iter_mut().enumerate() {
            if k != t && row[t] != 0 {
                let c = row[t] / pv;
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = subm(*x, mulm(c, y, q), q);
                }
            }
        }
        for jj in t + 1..n {
            let a = r[t][jj];
            if a != 0 {
                let c = a / pv;
                for row in r.iter_mut() {
                    row[jj] = subm(row[jj], mulm(c, row[t], q), q);
                }
                for row in cq.iter_mut() {
                    row[jj] = subm(row[jj], mulm(c, row[t], q), q);
                }
                let rj = cqi[jj].clone();
                for (x, y) in cqi[t].iter_mut().zip(rj) {
                    *x = (*x + mulm(c, y, q)) % q;
                }
            }
        }
        diag.push(v);
        t += 1;
    }
    while diag.len() < n {
        diag.push(l);
    }
    let keep: Vec<usize> = (0..n).filter(|&k| diag[k] > 0).collect();
    let group = PGroup { p, exps: keep.iter().map(|&k| diag[k]).collect() };
    let m: Vec<Vec<u64>> = keep
        .iter()
        .enumerate()
        .map(|(row_idx, &k)| (0..n).map(|i| cq[i][k] % group.modulus(row_idx)).collect())
        .collect();
    let proj = GrpMap::new_unchecked(g.clone(), group.clone(), m);
    let lift_rows = keep.iter().map(|&k| g.reduced(cqi[k].clone())).collect();
    Quotient { ambient: g.clone(), sub: sub.clone(), group, proj, lift_rows }
}

pub fn cokernel(f: &GrpMap) -> Quotient {
    quotient(&image(f))
}

/// `Hom_Z(A, B)` with coordinates `t_ij`, `a_ij = t_ij p^{max(0, f_i - e_j)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomGroup {
    pub dom: PGroup,
    pub cod: PGroup,
    pub group: PGroup,
}

impl HomGroup {
    pub fn to_map(&self, t: &[u64]) -> GrpMap {
        let (r, s) = (self.dom.rank(), self.cod.rank());
        let m = (0..s)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        let sh = self.cod.exps[i].saturating_sub(self.dom.exps[j]);
                        (t[i * r + j] * pow(self.dom.p, sh)) % self.cod.modulus(i)
                    })
                    .collect()
            })
            .collect();
        GrpMap::new_unchecked(self.dom.clone(), self.cod.clone(), m)
    }

    pub fn from_map(&self, f: &GrpMap) -> Elem {
        let (r, s) = (self.dom.rank(), self.cod.rank());
        let mut t = Vec::with_capacity(r * s);
        for i in 0..s {
            for j in 0..r {
                let sh = self.cod.exps[i].saturating_sub(self.dom.exps[j]);
                t.push((f.m[i][j] / pow(self.dom.p, sh)) % self.group.modulus(i * r + j));
            }
        }
        t
    }

    pub fn basis(&self) -> Vec<GrpMap> {
        (0..self.group.rank()).map(|k| self.to_map(&self.group.unit(k))).collect()
    }
}

pub fn hom_group(a: &PGroup, b: &PGroup) -> Result<HomGroup> {
    a.same_prime(b)?;
    let mut exps = Vec::with_capacity(a.rank() * b.rank());
    for &fi in &b.exps {
        for &ej in &a.exps {
            exps.push(ej.min(fi));
        }
    }
    Ok(HomGroup { dom: a.clone(), cod: b.clone(), group: PGroup { p: a.p, exps } })
}

/// Number of solutions of `f(x) = 0`, i.e. `|ker f|`, as a power of `p`.
pub fn kernel_log_order(f: &GrpMap) -> u32 {
    f.dom.log_order() - image(f).rows_log_order()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> PGroup {
        PGroup::cyclic(2, 2)
    }

    fn brute_span(g: &PGroup, gens: &[Elem]) -> std::collections::BTreeSet<Elem> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(g.zero());
        loop {
            let cur: Vec<Elem> = set.iter().cloned().collect();
            let before = set.len();
            for x in &cur {
                for y in gens {
                    set.insert(g.add(x, y));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn howell_examples() {
        let g = PGroup::free(2, 2, 2);
        let id = howell_form(&g, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(id.rows, vec![vec![1, 0], vec![0, 1]]);
        let two = howell_form(&z4(), &[vec![2]]).unwrap();
        assert_eq!(two.rows, vec![vec![2]]);
        let h = howell_form(&g, &[vec![1, 1], vec![2, 0]]).unwrap();
        assert_eq!(h.order(), 8);
        let s: std::collections::BTreeSet<Elem> = h.elements().unwrap().into_iter().collect();
        assert_eq!(s, brute_span(&g, &[vec![1, 1], vec![2, 0]]));
        assert!(howell_form(&g, &[vec![1]]).is_err());
    }

    #[test]
    fn kernel_image_examples() {
        let dbl = GrpMap::new(z4(), z4(), vec![vec![2]]).unwrap();
        assert_eq!(kernel(&dbl).rows, vec![vec![2]]);
        assert_eq!(image(&dbl).rows, vec![vec![2]]);
        let zero = GrpMap::zero(&z4(), &z4());
        assert_eq!(kernel(&zero).order(), 4);
        let red = GrpMap::new(z4(), PGroup::cyclic(2, 1), vec![vec![1]]).unwrap();
        assert_eq!(kernel(&red).rows, vec![vec![2]]);
        let c = cokernel(&dbl);
        assert_eq!(c.group.exps, vec![1]);
        assert_eq!(c.proj.apply(&[3]), vec![1]);
        let pre = preimage(&red, &SpanBasis::zero(&PGroup::cyclic(2, 1))).unwrap();
        assert_eq!(pre.rows, vec![vec![2]]);
    }

    #[test]
    fn solve_examples() {
        let dbl = GrpMap::new(z4(), z4(), vec![vec![2]]).unwrap();
        assert_eq!(solve(&dbl, &[2]), Some(vec![1]));
        assert_eq!(solve(&dbl, &[1]), None);
        let g = PGroup::new(3, vec![2, 1]).unwrap();
        let id = GrpMap::identity(&g);
        assert_eq!(solve(&id, &[5, 2]), Some(vec![5, 2]));
    }

    #[test]
    fn hom_group_examples() {
        let z2 = PGroup::cyclic(2, 1);
        assert_eq!(hom_group(&z4(), &z2).unwrap().group.order(), 2);
        let h = hom_group(&z2, &z4()).unwrap();
        assert_eq!(h.group.order(), 2);
        assert_eq!(h.to_map(&[1]).m, vec![vec![2]]);
        let a = PGroup::new(2, vec![2, 1]).unwrap();
        assert_eq!(hom_group(&a, &z4()).unwrap().group.order(), 8);
        assert!(hom_group(&z2, &PGroup::cyclic(3, 1)).is_err());
    }

    #[test]
    fn ill_defined_map_rejected() {
        assert!(GrpMap::new(PGroup::cyclic(2, 1), z4(), vec![vec![1]]).is_err());
    }

    #[test]
    fn structure_of_subgroup() {
        let g = PGroup::new(2, vec![3, 2]).unwrap();
        let s = howell_form(&g, &[vec![2, 1], vec![4, 2]]).unwrap();
        let (q, incl) = s.structure();
        assert_eq!(q.log_order(), s.rows_log_order());
        assert!(kernel(&incl).is_zero());
        assert_eq!(image(&incl), s);
    }

    #[test]
    fn intersection_matches_brute_force() {
        let g = PGroup::free(2, 2, 2);
        let a = howell_form(&g, &[vec![1, 1]]).unwrap();
        let b = howell_form(&g, &[vec![1, 3]]).unwrap();
        let i = a.intersect(&b);
        let sa = brute_span(&g, &a.rows);
        let sb = brute_span(&g, &b.rows);
        let both: std::collections::BTreeSet<Elem> = sa.intersection(&sb).cloned().collect();
        let si: std::collections::BTreeSet<Elem> = i.elements().unwrap().into_iter().collect();
        assert_eq!(si, both);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn group_and_gens() -> impl Strategy<Value = (PGroup, Vec<Elem>)> {
            (prop::sample::select(vec![2u64, 3]), prop::collection::vec(1u32..=3, 1..=3)).prop_flat_map(|(p, exps)| {
                let g = PGroup { p, exps };
                let n = g.order() as usize;
                let gg = g.clone();
                prop::collection::vec(0..n, 0..4)
                    .prop_map(move |ix| (gg.clone(), ix.iter().map(|&i| gg.element(i)).collect()))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn span_matches_closure((g, gens) in group_and_gens()) {
                let h = SpanBasis::from_gens(&g, &gens).unwrap();
                let brute = brute_span(&g, &gens);
                prop_assert_eq!(h.order(), brute.len() as u128);
                for x in g.elements().unwrap() {
                    prop_assert_eq!(h.contains(&x), brute.contains(&x));
                }
            }

            #[test]
            fn howell_is_canonical((g, gens) in group_and_gens(), c in 1u64..5) {
                let h = SpanBasis::from_gens(&g, &gens).unwrap();
                let mut other: Vec<Elem> = gens.iter().rev().cloned().collect();
                if gens.len() >= 2 {
                    other.push(g.add(&gens[0], &g.scale(c, &gens[1])));
                }
                let unit = if g.p == 2 { 1 } else { 2 };
                other = other.iter().map(|x| g.scale(unit, x)).collect();
                prop_assert_eq!(SpanBasis::from_gens(&g, &other).unwrap(), h.clone());
                prop_assert_eq!(SpanBasis::from_gens(&g, &h.rows).unwrap(), h);
            }

            #[test]
            fn kernel_solve_quotient((g, gens) in group_and_gens()) {
                let dom = PGroup { p: g.p, exps: vec![g.max_exp(); gens.len()] };
                let f = GrpMap::from_images(dom.clone(), g.clone(), &gens).unwrap();
                let k = kernel(&f);
                let els = dom.elements().unwrap();
                let mut nk = 0;
                for x in &els {
                    let fx = f.apply(x);
                    prop_assert_eq!(k.contains(x), g.is_zero(&fx));
                    if g.is_zero(&fx) { nk += 1; }
                    let y = solve(&f, &fx).unwrap();
                    prop_assert_eq!(f.apply(&y), fx);
                }
                prop_assert_eq!(k.order(), nk as u128);
                let im = image(&f);
                let q = quotient(&im);
                prop_assert_eq!(q.group.log_order() + im.rows_log_order(), g.log_order());
                for x in g.elements().unwrap() {
                    let px = q.proj.apply(&x);
                    prop_assert_eq!(q.group.is_zero(&px), im.contains(&x));
                    let back = q.lift(&px);
                    prop_assert!(im.contains(&g.sub(&x, &back)));
                }
            }
        }
    }
}
