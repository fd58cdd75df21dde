//! Explicit matrix groups acting on finite abelian p-groups, conjugacy classes,
//! Dixon character tables over `F_ℓ`, permutation characters and induction.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{hom_r, BlockModule, RModule};
use crate::caps;
use crate::error::{invalid, Error, Result};
use crate::linalg::{image, GrpMap, PGroup};

/// Class function with values in `F_ℓ`, indexed by conjugacy class.
pub type ClassFn = Vec<u64>;

/// A finite group of automorphisms of `space`, elements kept as flattened matrices in sorted order.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub space: PGroup,
    elems: Vec<Box<[u64]>>,
    index: HashMap<Box<[u64]>, u32>,
    inv: Vec<u32>,
    pub identity: usize,
    pub gens: Vec<usize>,
}

fn flatten(f: &GrpMap) -> Box<[u64]> {
    f.m.iter().flat_map(|r| r.iter().copied()).collect()
}

impl FiniteGroup {
    /// Group from a complete element list; closure under products is checked on generators.
    pub fn from_maps(space: &PGroup, maps: Vec<GrpMap>) -> Result<Self> {
        let mut elems: Vec<Box<[u64]>> = maps.iter().map(flatten).collect();
        Self::from_flat(space, std::mem::take(&mut elems))
    }

    fn from_flat(space: &PGroup, mut elems: Vec<Box<[u64]>>) -> Result<Self> {
        caps::check("group order", elems.len() as u128, caps::group_order())?;
        elems.sort();
        elems.dedup();
        let index: HashMap<Box<[u64]>, u32> = elems.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
        let id = flatten(&GrpMap::identity(space));
        let identity = *index.get(&id).ok_or_else(|| invalid("element list lacks the identity"))? as usize;
        let mut g = FiniteGroup { space: space.clone(), elems, index, inv: vec![], identity, gens: vec![] };
        g.gens = g.find_generators()?;
        for x in 0..g.order() {
            for &s in &g.gens {
                if g.try_mul(x, s).is_none() {
                    return Err(invalid("element list is not closed under multiplication"));
                }
            }
        }
        g.inv = (0..g.order()).map(|x| g.compute_inverse(x) as u32).collect();
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn elem(&self, i: usize) -> &[u64] {
        &self.elems[i]
    }

    pub fn mat(&self, i: usize) -> GrpMap {
        let n = self.space.rank();
        let m = (0..n).map(|r| self.elems[i][r * n..(r + 1) * n].to_vec()).collect();
        GrpMap::new_unchecked(self.space.clone(), self.space.clone(), m)
    }

    pub fn index_of(&self, flat: &[u64]) -> Option<usize> {
        self.index.get(flat).map(|&i| i as usize)
    }

    pub fn index_of_map(&self, f: &GrpMap) -> Option<usize> {
        self.index_of(&flatten(f))
    }

    fn raw_mul(&self, a: &[u64], b: &[u64]) -> Box<[u64]> {
        let n = self.space.rank();
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            let q = self.space.modulus(i);
            for k in 0..n {
                let x = a[i * n + k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + x * b[k * n + j]) % q;
                }
            }
        }
        out.into_boxed_slice()
    }

    fn try_mul(&self, a: usize, b: usize) -> Option<usize> {
        self.index_of(&self.raw_mul(&self.elems[a], &self.elems[b]))
    }

    /// Index of `a b` (apply `b` first).
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.try_mul(a, b).expect("group is closed")
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    fn compute_inverse(&self, a: usize) -> usize {
        let mut prev = self.identity;
        let mut cur = a;
        while cur != self.identity {
            prev = cur;
            cur = self.mul(cur, a);
        }
        prev
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn elem_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut cur = a;
        while cur != self.identity {
            cur = self.mul(cur, a);
            k += 1;
        }
        k
    }

    pub fn apply(&self, g: usize, x: &[u64]) -> Vec<u64> {
        let n = self.space.rank();
        (0..n)
            .map(|i| {
                let q = self.space.modulus(i);
                (0..n).fold(0u64, |acc, k| (acc + self.elems[g][i * n + k] * x[k]) % q)
            })
            .collect()
    }

    pub fn exponent(&self) -> u64 {
        (0..self.order()).map(|a| self.elem_order(a) as u64).fold(1, lcm)
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut stack = vec![self.identity];
        while let Some(x) = stack.pop() {
            for &s in gens {
                let y = self.try_mul(x, s).expect("closed under generators");
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    fn find_generators(&self) -> Result<Vec<usize>> {
        let mut gens = Vec::new();
        let mut inside = vec![false; self.order()];
        inside[self.identity] = true;
        let mut count = 1;
        for x in 0..self.order() {
            if inside[x] {
                continue;
            }
            gens.push(x);
            // Closure may fail if the list is not a group: surface as an error.
            let mut seen = vec![false; self.order()];
            seen[self.identity] = true;
            let mut stack = vec![self.identity];
            while let Some(y) = stack.pop() {
                for &s in &gens {
                    let z =
                        self.try_mul(y, s).ok_or_else(|| invalid("element list is not closed under multiplication"))?;
                    if !seen[z] {
                        seen[z] = true;
                        stack.push(z);
                    }
                }
            }
            inside = seen;
            count = inside.iter().filter(|&&b| b).count();
            if count == self.order() {
                break;
            }
        }
        debug_assert!(count == self.order() || self.order() == 1);
        Ok(gens)
    }

    /// Subgroup of elements satisfying `pred`, with its embedding into `self`.
    pub fn subgroup(&self, pred: impl Fn(usize) -> bool) -> Result<(FiniteGroup, Vec<usize>)> {
        let flat: Vec<Box<[u64]>> = (0..self.order()).filter(|&i| pred(i)).map(|i| self.elems[i].clone()).collect();
        let h = FiniteGroup::from_flat(&self.space, flat)?;
        let emb = (0..h.order()).map(|i| self.index_of(h.elem(i)).unwrap()).collect();
        Ok((h, emb))
    }

    /// Subgroup generated by `gens` (indices into `self`).
    pub fn generated(&self, gens: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        let inside = self.closure(gens);
        self.subgroup(|i| inside[i])
    }

    /// All elements as maps.
    pub fn maps(&self) -> Vec<GrpMap> {
        (0..self.order()).map(|i| self.mat(i)).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().all(|&a| self.gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        let set: HashSet<usize> = sub.iter().copied().collect();
        self.gens.iter().all(|&g| sub.iter().all(|&x| set.contains(&self.conj(g, x))))
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `Aut_R(M)` by enumerating `End_R(M)`.
pub fn enumerate_aut(m: &RModule) -> Result<FiniteGroup> {
    let hom = hom_r(m, m)?;
    let total = hom.space.check_cap("endomorphism enumeration")?;
    let mut flat = Vec::new();
    for idx in 0..total {
        let f = hom.map(&hom.space.element(idx));
        if f.is_bijective() {
            flat.push(flatten(&f));
        }
    }
    FiniteGroup::from_flat(&m.add, flat)
}

/// Conjugacy classes in canonical order: by size, identity first, then smallest member.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classes {
    pub group_order: u64,
    pub reps: Vec<usize>,
    pub sizes: Vec<u64>,
    pub class_of: Vec<u32>,
    /// Class of the inverses.
    pub inverse: Vec<usize>,
    pub elem_orders: Vec<u64>,
}

impl Classes {
    pub fn new(g: &FiniteGroup) -> Self {
        let n = g.order();
        let mut label = vec![u32::MAX; n];
        let mut raw: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if label[x] != u32::MAX {
                continue;
            }
            let id = raw.len() as u32;
            let mut members = vec![x];
            label[x] = id;
            let mut k = 0;
            while k < members.len() {
                let y = members[k];
                for &s in &g.gens {
                    let z = g.conj(s, y);
                    if label[z] == u32::MAX {
                        label[z] = id;
                        members.push(z);
                    }
                }
                k += 1;
            }
            raw.push(members);
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by_key(|&c| (raw[c].len(), !raw[c].contains(&g.identity), *raw[c].iter().min().unwrap()));
        let mut rank = vec![0u32; raw.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new as u32;
        }
        let class_of: Vec<u32> = label.iter().map(|&l| rank[l as usize]).collect();
        let reps: Vec<usize> = order.iter().map(|&c| *raw[c].iter().min().unwrap()).collect();
        let sizes: Vec<u64> = order.iter().map(|&c| raw[c].len() as u64).collect();
        let inverse = reps.iter().map(|&r| class_of[g.inv(r)] as usize).collect();
        let elem_orders = reps.iter().map(|&r| g.elem_order(r) as u64).collect();
        Classes { group_order: n as u64, reps, sizes, class_of, inverse, elem_orders }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn of(&self, x: usize) -> usize {
        self.class_of[x] as usize
    }

    pub fn centralizer_order(&self, k: usize) -> u64 {
        self.group_order / self.sizes[k]
    }
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

pub fn invmod(a: u64, m: u64) -> u64 {
    powmod(a, m - 2, m)
}

fn is_prime(n: u64) -> bool {
    crate::linalg::is_prime(n)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

const PRIME_SEARCH_BOUND: u64 = 1 << 40;

/// Smallest prime `ℓ ≡ 1 (mod modulus)` with `ℓ > lower`.
pub fn select_prime(modulus: u64, lower: u64) -> Result<u64> {
    let mut k = lower / modulus;
    loop {
        let l = k * modulus + 1;
        if l > PRIME_SEARCH_BOUND {
            return Err(Error::NoPrime { modulus, lower, bound: PRIME_SEARCH_BOUND });
        }
        if l > lower && is_prime(l) {
            return Ok(l);
        }
        k += 1;
    }
}

/// Smallest primitive root mod the prime `l`.
pub fn primitive_root(l: u64) -> u64 {
    let fs = prime_factors(l - 1);
    (2..l).find(|&g| fs.iter().all(|&q| powmod(g, (l - 1) / q, l) != 1)).unwrap_or(1)
}

/// Character table computed by Dixon's method; values are residues mod `ell`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharTable {
    pub ell: u64,
    pub classes: Classes,
    pub degrees: Vec<u64>,
    /// `values[i][k] = χ_i(g_k)`.
    pub values: Vec<ClassFn>,
    /// Primitive `p`-th root of unity realising the additive character `ψ`.
    pub zeta_p: u64,
    pub p: u64,
}

fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], l: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0u64; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let x = a[i][k];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = (out[i][j] + x * b[k][j]) % l;
            }
        }
    }
    out
}

/// Kernel basis of a matrix over `F_l` (columns of the returned vectors index the domain).
fn null_space(a: &[Vec<u64>], ncols: usize, l: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..ncols {
        let Some(r) = (row..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(row, r);
        let iv = invmod(m[row][c], l);
        for x in m[row].iter_mut() {
            *x = *x * iv % l;
        }
        for r2 in 0..m.len() {
            if r2 != row && m[r2][c] != 0 {
                let f = m[r2][c];
                for j in 0..ncols {
                    m[r2][j] = (m[r2][j] + l - f * m[row][j] % l) % l;
                }
            }
        }
        pivots.push(c);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (l - m[r][f]) % l;
            }
            v
        })
        .collect()
}

/// Row-reduce a list of vectors to reduced echelon form (basis of their span).
fn rref(vs: Vec<Vec<u64>>, l: u64) -> Vec<Vec<u64>> {
    if vs.is_empty() {
        return vs;
    }
    let n = vs[0].len();
    let mut m = vs;
    let mut row = 0;
    for c in 0..n {
        let Some(r) = (row..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(row, r);
        let iv = invmod(m[row][c], l);
        for x in m[row].iter_mut() {
            *x = *x * iv % l;
        }
        for r2 in 0..m.len() {
            if r2 != row && m[r2][c] != 0 {
                let f = m[r2][c];
                for j in 0..n {
                    m[r2][j] = (m[r2][j] + l - f * m[row][j] % l) % l;
                }
            }
        }
        row += 1;
        if row == m.len() {
            break;
        }
    }
    m.truncate(row);
    m
}

/// Characteristic polynomial (monic, ascending coefficients) by Faddeev-LeVerrier; needs `l > n`.
fn charpoly(a: &[Vec<u64>], l: u64) -> Vec<u64> {
    let n = a.len();
    let mut c = vec![0u64; n + 1];
    c[n] = 1;
    let mut mk = vec![vec![0u64; n]; n];
    for k in 1..=n {
        let mut next = mat_mul(a, &mk, l);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = (row[i] + c[n - k + 1]) % l;
        }
        mk = next;
        let am = mat_mul(a, &mk, l);
        let tr = (0..n).fold(0u64, |acc, i| (acc + am[i][i]) % l);
        c[n - k] = (l - tr) % l * invmod(k as u64 % l, l) % l;
    }
    c
}

/// Distinct roots in `F_ℓ`, ascending: `gcd(f, x^ℓ − x)` split by `gcd(g, (x + a)^{(ℓ−1)/2} − 1)`.
fn poly_roots(c: &[u64], l: u64) -> Vec<u64> {
    let f = poly_trim(c.to_vec());
    if f.len() <= 1 {
        return Vec::new();
    }
    if l == 2 {
        return (0..2).filter(|&x| poly_eval(&f, x, l) == 0).collect();
    }
    let xl = poly_powmod(&[0, 1], l, &f, l);
    let mut xlx = xl;
    xlx.resize(xlx.len().max(2), 0);
    xlx[1] = (xlx[1] + l - 1) % l;
    let g = poly_gcd(f, poly_trim(xlx), l);
    let mut roots = Vec::new();
    let mut stack = vec![g];
    let mut shift = 0u64;
    while let Some(g) = stack.pop() {
        match g.len() {
            0 | 1 => {}
            2 => roots.push((l - g[0] * invmod(g[1], l) % l) % l),
            _ => loop {
                shift += 1;
                let h = poly_powmod(&[shift % l, 1], (l - 1) / 2, &g, l);
                let mut h1 = h;
                h1.resize(h1.len().max(1), 0);
                h1[0] = (h1[0] + l - 1) % l;
                let d = poly_gcd(g.clone(), poly_trim(h1), l);
                if d.len() > 1 && d.len() < g.len() {
                    let (q, _) = poly_divrem(&g, &d, l);
                    stack.push(d);
                    stack.push(q);
                    break;
                }
            },
        }
    }
    roots.sort_unstable();
    roots
}

fn poly_eval(f: &[u64], x: u64, l: u64) -> u64 {
    f.iter().rev().fold(0u64, |acc, &a| ((acc as u128 * x as u128 + a as u128) % l as u128) as u64)
}

fn poly_trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_mul(a: &[u64], b: &[u64], l: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % l as u128) as u64;
        }
    }
    poly_trim(out)
}

/// Quotient and remainder; `b` nonzero.
fn poly_divrem(a: &[u64], b: &[u64], l: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = poly_trim(a.to_vec());
    let db = b.len() - 1;
    let inv = invmod(b[db], l);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - b.len();
        let c = (r[r.len() - 1] as u128 * inv as u128 % l as u128) as u64;
        q[k] = c;
        for (j, &y) in b.iter().enumerate() {
            r[k + j] = ((r[k + j] as u128 + (l - c) as u128 * y as u128) % l as u128) as u64;
        }
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, l: u64) -> Vec<u64> {
    while !b.is_empty() {
        let (_, r) = poly_divrem(&a, &b, l);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let inv = invmod(lead, l);
        for x in a.iter_mut() {
            *x = (*x as u128 * inv as u128 % l as u128) as u64;
        }
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], l: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_divrem(base, m, l).1;
    while e > 0 {
        if e & 1 == 1 {
            result = poly_divrem(&poly_mul(&result, &b, l), m, l).1;
        }
        b = poly_divrem(&poly_mul(&b, &b, l), m, l).1;
        e >>= 1;
    }
    result
}

/// Class multiplication coefficients `c[j][k][l] = #{x ∈ C_j : x^{-1} z_l ∈ C_k}`.
fn class_coefficients(g: &FiniteGroup, cl: &Classes) -> Vec<Vec<Vec<u64>>> {
    let r = cl.len();
    let mut c = vec![vec![vec![0u64; r]; r]; r];
    for (l, &z) in cl.reps.iter().enumerate() {
        for x in 0..g.order() {
            let y = g.mul(g.inv(x), z);
            c[cl.of(x)][cl.of(y)][l] += 1;
        }
    }
    c
}

/// `ℓ` must exceed twice every integer read back from `F_ℓ`: character degrees and the
/// multiplicities in permutation modules of up to `caps::tensor()` points.
pub fn ell_floor(group_order: u64) -> u64 {
    2 * group_order.max(crate::caps::tensor())
}

pub fn dixon_char_table(g: &FiniteGroup, cl: &Classes) -> Result<CharTable> {
    let ell = select_prime(lcm(g.exponent(), g.space.p), ell_floor(g.order() as u64))?;
    dixon_char_table_mod(g, cl, ell)
}

/// Dixon table over a caller-chosen `F_ℓ`, e.g. the field of an overgroup's table.
pub fn dixon_char_table_mod(g: &FiniteGroup, cl: &Classes, ell: u64) -> Result<CharTable> {
    let n = g.order() as u64;
    let p = g.space.p;
    let modulus = lcm(g.exponent(), p);
    if !is_prime(ell) || !(ell - 1).is_multiple_of(modulus) || ell <= 2 * n {
        return Err(invalid(format!("ℓ = {ell} must be a prime ≡ 1 mod {modulus} exceeding {}", 2 * n)));
    }
    let r = cl.len();
    let coeff = class_coefficients(g, cl);
    let mut spaces: Vec<Vec<Vec<u64>>> = vec![(0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect()];
    for j in 1..r {
        if spaces.iter().all(|s| s.len() == 1) {
            break;
        }
        // (A_j)_{k,l} = c_jkl acts on column vectors ω.
        let a: Vec<Vec<u64>> = (0..r).map(|k| (0..r).map(|l| coeff[j][k][l] % ell).collect()).collect();
        let mut next = Vec::new();
        for w in spaces {
            if w.len() == 1 {
                next.push(w);
                continue;
            }
            let d = w.len();
            let pivots: Vec<usize> = w.iter().map(|v| v.iter().position(|&x| x != 0).unwrap()).collect();
            // Columns of B: W-coordinates of A w_s.
            let images: Vec<Vec<u64>> = w
                .iter()
                .map(|v| (0..r).map(|k| (0..r).fold(0u64, |acc, l| (acc + a[k][l] * v[l]) % ell)).collect())
                .collect();
            let b: Vec<Vec<u64>> = (0..d).map(|t| (0..d).map(|s| images[s][pivots[t]]).collect()).collect();
            let roots = poly_roots(&charpoly(&b, ell), ell);
            let mut total = 0;
            for lam in roots {
                let shifted: Vec<Vec<u64>> = (0..d)
                    .map(|t| (0..d).map(|s| if s == t { (b[t][s] + ell - lam) % ell } else { b[t][s] }).collect())
                    .collect();
                let ker = null_space(&shifted, d, ell);
                if ker.is_empty() {
                    continue;
                }
                let vecs: Vec<Vec<u64>> = ker
                    .iter()
                    .map(|cf| (0..r).map(|k| (0..d).fold(0u64, |acc, s| (acc + cf[s] * w[s][k]) % ell)).collect())
                    .collect();
                total += vecs.len();
                next.push(rref(vecs, ell));
            }
            if total != d {
                return Err(Error::TheoremViolation("class-sum matrices are not simultaneously diagonalisable".into()));
            }
        }
        spaces = next;
    }
    if spaces.iter().any(|s| s.len() != 1) || spaces.len() != r {
        return Err(Error::TheoremViolation("Dixon splitting did not separate all characters".into()));
    }
    let mut rows: Vec<(u64, ClassFn)> = Vec::new();
    for s in spaces {
        let v = &s[0];
        let norm = invmod(v[0], ell);
        let omega: Vec<u64> = v.iter().map(|&x| x * norm % ell).collect();
        let s_sum = (0..r)
            .fold(0u64, |acc, k| (acc + omega[k] * omega[cl.inverse[k]] % ell * invmod(cl.sizes[k] % ell, ell)) % ell);
        let d2 = n % ell * invmod(s_sum, ell) % ell;
        let d = (1..=n)
            .take_while(|d| d * d <= n)
            .find(|d| d * d % ell == d2)
            .ok_or_else(|| Error::TheoremViolation("character degree is not an integer".into()))?;
        let vals: ClassFn = (0..r).map(|k| d * omega[k] % ell * invmod(cl.sizes[k] % ell, ell) % ell).collect();
        rows.push((d, vals));
    }
    rows.sort_by(|x, y| {
        let nt = |v: &ClassFn| v.iter().any(|&a| a != 1);
        (x.0, nt(&x.1), &x.1).cmp(&(y.0, nt(&y.1), &y.1))
    });
    let zeta_p = powmod(primitive_root(ell), (ell - 1) / p, ell);
    let table = CharTable {
        ell,
        classes: cl.clone(),
        degrees: rows.iter().map(|r| r.0).collect(),
        values: rows.into_iter().map(|r| r.1).collect(),
        zeta_p,
        p,
    };
    table.check()?;
    Ok(table)
}

impl CharTable {
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn group_order(&self) -> u64 {
        self.classes.group_order
    }

    /// `(1/|G|) Σ |C_k| a(g_k) b(g_k^{-1})` in `F_ℓ`.
    pub fn inner(&self, a: &[u64], b: &[u64]) -> u64 {
        let l = self.ell;
        let s = (0..self.classes.len())
            .fold(0u64, |acc, k| (acc + self.classes.sizes[k] % l * a[k] % l * b[self.classes.inverse[k]] % l) % l);
        s * invmod(self.group_order() % l, l) % l
    }

    /// Inner product of integer-valued class functions, lifted to an integer.
    pub fn inner_int(&self, a: &[u64], b: &[u64]) -> i64 {
        self.lift(self.inner(a, b))
    }

    /// `v` if `v < ℓ/2`, else `v - ℓ`.
    pub fn lift(&self, v: u64) -> i64 {
        if v < self.ell / 2 {
            v as i64
        } else {
            v as i64 - self.ell as i64
        }
    }

    pub fn from_int(&self, v: i64) -> u64 {
        v.rem_euclid(self.ell as i64) as u64
    }

    pub fn embed_perm(&self, pi: &[u128]) -> ClassFn {
        pi.iter().map(|&x| (x % self.ell as u128) as u64).collect()
    }

    /// `⟨χ_i, π⟩` for a permutation (or any integer-valued) character.
    pub fn multiplicity(&self, i: usize, pi: &[u128]) -> u64 {
        let m = self.inner_int(&self.values[i], &self.embed_perm(pi));
        debug_assert!(m >= 0);
        m.max(0) as u64
    }

    /// [`decompose`](Self::decompose), refusing characters whose multiplicities could wrap mod `ℓ`.
    pub fn decompose_checked(&self, pi: &[u128]) -> Result<Vec<u64>> {
        crate::caps::check("permutation module for exact multiplicities", pi[0], self.ell / 2 - 1)?;
        Ok(self.decompose(pi))
    }

    /// Decomposition of an integer-valued character into irreducibles.
    pub fn decompose(&self, pi: &[u128]) -> Vec<u64> {
        (0..self.len()).map(|i| self.multiplicity(i, pi)).collect()
    }

    pub fn trivial(&self) -> usize {
        0
    }

    pub fn conjugate(&self, chi: &[u64]) -> ClassFn {
        (0..chi.len()).map(|k| chi[self.classes.inverse[k]]).collect()
    }

    pub fn product(&self, a: &[u64], b: &[u64]) -> ClassFn {
        a.iter().zip(b).map(|(&x, &y)| x * y % self.ell).collect()
    }

    /// Index of an irreducible equal to `chi`, if any.
    pub fn find(&self, chi: &[u64]) -> Option<usize> {
        self.values.iter().position(|v| v == chi)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.group_order();
        let r = self.len();
        if r != self.classes.len() {
            return Err(Error::TheoremViolation("class count differs from irreducible count".into()));
        }
        if self.degrees.iter().map(|d| d * d).sum::<u64>() != n || self.degrees.iter().any(|d| !n.is_multiple_of(*d)) {
            return Err(Error::TheoremViolation("degree identities fail".into()));
        }
        for i in 0..r {
            for j in 0..r {
                if self.inner(&self.values[i], &self.values[j]) != u64::from(i == j) {
                    return Err(Error::TheoremViolation(format!("row orthogonality fails at ({i},{j})")));
                }
            }
        }
        let l = self.ell;
        for a in 0..r {
            for b in 0..r {
                let s =
                    (0..r).fold(0u64, |acc, i| (acc + self.values[i][a] * self.values[i][self.classes.inverse[b]]) % l);
                let want = if a == b { self.classes.centralizer_order(a) % l } else { 0 };
                if s != want {
                    return Err(Error::TheoremViolation(format!("column orthogonality fails at ({a},{b})")));
                }
            }
        }
        Ok(())
    }
}

/// `|ker(T - 1)|`: fixed points of a linear map.
pub fn linear_fixed_points(t: &GrpMap) -> u128 {
    let d = t.sub(&GrpMap::identity(&t.dom));
    let p = t.dom.p as u128;
    p.pow(t.dom.log_order() - image(&d).rows_log_order())
}

/// Permutation character of `G` acting linearly on `A` through `rho(class rep)`.
pub fn linear_perm_character(cl: &Classes, rho: impl Fn(usize) -> GrpMap) -> Vec<u128> {
    cl.reps.iter().map(|&g| linear_fixed_points(&rho(g))).collect()
}

/// Permutation character from an explicit action on `0..n`.
pub fn perm_character(cl: &Classes, n: usize, act: impl Fn(usize, usize) -> usize) -> Vec<u128> {
    cl.reps.iter().map(|&g| (0..n).filter(|&x| act(g, x) == x).count() as u128).collect()
}

/// Burnside count `(1/|G|) Σ |C_k| π(g_k)`.
pub fn orbit_count(cl: &Classes, pi: &[u128]) -> u128 {
    let s: u128 = pi.iter().zip(&cl.sizes).map(|(&a, &s)| a * s as u128).sum();
    debug_assert_eq!(s % cl.group_order as u128, 0);
    s / cl.group_order as u128
}

/// Orbits of the product action, from the two permutation characters.
pub fn orbits_on_product(cl: &Classes, a: &[u128], b: &[u128]) -> u128 {
    let prod: Vec<u128> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    orbit_count(cl, &prod)
}

/// Explicit orbit partition of `0..n` under the generators; returns an orbit label per point.
pub fn orbit_labels(g: &FiniteGroup, n: usize, act: impl Fn(usize, usize) -> usize) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for x in 0..n {
        if label[x] != usize::MAX {
            continue;
        }
        label[x] = count;
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            for &s in &g.gens {
                let z = act(s, y);
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

/// `Ind_H^G χ(g) = |C_G(g)|/|H| Σ_{h ∈ H ∩ g^G} χ(h)`.
pub fn induce(ct_g: &CharTable, h: &FiniteGroup, cl_h: &Classes, emb: &[usize], chi: &[u64]) -> ClassFn {
    let l = ct_g.ell;
    let cl = &ct_g.classes;
    let mut sums = vec![0u64; cl.len()];
    for x in 0..h.order() {
        let k = cl.of(emb[x]);
        sums[k] = (sums[k] + chi[cl_h.of(x)]) % l;
    }
    let inv_h = invmod(h.order() as u64 % l, l);
    (0..cl.len()).map(|k| sums[k] * (cl.centralizer_order(k) % l) % l * inv_h % l).collect()
}

pub fn restrict(cl_g: &Classes, cl_h: &Classes, emb: &[usize], chi: &[u64]) -> ClassFn {
    cl_h.reps.iter().map(|&x| chi[cl_g.of(emb[x])]).collect()
}

/// `U · L · Ū` factorisation of `Aut(⊕ M_i^{a_i})` by block shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Iwahori {
    pub u: Vec<usize>,
    pub l: Vec<usize>,
    pub ubar: Vec<usize>,
    /// `|U||L||Ū| = |G|` and the product map is injective.
    pub bijective: bool,
}

pub fn iwahori_decomposition(g: &FiniteGroup, bm: &BlockModule) -> Iwahori {
    let n = bm.module.add.rank();
    let type_of: Vec<usize> =
        (0..bm.parts.len()).flat_map(|i| std::iter::repeat_n(i, bm.parts[i].add.rank() * bm.mults[i])).collect();
    let shape = |x: usize| -> (bool, bool, bool) {
        let e = g.elem(x);
        let (mut is_l, mut is_u, mut is_ubar) = (true, true, true);
        for r in 0..n {
            for c in 0..n {
                let v = e[r * n + c];
                let (ti, tj) = (type_of[r], type_of[c]);
                if ti == tj {
                    if v != u64::from(r == c) {
                        is_u = false;
                        is_ubar = false;
                    }
                } else if v != 0 {
                    is_l = false;
                    if ti > tj {
                        is_u = false;
                    } else {
                        is_ubar = false;
                    }
                }
            }
        }
        (is_l, is_u, is_ubar)
    };
    let (mut u, mut l, mut ubar) = (vec![], vec![], vec![]);
    for x in 0..g.order() {
        let (a, b, c) = shape(x);
        if a {
            l.push(x);
        }
        if b {
            u.push(x);
        }
        if c {
            ubar.push(x);
        }
    }
    let mut bijective = u.len() * l.len() * ubar.len() == g.order();
    if bijective {
        let mut seen = vec![false; g.order()];
        'outer: for &a in &u {
            for &b in &l {
                let ab = g.mul(a, b);
                for &c in &ubar {
                    let y = g.mul(ab, c);
                    if seen[y] {
                        bijective = false;
                        break 'outer;
                    }
                    seen[y] = true;
                }
            }
        }
    }
    Iwahori { u, l, ubar, bijective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain_module, chain_ring};
    use crate::fixtures;

    fn gl(n: usize, q: u64) -> FiniteGroup {
        let i = fixtures::gl_field(n, q).unwrap();
        enumerate_aut(&i.block().unwrap().module).unwrap()
    }

    fn table(g: &FiniteGroup) -> CharTable {
        dixon_char_table(g, &Classes::new(g)).unwrap()
    }

    #[test]
    fn aut_orders() {
        let o2 = chain_ring(2, 2).unwrap();
        assert_eq!(enumerate_aut(&chain_module(&o2, 2).unwrap()).unwrap().order(), 2);
        assert_eq!(gl(2, 2).order(), 6);
        let m = RModule::free(&o2, 2);
        assert_eq!(enumerate_aut(&m).unwrap().order(), 96);
    }

    #[test]
    fn dixon_examples() {
        let t = table(&gl(2, 2));
        assert_eq!(t.degrees, vec![1, 1, 2]);
        let p = fixtures::quiver_instance(3, 1, 1).unwrap();
        let g = enumerate_aut(&p.block().unwrap().module).unwrap();
        assert_eq!(g.order(), 12);
        let t = table(&g);
        assert_eq!(t.degrees, vec![1, 1, 1, 1, 2, 2]);
        let t = table(&gl(2, 3));
        let mut d = t.degrees.clone();
        d.sort_unstable();
        assert_eq!(d, vec![1, 1, 2, 2, 2, 3, 3, 4]);
    }

    /// Independent oracle: number of classes by Burnside on the conjugation action.
    #[test]
    fn class_count_matches_commuting_pairs() {
        for g in [gl(2, 2), gl(2, 3)] {
            let n = g.order();
            let commuting =
                (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| g.mul(a, b) == g.mul(b, a)).count();
            assert_eq!(Classes::new(&g).len(), commuting / n);
        }
    }

    #[test]
    fn permutation_characters() {
        let g = gl(2, 2);
        let cl = Classes::new(&g);
        let t = table(&g);
        let pi = linear_perm_character(&cl, |x| g.mat(x));
        // Classes by size: identity, 3-cycles, transvections.
        assert_eq!(cl.elem_orders, vec![1, 3, 2]);
        assert_eq!(pi, vec![4, 1, 2]);
        assert_eq!(t.multiplicity(0, &pi), 2);
        assert_eq!(orbit_count(&cl, &pi), 2);
        let pts = g.space.elements().unwrap();
        let (_, k) = orbit_labels(&g, pts.len(), |s, x| g.space.index(&g.apply(s, &pts[x])));
        assert_eq!(k, 2);
        let sq: Vec<u128> = pi.iter().map(|x| x * x).collect();
        assert_eq!(t.multiplicity(1, &sq), 1);
        // Regular character.
        let reg: Vec<u128> = (0..cl.len()).map(|k| if k == 0 { g.order() as u128 } else { 0 }).collect();
        for i in 0..t.len() {
            assert_eq!(t.multiplicity(i, &reg), t.degrees[i]);
        }
    }

    #[test]
    fn induction_and_reciprocity() {
        let g = gl(2, 2);
        let t = table(&g);
        // Borel: fixes the line spanned by the first unit vector.
        let (b, emb) = g.subgroup(|x| g.elem(x)[2] == 0).unwrap();
        assert_eq!(b.order(), 2);
        let clb = Classes::new(&b);
        let tb = dixon_char_table_mod(&b, &clb, t.ell).unwrap();
        let ind = induce(&t, &b, &clb, &emb, &tb.values[0]);
        let dec: Vec<i64> = (0..t.len()).map(|i| t.inner_int(&t.values[i], &ind)).collect();
        assert_eq!(dec, vec![1, 0, 1]);
        let big = gl(2, 3);
        let clg = Classes::new(&big);
        let tg = table(&big);
        let (h, emb) = big.subgroup(|x| big.elem(x)[2] == 0).unwrap();
        let clh = Classes::new(&h);
        let th = dixon_char_table_mod(&h, &clh, tg.ell).unwrap();
        for a in 0..th.len() {
            for c in 0..tg.len() {
                let ind = induce(&tg, &h, &clh, &emb, &th.values[a]);
                let res = restrict(&clg, &clh, &emb, &tg.values[c]);
                assert_eq!(tg.inner(&ind, &tg.values[c]), th.inner(&th.values[a], &res));
            }
        }
        assert_eq!(induce(&tg, &big, &clg, &(0..big.order()).collect::<Vec<_>>(), &tg.values[0]), tg.values[0]);
    }

    #[test]
    fn iwahori_examples() {
        let p = fixtures::quiver_instance(3, 1, 1).unwrap();
        let bm = p.block().unwrap();
        let g = enumerate_aut(&bm.module).unwrap();
        let iw = iwahori_decomposition(&g, &bm);
        assert_eq!((iw.u.len(), iw.l.len(), iw.ubar.len()), (3, 4, 1));
        assert!(iw.bijective);
        let c = fixtures::chain_instance(2, 2, &[1, 1]).unwrap();
        let bm = c.block().unwrap();
        let g = enumerate_aut(&bm.module).unwrap();
        assert_eq!(g.order(), 8);
        let iw = iwahori_decomposition(&g, &bm);
        assert!(iw.bijective);
        let gl2 = fixtures::gl_field(2, 2).unwrap();
        let bm = gl2.block().unwrap();
        let g = enumerate_aut(&bm.module).unwrap();
        let iw = iwahori_decomposition(&g, &bm);
        assert_eq!((iw.u.len(), iw.l.len(), iw.ubar.len()), (1, 6, 1));
    }

    #[test]
    fn prime_selection() {
        let l = select_prime(6, 12).unwrap();
        assert_eq!(l, 13);
        assert!(select_prime(1 << 30, 1 << 41).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Chain-ring instances with `|Aut|` small enough for exhaustive checks.
        fn small_chain() -> impl Strategy<Value = (u64, u32, Vec<usize>)> {
            prop_oneof![
                (1u32..=3).prop_flat_map(|l| (Just(2u64), Just(l), prop::collection::vec(0usize..=2, l as usize))),
                (1u32..=2).prop_flat_map(|l| (Just(3u64), Just(l), prop::collection::vec(0usize..=1, l as usize))),
            ]
            .prop_filter("nonzero, at most two summands", |(_, _, m)| (1..=2).contains(&m.iter().sum::<usize>()))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn character_tables_are_orthonormal((p, l, mults) in small_chain()) {
                let inst = fixtures::chain_instance(p, l, &mults).unwrap();
                let g = enumerate_aut(&inst.block().unwrap().module).unwrap();
                let cl = Classes::new(&g);
                let t = dixon_char_table(&g, &cl).unwrap();
                prop_assert_eq!(t.len(), cl.len());
                prop_assert_eq!(t.degrees.iter().map(|d| d * d).sum::<u64>(), g.order() as u64);
                prop_assert_eq!(cl.sizes.iter().sum::<u64>(), g.order() as u64);
                for i in 0..t.len() {
                    prop_assert_eq!(g.order() as u64 % t.degrees[i], 0);
                    prop_assert_eq!(t.values[i][0], t.degrees[i] % t.ell);
                    for j in 0..t.len() {
                        prop_assert_eq!(t.inner(&t.values[i], &t.values[j]), u64::from(i == j));
                    }
                }
            }

            #[test]
            fn burnside_matches_orbit_enumeration((p, l, mults) in small_chain()) {
                let inst = fixtures::chain_instance(p, l, &mults).unwrap();
                let m = inst.block().unwrap().module;
                let g = enumerate_aut(&m).unwrap();
                let cl = Classes::new(&g);
                let pi = linear_perm_character(&cl, |k| g.mat(k));
                let elems = m.add.elements().unwrap();
                let index: HashMap<&Vec<u64>, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
                let (_, orbits) = orbit_labels(&g, elems.len(), |k, x| index[&g.mat(k).apply(&elems[x])]);
                prop_assert_eq!(orbit_count(&cl, &pi), orbits as u128);
            }
        }
    }
}
