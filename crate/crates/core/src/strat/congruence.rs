//! `GL_2(O_2)`: irreducibles lying over the character `1 + πX ↦ ψ(X_21)` of the smallest
//! congruence subgroup, split by whether `U_12 = {[[1, b], [0, 1]]}` fixes their isotypic part.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::invmod;
use crate::lmgraph::{restrict_to_ni, NiSubgroup};
use crate::strat::{GroupData, Stratification};

#[derive(Clone, Debug, Serialize)]
pub struct E12Row {
    pub irreducible: usize,
    pub degree: u64,
    /// `⟨Res_N V, φ⟩`.
    pub phi_multiplicity: u64,
    /// `U_12` acts trivially on the `φ`-isotypic part of `V`.
    pub trivial_o1: bool,
    /// Additive invariants of the typical functor's value on `O_2` (`[2]` for `F_2`, `[1, 2]` for `F_1 ⊕ F_2`).
    pub functor_profile: Vec<u32>,
    pub aut_order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct E12Check {
    /// `|Stab_G(φ)|`; every element has even lower-left entry and `a ≡ d mod π`.
    pub stabilizer_order: usize,
    pub stabilizer_shape_ok: bool,
    pub rows: Vec<E12Row>,
}

impl E12Check {
    /// Trivial `O_1`-action ⇔ `F_2`-typical; otherwise `F_1 ⊕ F_2`-typical with `|Aut| = |Aut(O_1 ⊕ O_2)|`.
    pub fn holds(&self, aut_o1_o2: usize) -> bool {
        self.stabilizer_shape_ok
            && !self.rows.is_empty()
            && self.rows.iter().all(|r| {
                if r.trivial_o1 {
                    r.functor_profile == [2]
                } else {
                    r.functor_profile == [1, 2] && r.aut_order == aut_o1_o2
                }
            })
    }
}

/// `gd` must be `Aut(O_2^2)` over the context `⟨O_2⟩`, with `ni` its `N_1`.
pub fn e12_check(gd: &GroupData, st: &Stratification, ni: &NiSubgroup) -> Result<E12Check> {
    let m = &gd.block.module;
    if m.add.exps != [2, 2] || ni.a != 2 || ni.d != 2 {
        return Err(Error::Precondition("expects GL_2(O_2) acting on O_2^2".into()));
    }
    let p = ni.p;
    let q = p * p;
    let e12 = vec![vec![0, 1], vec![0, 0]];
    let stab = ni.stabilizer(gd, &e12);
    let stabilizer_order = stab.iter().filter(|&&b| b).count();
    let stabilizer_shape_ok = (0..gd.group.order()).filter(|&g| stab[g]).all(|g| {
        let e = gd.group.elem(g);
        let (a, c, d) = (e[0], e[2], e[3]);
        c % p == 0 && (a + q - d).is_multiple_of(p)
    });
    // H = N · U_12 and λ(n u) = φ(n); φ is trivial on N ∩ U_12.
    let u12: Vec<usize> = (0..gd.group.order())
        .filter(|&g| {
            let e = gd.group.elem(g);
            e[0] == 1 && e[2] == 0 && e[3] == 1
        })
        .collect();
    let mut lambda: std::collections::HashMap<usize, u64> = std::collections::HashMap::new();
    for t in 0..ni.order() {
        for &u in &u12 {
            let h = gd.group.mul(ni.elems[t], u);
            let e = ni.pairing(&e12, t);
            if let Some(&old) = lambda.get(&h) {
                if old != e {
                    return Err(Error::TheoremViolation("φ does not extend trivially across U_12".into()));
                }
            }
            lambda.insert(h, e);
        }
    }
    let l = gd.ell();
    let zeta = gd.table.zeta_p;
    let inv_h = invmod(lambda.len() as u64 % l, l);
    let mut rows = Vec::new();
    for v in 0..gd.table.len() {
        let chi = &gd.table.values[v];
        let res = restrict_to_ni(gd, ni, chi);
        let Some(phi) = res.constituents.iter().find(|c| c.a == e12) else { continue };
        let s = lambda.iter().fold(0u64, |acc, (&h, &e)| {
            (acc + chi[gd.classes.of(h)] * crate::groups::powmod(zeta, (p - e) % p, l)) % l
        });
        let fixed = s * inv_h % l;
        let c = st.typical[v];
        let mut profile = st.reps[c].add.exps.clone();
        profile.sort_unstable();
        rows.push(E12Row {
            irreducible: v,
            degree: gd.table.degrees[v],
            phi_multiplicity: phi.multiplicity,
            trivial_o1: fixed == phi.multiplicity,
            functor_profile: profile,
            aut_order: crate::groups::enumerate_aut(&st.reps[c])?.order(),
        });
    }
    Ok(E12Check { stabilizer_order, stabilizer_shape_ok, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::Category;
    use crate::lmgraph::LmAnalysis;
    use crate::{fixtures, groups::enumerate_aut};

    #[test]
    fn trivial_o1_action_matches_f2() {
        let inst = fixtures::instance_by_name("gl2-o2").unwrap();
        let cat = Category::new(inst.ctx.clone()).unwrap();
        let gd = GroupData::new(&inst.block().unwrap()).unwrap();
        let st = Stratification::new(&cat, &gd).unwrap();
        let lm = LmAnalysis::new(&inst.ctx, &gd).unwrap();
        let ni = lm.nis.iter().find(|n| n.a == 2).unwrap();
        let check = e12_check(&gd, &st, ni).unwrap();
        // Aut(O_1 ⊕ O_2) = Aut(Z/2 ⊕ Z/4), order 8.
        let o1o2 = crate::fixtures::chain_instance(2, 2, &[1, 1]).unwrap().block().unwrap().module;
        let aut = enumerate_aut(&o1o2).unwrap().order();
        assert_eq!(aut, 8);
        eprintln!("{check:?}");
        assert_eq!(check.stabilizer_order, 32);
        assert!(check.stabilizer_shape_ok);
        assert!(check.rows.iter().any(|r| r.trivial_o1) && check.rows.iter().any(|r| !r.trivial_o1));
        assert!(check.holds(aut));
    }
}
