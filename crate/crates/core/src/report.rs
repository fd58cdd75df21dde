//! Report documents emitted by the command-line front end. The JSON layout is versioned by
//! [`SCHEMA_VERSION`]; the matching JSON Schema ships as `schema/report.schema.json`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algebra::{decompose_indecomposable, is_local, jacobson_radical, FiniteAlgebra, RModule};
use crate::caps;
use crate::error::{Error, Result};
use crate::fixtures::Instance;
use crate::functors::{fingerprint, hom_functor, Category};
use crate::lmgraph::{LMGraph, LmAnalysis};
use crate::strat::{sweep, trivially_morphing, EpiCertificate, GroupData, Stratification};
use crate::verify::FULL_ROUTE_HOM_ORDER;

pub const SCHEMA_VERSION: &str = "autrep-report/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSummary {
    pub p: u64,
    pub additive: Vec<u32>,
    pub order: String,
    pub commutative: bool,
    pub local: bool,
    pub radical_order: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub index: usize,
    pub additive: Vec<u32>,
    pub multiplicity: usize,
    pub end_order: String,
    pub end_radical_order: String,
    pub residue_order: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSummary {
    pub name: String,
    pub ring: RingSummary,
    pub module_additive: Vec<u32>,
    pub module_order: String,
    pub context: Vec<ContextEntry>,
    /// `hom_orders[j][i] = |Hom_R(M_j, M_i)|`.
    pub hom_orders: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub order: usize,
    pub classes: usize,
    pub degrees: Vec<u64>,
    /// Characters are reported as residues modulo this prime.
    pub ell: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorSummary {
    pub class: usize,
    /// `|F(M_i)|` per context module.
    pub values: Vec<String>,
    /// Sorted exponents of `F(M_i)` and of its radical part, per context module.
    pub parts: Vec<Vec<u32>>,
    pub radical: Vec<Vec<u32>>,
    pub is_hom: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratRow {
    pub irreducible: usize,
    pub degree: u64,
    /// `None` when only the trivial-morphing test ran and the irreducible is not trivial.
    pub functor: Option<FunctorSummary>,
    pub aut_order: Option<usize>,
    pub vtilde_degree: Option<u64>,
    pub vtilde_character: Option<Vec<u64>>,
    pub trivial_morphing: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreePair {
    pub irreducible: usize,
    pub before: (u64, u64, usize),
    pub after: (u64, u64, usize),
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpiSummary {
    pub class: usize,
    pub aut_order: usize,
    pub target_dim: u64,
    pub char_rank: u64,
    pub gram_rank: Option<u64>,
    pub surjective: bool,
    pub injective: bool,
}

impl From<&EpiCertificate> for EpiSummary {
    fn from(e: &EpiCertificate) -> Self {
        EpiSummary {
            class: e.functor,
            aut_order: e.aut_order,
            target_dim: e.target_dim,
            char_rank: e.char_rank,
            gram_rank: e.gram_rank,
            surjective: e.surjective,
            injective: e.injective,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub irreducible: usize,
    pub case: String,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    /// Every irreducible has exactly one minimal functor; `None` when the poset was not built.
    pub theorem_a: Option<bool>,
    pub theorem_b: Vec<EpiSummary>,
    pub theorem_c: Vec<DegreePair>,
    pub theorem_d: Vec<ClassificationRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphReport {
    pub vertices: usize,
    /// `(source, target)`, 0-based, one entry per edge.
    pub edges: Vec<(usize, usize)>,
    pub valency_holds: Option<bool>,
    pub circles: Option<Vec<Vec<usize>>>,
    pub lm_equals_rm: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `"full"`, `"trivial-morphing"`, or `"none"` when no group was built.
    pub route: String,
    pub cap_group_order: u64,
    pub cap_submodules: u64,
    /// Wall-clock per phase; only filled when timings are requested, so reports stay reproducible.
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub input: InputSummary,
    pub group: Option<GroupSummary>,
    pub stratification: Vec<StratRow>,
    pub certificates: Option<Certificates>,
    pub lm_graph: Option<GraphReport>,
    pub diagnostics: Diagnostics,
}

/// Krull-Schmidt context and multiplicities of `m`.
pub fn instance_from_module(name: &str, m: &RModule) -> Result<Instance> {
    let parts = decompose_indecomposable(m)?;
    let modules = parts.iter().map(|s| s.module.clone()).collect();
    let mults = parts.iter().map(|s| s.multiplicity()).collect();
    Ok(Instance {
        name: name.into(),
        description: "module read from file".into(),
        ctx: crate::algebra::Context::new(modules)?,
        mults,
    })
}

pub fn ring_summary(r: &FiniteAlgebra) -> Result<RingSummary> {
    Ok(RingSummary {
        p: r.p(),
        additive: r.add.exps.clone(),
        order: r.order().to_string(),
        commutative: r.is_commutative(),
        local: is_local(r)?,
        radical_order: jacobson_radical(r).order().to_string(),
    })
}

pub fn input_summary(inst: &Instance) -> Result<InputSummary> {
    let ctx = &inst.ctx;
    let m = inst.block()?.module;
    let context = (0..ctx.len())
        .map(|i| ContextEntry {
            index: i,
            additive: ctx.modules[i].add.exps.clone(),
            multiplicity: inst.mults[i],
            end_order: ctx.local[i].end.alg.order().to_string(),
            end_radical_order: ctx.local[i].radical.order().to_string(),
            residue_order: ctx.local[i].residue_order().to_string(),
        })
        .collect();
    let hom_orders =
        (0..ctx.len()).map(|j| (0..ctx.len()).map(|i| ctx.homs[j][i].order().to_string()).collect()).collect();
    Ok(InputSummary {
        name: inst.name.clone(),
        ring: ring_summary(&ctx.modules[0].ring)?,
        module_additive: m.add.exps.clone(),
        module_order: m.order().to_string(),
        context,
        hom_orders,
    })
}

pub fn graph_report(inst: &Instance) -> GraphReport {
    let g = LMGraph::new(&inst.ctx);
    GraphReport {
        vertices: g.n,
        edges: g.edges(),
        valency_holds: (inst.mults.len() == g.n).then(|| g.valency_holds(&inst.mults)),
        circles: g.circles(),
        lm_equals_rm: g.lm_equals_rm(&inst.ctx),
    }
}

fn diagnostics(route: &str, timings: Option<BTreeMap<String, u64>>) -> Diagnostics {
    Diagnostics {
        route: route.into(),
        cap_group_order: caps::group_order(),
        cap_submodules: caps::submodules(),
        timings_ms: timings,
    }
}

/// Hom spaces, indecomposables, endomorphism rings and radicals; no group computation.
pub fn inspect(inst: &Instance) -> Result<ReportDocument> {
    Ok(ReportDocument {
        schema: SCHEMA_VERSION.into(),
        input: input_summary(inst)?,
        group: None,
        stratification: vec![],
        certificates: None,
        lm_graph: None,
        diagnostics: diagnostics("none", None),
    })
}

pub fn lm_graph(inst: &Instance) -> Result<ReportDocument> {
    let mut doc = inspect(inst)?;
    doc.lm_graph = Some(graph_report(inst));
    Ok(doc)
}

fn functor_summary(cat: &Category, st: &Stratification, c: usize) -> FunctorSummary {
    let q = &st.reps[c];
    let fp = fingerprint(cat, q);
    FunctorSummary {
        class: c,
        values: (0..cat.len()).map(|i| cat.part(q, i).order().to_string()).collect(),
        parts: fp.parts,
        radical: fp.radical,
        is_hom: c == st.hom_class,
    }
}

/// Full stratification, morphings and certificates; falls back to the trivial-morphing test
/// when `|Hom(M, M)|` is too large for the subquotient poset.
pub fn stratify(inst: &Instance, timings: bool) -> Result<ReportDocument> {
    let mut times = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |what: &str, times: &mut BTreeMap<String, u64>| {
        times.insert(what.to_string(), clock.elapsed().as_millis() as u64);
        clock = Instant::now();
    };
    let cat: Arc<Category> = Category::new(inst.ctx.clone())?;
    let gd = GroupData::new(&inst.block()?)?;
    lap("group", &mut times);
    let group = GroupSummary {
        order: gd.group.order(),
        classes: gd.classes.len(),
        degrees: gd.table.degrees.clone(),
        ell: gd.ell(),
    };
    let hom = hom_functor(&cat, &gd.block.mults)?;
    let full = hom.order() < FULL_ROUTE_HOM_ORDER;
    // N_i coordinates need prime residue fields; elsewhere the classification is skipped.
    let lm = match LmAnalysis::new(&inst.ctx, &gd) {
        Ok(lm) => Some(lm),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e),
    };
    let (rows, mut certs) = if full {
        let st = Stratification::new(&cat, &gd)?;
        let sw = sweep(&st, &gd)?;
        lap("stratification", &mut times);
        let rows = sw
            .morphings
            .iter()
            .map(|m| StratRow {
                irreducible: m.irreducible,
                degree: gd.table.degrees[m.irreducible],
                functor: Some(functor_summary(&cat, &st, m.functor)),
                aut_order: Some(m.aut_order),
                vtilde_degree: Some(m.vtilde_dim),
                vtilde_character: Some(m.vtilde.clone()),
                trivial_morphing: m.trivial,
            })
            .collect::<Vec<_>>();
        let certs = Certificates {
            theorem_a: Some(true),
            theorem_b: sw.epimorphisms.iter().map(EpiSummary::from).collect(),
            theorem_c: sw
                .morphings
                .iter()
                .map(|m| DegreePair {
                    irreducible: m.irreducible,
                    before: m.deg_in,
                    after: m.deg_out,
                    equal: m.deg_in == m.deg_out,
                })
                .collect(),
            theorem_d: vec![],
        };
        (rows, certs)
    } else {
        let triv = trivially_morphing(&cat, &gd)?.irreducibles;
        lap("trivial-morphing", &mut times);
        let rows = (0..gd.table.len())
            .map(|v| StratRow {
                irreducible: v,
                degree: gd.table.degrees[v],
                functor: None,
                aut_order: None,
                vtilde_degree: None,
                vtilde_character: None,
                trivial_morphing: triv.contains(&v),
            })
            .collect();
        (rows, Certificates { theorem_a: None, theorem_b: vec![], theorem_c: vec![], theorem_d: vec![] })
    };
    let trivial: Vec<usize> = rows.iter().filter(|r: &&StratRow| r.trivial_morphing).map(|r| r.irreducible).collect();
    for &v in trivial.iter().filter(|_| lm.is_some()) {
        let d = lm.as_ref().expect("filtered").classify(&inst.ctx, &gd, v, &trivial)?;
        certs.theorem_d.push(ClassificationRow { irreducible: v, case: d.label().into(), certified: d.certified() });
    }
    lap("classification", &mut times);
    Ok(ReportDocument {
        schema: SCHEMA_VERSION.into(),
        input: input_summary(inst)?,
        group: Some(group),
        stratification: rows,
        certificates: Some(certs),
        lm_graph: Some(graph_report(inst)),
        diagnostics: diagnostics(if full { "full" } else { "trivial-morphing" }, timings.then_some(times)),
    })
}

impl ReportDocument {
    /// Every irreducible appears exactly once in the stratification table.
    pub fn table_is_complete(&self) -> bool {
        match &self.group {
            None => self.stratification.is_empty(),
            Some(g) => {
                let mut seen: Vec<usize> = self.stratification.iter().map(|r| r.irreducible).collect();
                seen.sort_unstable();
                seen == (0..g.degrees.len()).collect::<Vec<_>>()
            }
        }
    }

    /// Plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let i = &self.input;
        s += &format!("instance {}\n", i.name);
        s += &format!(
            "ring: p = {}, additive {:?}, order {}, radical order {}, commutative {}, local {}\n",
            i.ring.p, i.ring.additive, i.ring.order, i.ring.radical_order, i.ring.commutative, i.ring.local
        );
        s += &format!("module: additive {:?}, order {}\n", i.module_additive, i.module_order);
        for c in &i.context {
            s += &format!(
                "  M_{} additive {:?} x{}  |End| {}  |J(End)| {}  residue field {}\n",
                c.index + 1,
                c.additive,
                c.multiplicity,
                c.end_order,
                c.end_radical_order,
                c.residue_order
            );
        }
        s += "  |Hom(M_j, M_i)| (row j, column i):\n";
        for row in &i.hom_orders {
            s += &format!("    {}\n", row.join(" "));
        }
        if let Some(g) = &self.lm_graph {
            let edges: Vec<String> = g.edges.iter().map(|(a, b)| format!("{}→{}", a + 1, b + 1)).collect();
            s += &format!("LM graph: {} vertices, edges [{}]\n", g.vertices, edges.join(", "));
            if let Some(v) = g.valency_holds {
                s += &format!("  valency D_i ≤ a_i: {v}\n");
            }
            s += &format!("  circles: {:?}, LM = RM: {}\n", g.circles, g.lm_equals_rm);
        }
        if let Some(g) = &self.group {
            s += &format!(
                "Aut(M): order {}, {} classes, degrees {:?} (characters mod {})\n",
                g.order, g.classes, g.degrees, g.ell
            );
        }
        for r in &self.stratification {
            match &r.functor {
                Some(f) => {
                    s += &format!(
                        "  V_{:<3} dim {:<3} → F#{:<3} values {:?}{}  |Aut F| {}  dim Ṽ {}\n",
                        r.irreducible,
                        r.degree,
                        f.class,
                        f.values,
                        if f.is_hom { " (Hom(M,−))" } else { "" },
                        r.aut_order.unwrap_or(0),
                        r.vtilde_degree.unwrap_or(0)
                    );
                }
                None => {
                    s += &format!(
                        "  V_{:<3} dim {:<3} trivial morphing {}\n",
                        r.irreducible, r.degree, r.trivial_morphing
                    )
                }
            }
        }
        if let Some(c) = &self.certificates {
            if let Some(a) = c.theorem_a {
                s += &format!("unique associated functors: {a}\n");
            }
            if !c.theorem_b.is_empty() {
                let ok = c.theorem_b.iter().all(|e| e.surjective);
                s +=
                    &format!("Φ_F surjective for all {} functors with typical irreducibles: {ok}\n", c.theorem_b.len());
            }
            if !c.theorem_c.is_empty() {
                let eq = c.theorem_c.iter().filter(|d| d.equal).count();
                s += &format!("degree inequality: {} irreducibles, {eq} with equality\n", c.theorem_c.len());
            }
            for d in &c.theorem_d {
                s += &format!("  V_{} classified as {} (certified {})\n", d.irreducible, d.case, d.certified);
            }
        }
        s += &format!("route: {}\n", self.diagnostics.route);
        if let Some(t) = &self.diagnostics.timings_ms {
            for (k, v) in t {
                s += &format!("  {k}: {v} ms\n");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn stratify_report_is_complete_and_reproducible() {
        let inst = fixtures::instance_by_name("p11-f3").unwrap();
        let a = stratify(&inst, false).unwrap();
        let b = stratify(&inst, false).unwrap();
        assert_eq!(a, b);
        assert!(a.table_is_complete());
        assert_eq!(a.diagnostics.route, "full");
        let json = serde_json::to_string(&a).unwrap();
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(a.to_text().contains("Aut(M): order 12"));
    }

    #[test]
    fn module_file_route_recovers_the_context() {
        let inst = fixtures::instance_by_name("chain-p2-l2-11").unwrap();
        let m = inst.block().unwrap().module;
        let again = instance_from_module("chain", &m).unwrap();
        let mut a: Vec<(Vec<u32>, usize)> =
            again.ctx.modules.iter().map(|x| x.add.exps.clone()).zip(again.mults.clone()).collect();
        a.sort();
        assert_eq!(a, vec![(vec![1], 1), (vec![2], 1)]);
        let doc = inspect(&again).unwrap();
        assert_eq!(doc.input.module_order, "8");
    }
}
