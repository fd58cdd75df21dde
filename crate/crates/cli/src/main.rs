use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use autrep::algebra::RModule;
use autrep::caps;
use autrep::fixtures::{self, Instance};
use autrep::format::{parse_modules, parse_ring, write_module, write_ring};
use autrep::report::{self, instance_from_module, ReportDocument};
use autrep::verify::{instance_sweep, run_criterion, CriterionReport, InstanceSweep, CRITERIA};

#[derive(Parser, Debug)]
#[command(
    name = "autrep",
    version,
    about = "Stratify the irreducibles of Aut_R(M) by functors and verify the structural theorems"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Largest group that is enumerated element by element.
    #[arg(long, global = true, env = "AUTREP_CAP_GROUP_ORDER")]
    cap_group_order: Option<u64>,
    /// Largest submodule lattice that is enumerated.
    #[arg(long, global = true, env = "AUTREP_CAP_SUBMODULES")]
    cap_submodules: Option<u64>,
    /// Worker threads for parallel jobs (default: all cores).
    #[arg(long, global = true, env = "AUTREP_THREADS")]
    threads: Option<usize>,
    /// Seed for the order in which verification jobs are scheduled; results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Emit plain text (the default).
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Args, Debug)]
struct Input {
    /// Ring file.
    ring: Option<PathBuf>,
    /// Module file; several module blocks are summed.
    module: Option<PathBuf>,
    /// Use a built-in fixture instead of files.
    #[arg(long, conflicts_with_all = ["ring", "module"])]
    example: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hom spaces, indecomposable summands, endomorphism rings and radicals.
    Inspect(Input),
    /// LM graph of the indecomposable summands of the modules in the given files.
    LmGraph {
        ring: Option<PathBuf>,
        contexts: Vec<PathBuf>,
        #[arg(long, conflicts_with_all = ["ring", "contexts"])]
        example: Option<String>,
    },
    /// Full stratification, functor morphings and certificates.
    Stratify {
        #[command(flatten)]
        input: Input,
        /// Include per-phase wall-clock times (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Check a fixture (`p11-f3`), a criterion (`1` … `10`), or everything with `--all`.
    Verify {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        /// Print per-criterion wall-clock times.
        #[arg(long)]
        timings: bool,
    },
    /// List the built-in fixtures, optionally writing them as ring and module files.
    Examples {
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_modules(ring_path: &Path, module_paths: &[PathBuf]) -> Result<Vec<RModule>> {
    let ring = parse_ring(&read(ring_path)?).with_context(|| ring_path.display().to_string())?;
    let mut out = Vec::new();
    for p in module_paths {
        out.extend(parse_modules(&ring, &read(p)?).with_context(|| p.display().to_string())?);
    }
    Ok(out)
}

fn load_instance(input: &Input) -> Result<Instance> {
    if let Some(name) = &input.example {
        return Ok(fixtures::instance_by_name(name)?);
    }
    let (Some(r), Some(m)) = (&input.ring, &input.module) else {
        bail!("give a ring file and a module file, or --example NAME");
    };
    let mods = load_modules(r, std::slice::from_ref(m))?;
    let sum = mods.iter().skip(1).fold(mods[0].clone(), |acc, x| acc.direct_sum(x));
    let name = m.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(instance_from_module(&name, &sum)?)
}

fn emit<T: serde::Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn emit_report(json: bool, doc: &ReportDocument) -> Result<()> {
    emit(json, doc, || doc.to_text())
}

/// Criteria that exercise a given fixture beyond its own sweep.
fn criteria_for(name: &str) -> &'static [u8] {
    match name {
        "p11-f3" => &[1],
        "gl2-f2" => &[2],
        "gl2-f3" => &[4, 5],
        "chain-p2-l2-02" | "chain-p2-l2-11" => &[4, 5],
        "gl3-f2" => &[3, 6],
        "gl2-o2" => &[7],
        "three-f2-111" => &[8],
        "grassmann-2-2" => &[9],
        _ => &[],
    }
}

/// Deterministic permutation of `0..n` from `seed` (splitmix64 keys).
fn schedule(n: usize, seed: u64) -> Vec<usize> {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut idx: Vec<usize> = (0..n).collect();
    if seed != 0 {
        idx.sort_by_key(|&i| mix(seed ^ i as u64));
    }
    idx
}

fn run_criteria(ids: &[u8], seed: u64) -> Result<Vec<CriterionReport>> {
    let order = schedule(ids.len(), seed);
    let mut done: Vec<(usize, CriterionReport)> =
        order.par_iter().map(|&k| run_criterion(ids[k]).map(|r| (k, r))).collect::<autrep::Result<_>>()?;
    done.sort_by_key(|x| x.0);
    Ok(done.into_iter().map(|x| x.1).collect())
}

#[derive(serde::Serialize)]
struct VerifyOutput {
    sweep: Option<InstanceSweep>,
    criteria: Vec<CriterionReport>,
    passed: bool,
}

fn criterion_text(r: &CriterionReport, timings: bool) -> String {
    let mut s = r.line(timings) + "\n";
    for c in &r.checks {
        s += &format!("    [{}] {}: {}\n", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail);
    }
    s
}

fn verify(name: Option<&str>, all: bool, timings: bool, g: &Global) -> Result<bool> {
    let (sweep, ids): (Option<InstanceSweep>, Vec<u8>) = if all {
        (None, CRITERIA.iter().map(|c| c.0).collect())
    } else {
        let Some(name) = name else { bail!("give a fixture name, a criterion number, or --all") };
        match name.trim_start_matches('c').parse::<u8>() {
            Ok(id) if CRITERIA.iter().any(|c| c.0 == id) => (None, vec![id]),
            _ => {
                let inst = fixtures::instance_by_name(name)?;
                (Some(instance_sweep(&inst)?), criteria_for(name).to_vec())
            }
        }
    };
    let mut criteria = run_criteria(&ids, g.seed)?;
    if !timings {
        criteria.iter_mut().for_each(|c| c.millis = 0);
    }
    let passed = sweep.as_ref().is_none_or(|s| s.passed()) && criteria.iter().all(|c| c.passed);
    let out = VerifyOutput { sweep, criteria, passed };
    emit(g.json, &out, || {
        let mut s = String::new();
        if let Some(sw) = &out.sweep {
            s += &format!("{} {}: {}\n", if sw.passed() { "PASS" } else { "FAIL" }, sw.name, sw.summary());
        }
        for r in &out.criteria {
            s += &criterion_text(r, timings);
        }
        s += if out.passed { "all checks passed\n" } else { "some checks FAILED\n" };
        s
    })?;
    Ok(passed)
}

fn export(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for name in fixtures::instance_names() {
        let inst = fixtures::instance_by_name(name)?;
        let m = inst.block()?.module;
        let ring = &m.ring;
        std::fs::write(dir.join(format!("{name}.ring")), write_ring(ring))?;
        std::fs::write(dir.join(format!("{name}.module")), write_module(&m))?;
        let ctx: String = inst.ctx.modules.iter().map(write_module).collect();
        std::fs::write(dir.join(format!("{name}.context")), ctx)?;
    }
    Ok(())
}

fn check_report(doc: &ReportDocument) -> bool {
    let certs_ok = doc.certificates.as_ref().is_none_or(|c| {
        c.theorem_a != Some(false)
            && c.theorem_b.iter().all(|e| e.surjective)
            && c.theorem_d.iter().all(|d| d.certified)
    });
    certs_ok && doc.table_is_complete()
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    if let Some(c) = g.cap_group_order {
        caps::set_group_order(c);
    }
    if let Some(c) = g.cap_submodules {
        caps::set_submodules(c);
    }
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match &cli.cmd {
        Command::Inspect(input) => {
            let doc = report::inspect(&load_instance(input)?)?;
            emit_report(g.json, &doc)?;
            Ok(true)
        }
        Command::LmGraph { ring, contexts, example } => {
            let inst = match (example, ring) {
                (Some(name), _) => fixtures::instance_by_name(name)?,
                (None, Some(r)) if !contexts.is_empty() => {
                    // Krull-Schmidt on the sum, so decomposable context files are accepted too.
                    let mods = load_modules(r, contexts)?;
                    let sum = mods.iter().skip(1).fold(mods[0].clone(), |acc, x| acc.direct_sum(x));
                    instance_from_module("context", &sum)?
                }
                _ => bail!("give a ring file and at least one context file, or --example NAME"),
            };
            emit_report(g.json, &report::lm_graph(&inst)?)?;
            Ok(true)
        }
        Command::Stratify { input, timings } => {
            let doc = report::stratify(&load_instance(input)?, *timings)?;
            emit_report(g.json, &doc)?;
            Ok(check_report(&doc))
        }
        Command::Verify { name, all, timings } => verify(name.as_deref(), *all, *timings, g),
        Command::Examples { export: dir } => {
            if let Some(dir) = dir {
                export(dir)?;
            }
            let list: Vec<(String, String)> = fixtures::instance_names()
                .into_iter()
                .map(|n| fixtures::instance_by_name(n).map(|i| (n.to_string(), i.description)))
                .collect::<autrep::Result<_>>()?;
            emit(g.json, &list, || list.iter().map(|(n, d)| format!("{n:<18} {d}\n")).collect())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
