use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_autrep"));
    c.env_remove("AUTREP_CAP_GROUP_ORDER").env_remove("AUTREP_CAP_SUBMODULES").env_remove("AUTREP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn autrep")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    repo().join("fixtures").join(name).to_string_lossy().into_owned()
}

#[test]
fn verify_fixture_exits_zero() {
    let o = run(&["verify", "p11-f3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("PASS p11-f3"), "{out}");
    assert!(out.contains("all checks passed"));
}

#[test]
fn unknown_fixture_is_an_error() {
    let o = run(&["verify", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let ring = dir.path().join("bad.ring");
    std::fs::write(&ring, "ring\n  p 3\n  additive 1\n  one 1\n  product 0 0 7 9\nend\n").unwrap();
    let o = run(&["inspect", ring.to_str().unwrap(), &fixture("p11-f3.module")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 5, column 3"), "{err}");

    let module = dir.path().join("bad.module");
    std::fs::write(&module, "module\n  additive 1 1\n  image 0 0 1 0\n  bogus\nend\n").unwrap();
    let o = run(&["inspect", &fixture("p11-f3.ring"), module.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4, column 3"), "{err}");
}

#[test]
fn shipped_fixtures_match_the_built_ins() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["examples", "--export", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut n = 0;
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        let shipped = std::fs::read_to_string(repo().join("fixtures").join(&name))
            .unwrap_or_else(|_| panic!("fixtures/{name} missing; rerun `autrep examples --export fixtures`"));
        assert_eq!(shipped, std::fs::read_to_string(&p).unwrap(), "fixtures/{name} is stale");
        n += 1;
    }
    assert_eq!(n, 3 * stdout(&o).lines().count());
}

#[test]
fn file_route_agrees_with_example_route() {
    let from_files = run(&["stratify", "--json", &fixture("gl2-f2.ring"), &fixture("gl2-f2.module")]);
    let from_example = run(&["stratify", "--json", "--example", "gl2-f2"]);
    assert_eq!(from_files.status.code(), Some(0));
    let mut a: serde_json::Value = serde_json::from_slice(&from_files.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&from_example.stdout).unwrap();
    // Names differ (file stem vs fixture name); everything else must agree.
    a["input"]["name"] = b["input"]["name"].clone();
    assert_eq!(a, b);
}

#[test]
fn json_is_independent_of_threads_and_seed() {
    let base = run(&["verify", "8", "--json", "--threads", "1"]);
    assert_eq!(base.status.code(), Some(0));
    for (threads, seed) in [("4", "7"), ("2", "12345")] {
        let o = run(&["verify", "8", "--json", "--threads", threads, "--seed", seed]);
        assert_eq!(o.stdout, base.stdout);
    }
    let a = run(&["stratify", "--json", "--example", "gl2-f3", "--threads", "1"]);
    let b = run(&["stratify", "--json", "--example", "gl2-f3", "--threads", "3", "--seed", "99"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lm_graph_of_three_module_context() {
    let ctx = run(&["lm-graph", "--json", &fixture("three-f2-111.ring"), &fixture("three-f2-111.context")]);
    let sum = run(&["lm-graph", "--json", &fixture("three-f2-111.ring"), &fixture("three-f2-111.module")]);
    assert_eq!(ctx.status.code(), Some(0));
    let a: serde_json::Value = serde_json::from_slice(&ctx.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&sum.stdout).unwrap();
    assert_eq!(a["lm_graph"], b["lm_graph"]);
    let g = &a["lm_graph"];
    assert_eq!(g["vertices"], 3);
    // Krull-Schmidt may order the summands differently; label vertices by composition length.
    let length = |v: &serde_json::Value| -> u64 {
        let i = v.as_u64().unwrap() as usize;
        a["input"]["context"][i]["additive"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum()
    };
    let mut edges: Vec<(u64, u64)> =
        g["edges"].as_array().unwrap().iter().map(|e| (length(&e[0]), length(&e[1]))).collect();
    edges.sort();
    assert_eq!(edges, vec![(1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)]);
    assert_eq!(g["valency_holds"], false);
}

#[test]
fn reports_conform_to_the_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo().join("schema/report.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::draft202012::new(&schema).expect("schema compiles");
    let runs: [&[&str]; 5] = [
        &["stratify", "--json", "--example", "p11-f3"],
        &["stratify", "--json", "--timings", "--example", "chain-p2-l2-11"],
        &["stratify", "--json", "--example", "three-f2-111"],
        &["inspect", "--json", "--example", "gl2-o2"],
        &["lm-graph", "--json", "--example", "cycle2-f2"],
    ];
    for args in runs {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| format!("{e} at {}", e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        assert_eq!(doc["schema"], "autrep-report/1");
    }
}

#[test]
fn caps_are_enforced() {
    let o = bin().args(["stratify", "--example", "gl2-f3"]).env("AUTREP_CAP_GROUP_ORDER", "10").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("10"));
}
