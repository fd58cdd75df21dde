//! All ten acceptance criteria, one line each; exits non-zero if any criterion fails.
//! Runs without the libtest harness so the lines are printed on success too.

use std::process::ExitCode;

use autrep::verify::{run_criterion, CRITERIA};
use rayon::prelude::*;

fn main() -> ExitCode {
    let results: Vec<_> = CRITERIA.par_iter().map(|&(id, title)| (id, title, run_criterion(id))).collect();
    let mut failed = Vec::new();
    for (id, title, r) in &results {
        match r {
            Ok(r) => {
                println!("{}", r.line(true));
                for c in &r.checks {
                    println!("    [{}] {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail);
                }
                if !r.passed {
                    failed.push(*id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL {title}: error: {e}");
                failed.push(*id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
