//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion failed. Runs without the libtest harness so the lines are
//! always shown by `cargo test`.

use std::process::ExitCode;

use hypercone_core::acceptance::{criterion_ids, run_criterion, FaultInjection, Suite};

fn main() -> ExitCode {
    let seed = std::env::var("HYPERCONE_ACCEPT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    println!("acceptance suite, seed {seed}");
    let mut failed = Vec::new();
    for id in criterion_ids(Suite::All) {
        let row = match run_criterion(id, seed, FaultInjection::default()) {
            Ok(row) => row,
            Err(e) => {
                println!("{id} ERROR {e}");
                failed.push(id.to_string());
                continue;
            }
        };
        println!("{}", row.line());
        if !row.passed {
            failed.push(row.id.to_string());
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
