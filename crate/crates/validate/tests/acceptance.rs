//! Full acceptance suite at the stated tolerances and trial counts. Prints one
//! PASS/FAIL line per criterion, followed by every failing check.

use std::io::Write;

use jdcc_validate::{run_suite, SuiteConfig, CRITERIA};

// Writes through the process handle so the lines show up even when the
// harness captures `println!` output of passing tests.
fn say(line: impl std::fmt::Display) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").expect("stdout is writable");
}

#[test]
fn acceptance_criteria() {
    let cfg = SuiteConfig::default();
    let report = run_suite(&cfg, |r| {
        say(r);
        for c in r.failures() {
            say(format_args!("    {c}"));
        }
    })
    .expect("suite runs");

    assert_eq!(report.criteria.len(), CRITERIA.len());
    let failed: Vec<u8> = report.criteria.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    say(format_args!(
        "acceptance: {}/{} criteria passed (seed {}, {} trials per outage estimate)",
        CRITERIA.len() - failed.len(),
        CRITERIA.len(),
        cfg.seed,
        cfg.trials
    ));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
