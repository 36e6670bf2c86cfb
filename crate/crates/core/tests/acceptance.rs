//! The acceptance gate: every top-level criterion at its stated scale and
//! wall-clock budget, one pass/fail line each. Run with `--nocapture` to
//! watch the lines as they print:
//!
//! ```text
//! cargo test -p mf-core --test acceptance -- --nocapture
//! ```

use std::time::{Duration, Instant};

use mf_core::suite::{run_one, RunReport, SuiteKind};
use mf_core::Limits;

struct CriterionResult {
    name: &'static str,
    pass: bool,
    instances: usize,
    failures: usize,
    elapsed: Duration,
    budget: Duration,
    lines: Vec<String>,
}

fn run_criterion(
    name: &'static str,
    kind: SuiteKind,
    seed: u64,
    count: usize,
    budget: Duration,
) -> CriterionResult {
    let limits = Limits::default();
    let started = Instant::now();
    let mut lines = Vec::new();
    let outcome = run_one(kind, seed, count, &limits, &mut |r: RunReport| {
        lines.push(r.canonical_json());
    })
    .expect("suite runs to completion");
    let elapsed = started.elapsed();
    let pass = outcome.pass && elapsed < budget;
    CriterionResult {
        name,
        pass,
        instances: outcome.instances,
        failures: outcome.failures,
        elapsed,
        budget,
        lines,
    }
}

fn report(result: &CriterionResult) {
    println!(
        "criterion {}: {} ({} instances, {} failures, {:.2?} of {:.2?} budget)",
        result.name,
        if result.pass { "PASS" } else { "FAIL" },
        result.instances,
        result.failures,
        result.elapsed,
        result.budget,
    );
}

#[test]
fn acceptance() {
    let specs: [(&'static str, SuiteKind, u64, usize, u64); 7] = [
        ("1 semiring-axiom suite", SuiteKind::SemiringAxioms, 1, 1000, 10),
        ("2 outer-measure axiom suite", SuiteKind::OuterAxioms, 2, 50, 30),
        ("3 product exactness", SuiteKind::ProductExactness, 3, 500, 20),
        ("4 certification path", SuiteKind::CertificationPath, 4, 100, 30),
        ("5 witness soundness", SuiteKind::WitnessSoundness, 5, 1000, 60),
        (
            "6 null-section equivalence",
            SuiteKind::NullSectionEquivalence,
            6,
            20,
            120,
        ),
        ("7 negative-path detection", SuiteKind::NegativePath, 7, 200, 30),
    ];

    let mut results = Vec::new();
    for (name, kind, seed, count, budget_s) in specs {
        let result = run_criterion(name, kind, seed, count, Duration::from_secs(budget_s));
        report(&result);
        results.push((kind, seed, count, result));
    }

    // criterion 8: rerunning suites 1-7 with identical seeds yields
    // byte-identical reports (timestamps excluded)
    let started = Instant::now();
    let mut deterministic = true;
    for (kind, seed, count, first) in &results {
        let second = run_criterion(first.name, *kind, *seed, *count, first.budget);
        if second.lines != first.lines {
            deterministic = false;
            println!(
                "criterion 8: non-deterministic reports in suite {}",
                first.name
            );
        }
    }
    println!(
        "criterion 8 determinism: {} ({} suites re-run, {:.2?})",
        if deterministic { "PASS" } else { "FAIL" },
        results.len(),
        started.elapsed(),
    );

    let mut all_pass = deterministic;
    for (_, _, _, result) in &results {
        all_pass &= result.pass;
    }
    assert!(all_pass, "one or more acceptance criteria failed");
}
