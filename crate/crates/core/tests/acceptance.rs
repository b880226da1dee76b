//! One PASS/FAIL line per acceptance criterion at default scale.
//!
//! Criteria run one after another so the wall-clock budgets are measured
//! without competing test threads. Lines go straight to the stdout handle so
//! they show up even when the harness captures output.

use std::io::Write;
use std::time::{Duration, Instant};

use scottlimit::harness::{self, Config, PropertyResult, SubjectError};
use scottlimit::CaseTable;

/// Wall-clock budget per criterion. `None` means exactness only.
const BUDGETS: [(u8, Option<Duration>); 8] = [
    (1, Some(Duration::from_secs(120))),
    (2, Some(Duration::from_secs(120))),
    (3, Some(Duration::from_secs(120))),
    (4, None),
    (5, Some(Duration::from_secs(300))),
    (6, None),
    (7, None),
    (8, None),
];

fn line(text: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").unwrap();
    out.flush().unwrap();
}

fn run(n: u8, f: impl FnOnce(&Config) -> Result<PropertyResult, SubjectError>) -> bool {
    let cfg = Config::default();
    let budget = BUDGETS[n as usize - 1].1;
    let start = Instant::now();
    let result = f(&cfg);
    let elapsed = start.elapsed();
    let (passed, text) = match result {
        Ok(r) => {
            let in_time = budget.is_none_or(|b| elapsed <= b);
            let budget_text = budget.map(|b| format!(" / {}s", b.as_secs())).unwrap_or_default();
            (
                r.passed && in_time,
                format!(
                    "{} checked={} {:.1}s{budget_text} {}",
                    r.name,
                    r.checked,
                    elapsed.as_secs_f64(),
                    r.detail
                ),
            )
        }
        Err(e) => (false, format!("error: {e}")),
    };
    line(&format!(
        "criterion {n}: {} {text}",
        if passed { "PASS" } else { "FAIL" }
    ));
    passed
}

#[test]
fn acceptance_criteria() {
    let std = CaseTable::Standard;
    let results = [
        run(1, |c| harness::chain_shape(c, std)),
        run(2, |c| harness::monotonicity(c, std)),
        run(3, |c| harness::continuity(c, std)),
        run(4, |c| harness::no_bounded_fixed_point(c, std)),
        run(5, |c| harness::halting_limit(c, std)),
        run(6, harness::overhead_law),
        run(7, harness::diagonal),
        run(8, harness::mutant_sensitivity),
    ];
    let failed: Vec<usize> = (1..=8).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
