//! Shared inputs for the benchmarks.

use scottlimit::guest::{decider_cost_bound, make_bounded_decider, GuestProgram};
use scottlimit::harness::Subject;
use scottlimit::{fixtures, HaltProbe, Step};

/// Probes for a halting and a non-halting Turing fixture, and the guest
/// countdown, all simulated to `horizon`.
pub fn probes(horizon: Step) -> Vec<(&'static str, HaltProbe)> {
    let subjects = [
        (
            "m_bb2",
            Subject::tm(fixtures::m_bb2()).with_input("empty").expect("empty input"),
        ),
        ("m_loop", Subject::tm(fixtures::m_loop())),
        (
            "g_countdown",
            Subject::guest(fixtures::g_countdown()).expect("closed fixture"),
        ),
    ];
    subjects
        .into_iter()
        .map(|(name, s)| (name, s.probe(horizon).expect("fixtures simulate")))
        .collect()
}

/// `D_T` with its tick budget.
pub fn decider(t: Step) -> (GuestProgram, Step) {
    (make_bounded_decider(t), decider_cost_bound(t))
}
