//! Property sweeps over enumerated and fixture machines.
//!
//! Each sweep takes the case table of `F` as a parameter so the same code
//! can be pointed at a defective table and expected to fail.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::subject::{Subject, SubjectError};
use crate::fixtures;
use crate::guest::{decider_cost_bound, diagonal_transcript, make_bounded_decider, XBehavior};
use crate::machine::{trace, Machine, RunVerdict, Step, StepOutcome};
use crate::obs::{in_bounded_class, is_directed, leq, lub, PartialObservation};
use crate::operator::{CaseTable, HaltProbe, HaltingOperator, Omega, OperatorError, SemiDecision};
use crate::tm::{enumerate_machines, machine_at, machine_count, EnumerationLimits, MachineSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    /// `C1` … `C8` for the numbered criteria, `P…` for extra properties.
    pub key: String,
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    /// First counterexample, or a summary.
    pub detail: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} (checked {})",
            self.key,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.checked
        )?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub table: CaseTable,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("seed {}; table {}\n", self.seed, self.table);
        for r in &self.results {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out.push_str(if self.passed() {
            "suite: PASS\n"
        } else {
            "suite: FAIL\n"
        });
        out
    }
}

/// Counts checks and keeps the first failure.
struct Tally {
    key: &'static str,
    name: &'static str,
    checked: u64,
    failure: Option<String>,
}

impl Tally {
    fn new(key: &'static str, name: &'static str) -> Self {
        Tally {
            key,
            name,
            checked: 0,
            failure: None,
        }
    }

    /// Returns `false` once a failure has been recorded.
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) -> bool {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(detail());
        }
        self.failure.is_none()
    }

    fn fail(&mut self, detail: String) {
        self.check(false, || detail);
    }

    fn ok(&self) -> bool {
        self.failure.is_none()
    }

    fn finish(self, summary: String) -> PropertyResult {
        PropertyResult {
            key: self.key.into(),
            name: self.name.into(),
            passed: self.failure.is_none(),
            checked: self.checked,
            detail: self.failure.unwrap_or(summary),
        }
    }
}

fn enumeration(cfg: &Config) -> Result<impl Iterator<Item = MachineSpec>, SubjectError> {
    Ok(enumerate_machines(
        cfg.enum_states,
        cfg.enum_symbols,
        EnumerationLimits::default(),
    )?)
}

/// Distinct enumeration indices, seeded.
fn sample_machines(cfg: &Config, rng: &mut ChaCha8Rng, n: usize) -> Vec<(u128, MachineSpec)> {
    let total = machine_count(cfg.enum_states, cfg.enum_symbols).unwrap_or(0);
    let want = (n as u128).min(total) as usize;
    let mut picked = BTreeSet::new();
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let i = rng.random_range(0..total);
        if picked.insert(i) {
            out.push((
                i,
                machine_at(cfg.enum_states, cfg.enum_symbols, i).expect("index in range"),
            ));
        }
    }
    out
}

fn op(cfg: &Config, table: CaseTable) -> HaltingOperator {
    HaltingOperator::new(table, cfg.window)
}

/// Exact halting step from a configuration trace, independent of the
/// bounded runner.
fn traced_halt<M: Machine>(m: &M, input: &M::Input, limit: Step) -> Result<Option<Step>, M::Error> {
    let cs = trace(m, input, limit)?;
    let last = cs.last().expect("trace is non-empty");
    Ok(match m.step(last)? {
        StepOutcome::Halted => Some(m.step_index(last)),
        StepOutcome::Running(_) => None,
    })
}

/// Criterion 1: stage `i` is defined exactly on `0..i`, for every machine of
/// the enumeration on its own encoding.
pub fn chain_shape(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C1", "chain-shape");
    let op = op(cfg, table);
    for (idx, m) in enumeration(cfg)?.enumerate() {
        let input = m.self_input();
        let probe = HaltProbe::simulate(&m, input.as_slice(), cfg.chain_stages.max(1))?;
        let chain = match op.iterate_chain(&probe, cfg.chain_stages) {
            Ok(c) => c,
            Err(e) => {
                t.fail(format!("machine #{idx}: {e}"));
                break;
            }
        };
        for (i, p) in chain.stages.iter().enumerate() {
            let i = i as Step;
            let ok = p.support_len() == Some(i)
                && p.defined_count() == Some(i)
                && in_bounded_class(p, i)
                && (i == 0 || !in_bounded_class(p, i - 1));
            if !t.check(ok, || format!("machine #{idx} stage {i}: {p}")) {
                break;
            }
        }
        if !t.ok() {
            break;
        }
    }
    Ok(t.finish(format!(
        "{}x{} machines, stages 0..={}",
        cfg.enum_states, cfg.enum_symbols, cfg.chain_stages
    )))
}

/// Stage `i+1` at `k ≤ i` is 1 iff the machine has halted by `k`, against a
/// trace-based oracle.
pub fn chain_oracle(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("P1", "chain-oracle");
    let op = op(cfg, table);
    let n = cfg.chain_stages;
    for (idx, m) in enumeration(cfg)?.enumerate() {
        let input = m.self_input();
        let halt = traced_halt(&m, input.as_slice(), n)?;
        let probe = HaltProbe::simulate(&m, input.as_slice(), n.max(1))?;
        let chain = match op.iterate_chain(&probe, n) {
            Ok(c) => c,
            Err(e) => {
                t.fail(format!("machine #{idx}: {e}"));
                break;
            }
        };
        let last = chain.stages.last().expect("non-empty");
        for k in 0..n {
            let want = crate::obs::Bit::from_bool(halt.is_some_and(|h| h <= k));
            if !t.check(last.get(k) == Some(want), || {
                format!("machine #{idx} index {k}: {last}")
            }) {
                break;
            }
        }
        if !t.ok() {
            break;
        }
    }
    Ok(t.finish(format!(
        "{}x{} machines, indices 0..{n}",
        cfg.enum_states, cfg.enum_symbols
    )))
}

/// Criterion 2: `p ⊑ q ⇒ F(p) ⊑ F(q)` over every pair of finite
/// observations on `0..width`, for sampled machines.
pub fn monotonicity(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C2", "monotonicity");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all = PartialObservation::all_finite(cfg.observation_width);
    let pairs: Vec<(usize, usize)> = (0..all.len())
        .flat_map(|i| (0..all.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| leq(&all[i], &all[j]))
        .collect();
    let op = op(cfg, table);
    'machines: for (idx, m) in sample_machines(cfg, &mut rng, cfg.sampled_machines) {
        let probe = HaltProbe::simulate(&m, m.self_input().as_slice(), cfg.observation_width as Step + 1)?;
        let images: Vec<Result<PartialObservation, OperatorError>> = all.iter().map(|p| op.apply(&probe, p)).collect();
        for &(i, j) in &pairs {
            let ok = match (&images[i], &images[j]) {
                (Ok(a), Ok(b)) => leq(a, b),
                _ => false,
            };
            if !t.check(ok, || {
                format!(
                    "machine #{idx}: p = {}, q = {}, F(p) = {:?}, F(q) = {:?}",
                    all[i], all[j], images[i], images[j]
                )
            }) {
                break 'machines;
            }
        }
    }
    Ok(t.finish(format!(
        "{} observations, {} ordered pairs, {} machines",
        all.len(),
        pairs.len(),
        cfg.sampled_machines
    )))
}

/// Seeded finite directed set: a chain, or a fan under a common top.
fn directed_set(
    rng: &mut ChaCha8Rng,
    all: &[PartialObservation],
    above: &[Vec<usize>],
    below: &[Vec<usize>],
) -> Vec<usize> {
    let start = rng.random_range(0..all.len());
    let len = rng.random_range(1..=5);
    let mut set = vec![start];
    if rng.random_bool(0.5) {
        let mut cur = start;
        while set.len() < len {
            cur = above[cur][rng.random_range(0..above[cur].len())];
            set.push(cur);
        }
    } else {
        let top = start;
        while set.len() < len {
            set.push(below[top][rng.random_range(0..below[top].len())]);
        }
    }
    set.shuffle(rng);
    set
}

/// Criterion 3: `F(⊔C) = ⊔F(C)` for seeded directed sets.
pub fn continuity(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C3", "continuity");
    // Separate stream from the monotonicity sample.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC0_17_1A_17);
    let all = PartialObservation::all_finite(cfg.observation_width);
    let above: Vec<Vec<usize>> = (0..all.len())
        .map(|i| (0..all.len()).filter(|&j| leq(&all[i], &all[j])).collect())
        .collect();
    let below: Vec<Vec<usize>> = (0..all.len())
        .map(|i| (0..all.len()).filter(|&j| leq(&all[j], &all[i])).collect())
        .collect();
    let op = op(cfg, table);
    let machines = sample_machines(cfg, &mut rng, cfg.continuity_machines);
    'machines: for (idx, m) in machines {
        let probe = HaltProbe::simulate(&m, m.self_input().as_slice(), cfg.observation_width as Step + 1)?;
        for _ in 0..cfg.directed_sets {
            let ids = directed_set(&mut rng, &all, &above, &below);
            let set: Vec<PartialObservation> = ids.iter().map(|&i| all[i].clone()).collect();
            if !is_directed(&set) {
                t.fail(format!("generator produced a non-directed set {set:?}"));
                break 'machines;
            }
            let join = lub(&set).expect("directed sets have a supremum");
            let lhs = op.apply(&probe, &join);
            let rhs = set
                .iter()
                .map(|p| op.apply(&probe, p))
                .collect::<Result<Vec<_>, _>>()
                .and_then(|imgs| lub(&imgs).map_err(OperatorError::OutsideDomain));
            let ok = matches!((&lhs, &rhs), (Ok(a), Ok(b)) if a == b);
            if !t.check(ok, || {
                let shown: Vec<String> = set.iter().map(|p| p.to_string()).collect();
                format!(
                    "machine #{idx}: C = {{{}}}, F(⊔C) = {lhs:?}, ⊔F(C) = {rhs:?}",
                    shown.join(", ")
                )
            }) {
                break 'machines;
            }
        }
    }
    Ok(t.finish(format!(
        "{} machines x {} directed sets",
        cfg.continuity_machines, cfg.directed_sets
    )))
}

/// Fixture subjects: Turing machines on the empty tape, guest programs on
/// their own encoding.
fn fixture_subjects() -> Vec<(String, Subject, Option<Step>)> {
    let mut out: Vec<(String, Subject, Option<Step>)> = fixtures::turing_fixtures()
        .into_iter()
        .map(|(name, m, halt)| {
            let s = Subject::tm(m).with_input("empty").expect("empty input");
            (name.to_string(), s, halt)
        })
        .collect();
    for (name, p, halt) in [
        ("g_halt", fixtures::g_halt(), Some(0)),
        ("g_loop", fixtures::g_loop(), None),
        ("g_countdown", fixtures::g_countdown(), Some(17)),
    ] {
        out.push((name.to_string(), Subject::guest(p).expect("closed fixture"), halt));
    }
    out
}

/// Criterion 4: no chain stage is a fixed point, and the witness is the
/// stage's defined-set size.
pub fn no_bounded_fixed_point(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C4", "no-bounded-fixed-point");
    let op = op(cfg, table);
    let n = cfg.chain_stages;
    let check_probe = |name: &str, probe: &HaltProbe, t: &mut Tally| {
        let chain = match op.iterate_chain(probe, n) {
            Ok(c) => c,
            Err(e) => {
                t.fail(format!("{name}: {e}"));
                return;
            }
        };
        for p in &chain.stages {
            let check = op.is_fixed_point(probe, p);
            let size = p.defined_count();
            let ok = matches!(check, Ok(c) if !c.fixed && c.witness.is_some() && c.witness == size);
            if !t.check(ok, || format!("{name}: stage {p}: {check:?}")) {
                return;
            }
        }
    };
    for (name, s, _) in fixture_subjects() {
        check_probe(&name, &s.probe(n.max(1))?, &mut t);
    }
    for (idx, m) in enumeration(cfg)?.enumerate() {
        if !t.ok() {
            break;
        }
        let probe = HaltProbe::simulate(&m, m.self_input().as_slice(), n.max(1))?;
        check_probe(&format!("machine #{idx}"), &probe, &mut t);
    }
    Ok(t.finish(format!(
        "fixtures and {}x{} machines, stages 0..={n}",
        cfg.enum_states, cfg.enum_symbols
    )))
}

/// Criterion 5: for machines halting at `K ≤ omega_fuel`, the limit is
/// `K` zeros then ones, it is a fixed point, and every fixed point whose
/// lookups on `0..K+3` are arbitrary lies above it.
pub fn halting_limit(cfg: &Config, table: CaseTable) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C5", "halting-limit");
    let op = op(cfg, table);
    let mut halting = 0u64;
    let mut check = |name: &str, s: &Subject, t: &mut Tally| -> Result<(), SubjectError> {
        let probe = s.probe(cfg.omega_fuel.max(1))?;
        let Some(k) = probe.halting_step().filter(|&k| k <= cfg.omega_fuel) else {
            return Ok(());
        };
        halting += 1;
        let omega = match s.p_omega(cfg.omega_fuel)? {
            Omega::Limit(p) => p,
            Omega::StillRunning(f) => {
                t.fail(format!("{name}: halts at {k} but p_omega says still running at {f}"));
                return Ok(());
            }
        };
        if !t.check(omega == PartialObservation::one_tail_from(k), || {
            format!("{name}: p_omega = {omega}")
        }) {
            return Ok(());
        }
        let fixed = op.is_fixed_point(&probe, &omega);
        if !t.check(matches!(fixed, Ok(c) if c.fixed), || {
            format!("{name}: {omega} not fixed: {fixed:?}")
        }) {
            return Ok(());
        }
        match op.search_fixed_points(&probe, k as usize + 3) {
            Ok(found) => {
                let smaller = found.fixed_points.iter().find(|q| !leq(&omega, q));
                t.check(smaller.is_none(), || {
                    format!("{name}: fixed point {} is not above {omega}", smaller.expect("found"))
                });
            }
            Err(e) => t.fail(format!("{name}: search failed: {e}")),
        }
        Ok(())
    };
    for (name, s, _) in fixture_subjects() {
        check(&name, &s, &mut t)?;
    }
    for (idx, m) in enumeration(cfg)?.enumerate() {
        if !t.ok() {
            break;
        }
        check(&format!("machine #{idx}"), &Subject::tm(m), &mut t)?;
    }
    Ok(t.finish(format!("{halting} halting machines, K <= {}", cfg.omega_fuel)))
}

/// Criterion 6: on non-halting fixtures every bounded run to `T` costs
/// exactly `T + 1` ticks.
pub fn overhead_law(cfg: &Config) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C6", "overhead");
    for (name, s, halt) in fixture_subjects() {
        if halt.is_some() {
            continue;
        }
        for row in s.overhead(0..=cfg.overhead_max)? {
            let ok = row.verdict == RunVerdict::RunningAt(row.bound) && row.ledger.total() == row.bound + 1;
            if !t.check(ok, || {
                format!(
                    "{name}: T = {}: {} with {} ticks",
                    row.bound,
                    row.verdict,
                    row.ledger.total()
                )
            }) {
                break;
            }
        }
    }
    Ok(t.finish(format!("non-halting fixtures, T in 0..={}", cfg.overhead_max)))
}

/// Criterion 7: every `D_T` is contradicted by its diagonalizer, a halting
/// `X` halts after step `T`, and the semi-decider confirms every halting
/// fixture and never answers "does not halt".
pub fn diagonal(cfg: &Config) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C7", "diagonal");
    for bound in 0..=cfg.diagonal_max {
        let (_, tr) = diagonal_transcript(
            &make_bounded_decider(bound),
            decider_cost_bound(bound),
            cfg.diagonal_fuel,
        )?;
        let late = match tr.x {
            XBehavior::Halted(k) => k > bound,
            _ => true,
        };
        if !t.check(tr.contradiction && late, || format!("T = {bound}: {tr:?}")) {
            break;
        }
    }
    for (name, s, halt) in fixture_subjects() {
        let answer = s.semidecide(&cfg.fuel_schedule)?;
        let ok = match (halt, answer) {
            (Some(k), SemiDecision::HaltsAt { step, .. }) => step == k,
            (None, SemiDecision::FuelExhausted(_)) => true,
            _ => false,
        };
        t.check(ok, || format!("{name}: expected {halt:?}, got {answer:?}"));
    }
    Ok(t.finish(format!("T in 0..={}, fixture semi-decisions", cfg.diagonal_max)))
}

/// Criteria 1–5 under one table.
pub fn core_criteria(cfg: &Config, table: CaseTable) -> Result<Vec<PropertyResult>, SubjectError> {
    Ok(vec![
        chain_shape(cfg, table)?,
        monotonicity(cfg, table)?,
        continuity(cfg, table)?,
        no_bounded_fixed_point(cfg, table)?,
        halting_limit(cfg, table)?,
    ])
}

/// Criterion 8: each defective table fails at least one of criteria 1–5.
pub fn mutant_sensitivity(cfg: &Config) -> Result<PropertyResult, SubjectError> {
    let mut t = Tally::new("C8", "mutant-sensitivity");
    let mut caught = Vec::new();
    for table in CaseTable::MUTANTS {
        let failed: Vec<String> = core_criteria(cfg, table)?
            .into_iter()
            .filter(|r| !r.passed)
            .map(|r| r.key)
            .collect();
        t.check(!failed.is_empty(), || format!("{table} passes criteria 1-5"));
        caught.push(format!("{table} caught by {}", failed.join("+")));
    }
    Ok(t.finish(caught.join("; ")))
}

/// Every property under `table`. With the standard table this includes the
/// mutant sensitivity check.
pub fn run_suite(cfg: &Config, table: CaseTable) -> Result<SuiteReport, SubjectError> {
    let mut results = core_criteria(cfg, table)?;
    results.push(overhead_law(cfg)?);
    results.push(diagonal(cfg)?);
    if table == CaseTable::Standard {
        results.push(mutant_sensitivity(cfg)?);
    }
    results.push(chain_oracle(cfg, table)?);
    Ok(SuiteReport {
        seed: cfg.seed,
        table,
        results,
    })
}
