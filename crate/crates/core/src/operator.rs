//! The halting-observation operator `F`, its Kleene chain and fixed points.
//!
//! For a machine `M` on a fixed input:
//!
//! ```text
//! F(p)(0)   = 1 if M has halted at step 0, else 0
//! F(p)(k+1) = ⊥                         if p(k) = ⊥
//!             1                         if p(k) = 1
//!             1 if M has halted by k+1  if p(k) = 0
//!             0 otherwise
//! ```
//!
//! On observations consistent with `M` (`p(k) = 0` only when `M` is still
//! running at `k`), "halted by `k+1`" and "halts at exactly `k+1`" coincide.
//! The cumulative reading keeps `F(p)` monotone for every `p`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::machine::{run_bounded, CostLedger, Machine, RunVerdict, Step};
use crate::obs::{Bit, ObsError, PartialObservation, Tail};

pub const DEFAULT_WINDOW: Step = 64;
pub const DEFAULT_CHAIN_CAP: Step = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperatorError {
    #[error("halting status at step {index} is unknown: simulated only to step {horizon}")]
    BeyondHorizon { index: Step, horizon: Step },
    #[error("operator output leaves the domain: {0}")]
    OutsideDomain(ObsError),
    #[error("fuel schedule must be non-empty and strictly increasing")]
    BadSchedule,
    #[error("machine error: {0}")]
    Machine(String),
}

fn machine_err<E: std::error::Error>(e: E) -> OperatorError {
    OperatorError::Machine(e.to_string())
}

/// What is known about one machine's halting step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaltProbe {
    halt: Option<Step>,
    horizon: Step,
}

impl HaltProbe {
    /// Simulate up to `horizon` transitions once and remember the outcome.
    pub fn simulate<M: Machine>(machine: &M, input: &M::Input, horizon: Step) -> Result<Self, OperatorError> {
        let (verdict, _) = run_bounded(machine, input, horizon).map_err(machine_err)?;
        Ok(HaltProbe {
            halt: match verdict {
                RunVerdict::HaltsAt(k) => Some(k),
                RunVerdict::RunningAt(_) => None,
            },
            horizon,
        })
    }

    /// Synthetic machine halting at exactly `k`.
    pub fn halting_at(k: Step) -> Self {
        HaltProbe {
            halt: Some(k),
            horizon: Step::MAX,
        }
    }

    /// Synthetic machine that never halts.
    pub fn never() -> Self {
        HaltProbe {
            halt: None,
            horizon: Step::MAX,
        }
    }

    pub fn halting_step(&self) -> Option<Step> {
        self.halt
    }

    pub fn horizon(&self) -> Step {
        self.horizon
    }

    pub fn halted_by(&self, k: Step) -> Result<bool, OperatorError> {
        match self.halt {
            Some(h) => Ok(h <= k),
            None if k <= self.horizon => Ok(false),
            None => Err(OperatorError::BeyondHorizon {
                index: k,
                horizon: self.horizon,
            }),
        }
    }

    pub fn halts_at_exact(&self, k: Step) -> Result<bool, OperatorError> {
        self.halted_by(k).map(|h| h && self.halt == Some(k))
    }

    /// Ledger of a bounded run to `k`.
    pub fn ledger(&self, k: Step) -> Result<CostLedger, OperatorError> {
        self.halted_by(k)?;
        Ok(CostLedger::new(self.halt.map_or(k, |h| h.min(k)), 1))
    }
}

/// Case table of `F`. Everything except `Standard` is a deliberate defect
/// used to check that the property suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTable {
    Standard,
    /// `p(k) = 0` and halted: answers 0 instead of 1.
    Swap01,
    /// `p(k) = ⊥` is read as 0 instead of propagating.
    DropBottom,
    /// `F(p)(0)` looks at step 1 instead of step 0.
    BaseOffByOne,
}

impl CaseTable {
    pub const MUTANTS: [CaseTable; 3] = [CaseTable::Swap01, CaseTable::DropBottom, CaseTable::BaseOffByOne];

    pub fn name(self) -> &'static str {
        match self {
            CaseTable::Standard => "standard",
            CaseTable::Swap01 => "swap01",
            CaseTable::DropBottom => "drop-bottom",
            CaseTable::BaseOffByOne => "base-off-by-one",
        }
    }

    fn base(self, probe: &HaltProbe) -> Result<Bit, OperatorError> {
        let at = if self == CaseTable::BaseOffByOne { 1 } else { 0 };
        probe.halted_by(at).map(Bit::from_bool)
    }

    /// `F(p)(k)` for `k ≥ 1`, from `prev = p(k-1)`.
    fn next(self, prev: Option<Bit>, probe: &HaltProbe, k: Step) -> Result<Option<Bit>, OperatorError> {
        Ok(match (self, prev) {
            (CaseTable::DropBottom, None) => Some(Bit::from_bool(probe.halted_by(k)?)),
            (_, None) => None,
            (_, Some(Bit::One)) => Some(Bit::One),
            (CaseTable::Swap01, Some(Bit::Zero)) => Some(Bit::Zero),
            (_, Some(Bit::Zero)) => Some(Bit::from_bool(probe.halted_by(k)?)),
        })
    }
}

impl fmt::Display for CaseTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            CaseTable::Standard,
            CaseTable::Swap01,
            CaseTable::DropBottom,
            CaseTable::BaseOffByOne,
        ]
        .into_iter()
        .find(|t| t.name() == s)
        .ok_or_else(|| format!("unknown case table {s:?}"))
    }
}

/// Result of a fixed-point check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointCheck {
    pub fixed: bool,
    /// First index where `F(p)` and `p` differ.
    pub witness: Option<Step>,
}

/// `p_0 = ⊥, …, p_N` with the bounded-run ledger behind each stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub stages: Vec<PartialObservation>,
    /// `ledgers[i]` is the run to step `i - 1` that stage `i` needed; stage
    /// 0 needs none.
    pub ledgers: Vec<CostLedger>,
}

/// `F` for one case table and zero-claim window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaltingOperator {
    pub table: CaseTable,
    /// Indices `0..=window` are evaluated explicitly for a zero-claim tail.
    pub window: Step,
}

impl Default for HaltingOperator {
    fn default() -> Self {
        HaltingOperator {
            table: CaseTable::Standard,
            window: DEFAULT_WINDOW,
        }
    }
}

impl HaltingOperator {
    pub fn new(table: CaseTable, window: Step) -> Self {
        HaltingOperator { table, window }
    }

    /// Highest step the probe must resolve for `apply(p)`.
    pub fn horizon_for(&self, p: &PartialObservation) -> Step {
        let reach = match p.tail() {
            Tail::Bottom => p.horizon(),
            Tail::OneFrom(k) => k,
            Tail::ZeroClaim => self.window,
        };
        reach.max(1)
    }

    pub fn apply(&self, probe: &HaltProbe, p: &PartialObservation) -> Result<PartialObservation, OperatorError> {
        let t = self.table;
        // F(p)(j) for 1 ≤ j ≤ last, from p's lookup at j-1.
        let cells_to = |last: Step| -> Result<Vec<Option<Bit>>, OperatorError> {
            let mut cells = vec![Some(t.base(probe)?)];
            for j in 1..=last {
                cells.push(t.next(p.get(j - 1), probe, j)?);
            }
            Ok(cells)
        };
        let out = match p.tail() {
            Tail::Bottom => PartialObservation::new(cells_to(p.horizon())?, Tail::Bottom),
            // p(k) = 1 for k ≥ K, so F(p)(k+1) = 1 there.
            Tail::OneFrom(k) => PartialObservation::new(cells_to(k)?, Tail::OneFrom(k + 1)),
            Tail::ZeroClaim => {
                let last = self.window.max(probe.halting_step().unwrap_or(0));
                let cells = cells_to(last)?;
                if cells.contains(&Some(Bit::One)) {
                    PartialObservation::new(cells, Tail::OneFrom(last + 1))
                } else {
                    // Nothing in the window refutes the claim.
                    Ok(PartialObservation::zero_claim())
                }
            }
        };
        out.map_err(OperatorError::OutsideDomain)
    }

    pub fn is_fixed_point(&self, probe: &HaltProbe, p: &PartialObservation) -> Result<FixedPointCheck, OperatorError> {
        let r = self.apply(probe, p)?;
        if r == *p {
            return Ok(FixedPointCheck {
                fixed: true,
                witness: None,
            });
        }
        let span = r.horizon().max(p.horizon()).max(self.window);
        let witness = (0..=span).find(|&k| r.get(k) != p.get(k));
        Ok(FixedPointCheck { fixed: false, witness })
    }

    /// `p_0 … p_n`.
    pub fn iterate_chain(&self, probe: &HaltProbe, n: Step) -> Result<ChainRecord, OperatorError> {
        let mut stages = vec![PartialObservation::bottom()];
        let mut ledgers = vec![CostLedger::EMPTY];
        for i in 1..=n {
            let next = self.apply(probe, stages.last().expect("non-empty"))?;
            stages.push(next);
            ledgers.push(probe.ledger(i - 1)?);
        }
        Ok(ChainRecord { stages, ledgers })
    }

    /// Every fixed point among observations whose lookups on `0..n` are
    /// arbitrary and whose tail is `⊥`, the zero claim, or `1…@K` with
    /// `K ≤ n`.
    ///
    /// `F(p)(j)` depends only on `p(j-1)`, so a fixed point's lookup at `j`
    /// is forced once its lookup at `j-1` is fixed; the search descends one
    /// index at a time and drops every branch that breaks this equation.
    pub fn search_fixed_points(&self, probe: &HaltProbe, n: usize) -> Result<FixedPointSearch, OperatorError> {
        let mut search = FixedPointSearch::default();
        let mut prefix = Vec::with_capacity(n);
        self.descend(probe, n, &mut prefix, &mut search)?;
        Ok(search)
    }

    fn descend(
        &self,
        probe: &HaltProbe,
        n: usize,
        prefix: &mut Vec<Option<Bit>>,
        search: &mut FixedPointSearch,
    ) -> Result<(), OperatorError> {
        let j = prefix.len();
        if j == n {
            for p in candidates(prefix, n) {
                search.leaves += 1;
                if self.maps_to_itself(probe, &p)? {
                    search.fixed_points.push(p);
                }
            }
            return Ok(());
        }
        let forced = match j {
            0 => Some(self.table.base(probe)?),
            _ => self.table.next(prefix[j - 1], probe, j as Step)?,
        };
        for v in [None, Some(Bit::Zero), Some(Bit::One)] {
            search.visited += 1;
            if v != forced {
                continue;
            }
            prefix.push(v);
            self.descend(probe, n, prefix, search)?;
            prefix.pop();
        }
        Ok(())
    }

    /// A defective table may map `p` outside the domain; such `p` is not a
    /// fixed point.
    fn maps_to_itself(&self, probe: &HaltProbe, p: &PartialObservation) -> Result<bool, OperatorError> {
        match self.apply(probe, p) {
            Ok(r) => Ok(r == *p),
            Err(OperatorError::OutsideDomain(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Same space as [`HaltingOperator::search_fixed_points`], enumerated
    /// without pruning. Exponential in `n`.
    pub fn brute_force_fixed_points(
        &self,
        probe: &HaltProbe,
        n: usize,
    ) -> Result<Vec<PartialObservation>, OperatorError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let lookups: Vec<Option<Bit>> = (0..n)
                .map(|i| match code / 3usize.pow(i as u32) % 3 {
                    0 => None,
                    1 => Some(Bit::Zero),
                    _ => Some(Bit::One),
                })
                .collect();
            for p in candidates(&lookups, n) {
                if seen.insert(p.to_string()) && self.maps_to_itself(probe, &p)? {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

/// Valid observations with the given lookups on `0..n`, one per tail.
fn candidates(lookups: &[Option<Bit>], n: usize) -> Vec<PartialObservation> {
    let mut tails = vec![Tail::Bottom];
    if lookups.iter().all(Option::is_some) {
        tails.push(Tail::ZeroClaim);
        tails.extend((0..=n as Step).map(Tail::OneFrom));
    }
    tails
        .into_iter()
        .filter_map(|t| PartialObservation::new(lookups.to_vec(), t).ok())
        .filter(|p| (0..n).all(|k| p.get(k as Step) == lookups[k]))
        .fold(Vec::new(), |mut out, p| {
            // Several tails can canonicalize to the same value.
            if !out.contains(&p) {
                out.push(p);
            }
            out
        })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixedPointSearch {
    pub fixed_points: Vec<PartialObservation>,
    /// Branches considered, pruned ones included.
    pub visited: u64,
    /// Complete candidates checked against `F`.
    pub leaves: u64,
}

/// `F(p)` with the standard table, simulating the machine as far as needed.
pub fn apply_f<M: Machine>(
    machine: &M,
    input: &M::Input,
    p: &PartialObservation,
) -> Result<PartialObservation, OperatorError> {
    let op = HaltingOperator::default();
    let probe = HaltProbe::simulate(machine, input, op.horizon_for(p))?;
    op.apply(&probe, p)
}

/// `p_0 … p_n` with the standard table.
pub fn iterate_chain<M: Machine>(machine: &M, input: &M::Input, n: Step) -> Result<ChainRecord, OperatorError> {
    let probe = HaltProbe::simulate(machine, input, n.max(1))?;
    HaltingOperator::default().iterate_chain(&probe, n)
}

pub fn is_fixed_point<M: Machine>(
    machine: &M,
    input: &M::Input,
    p: &PartialObservation,
    window: Step,
) -> Result<FixedPointCheck, OperatorError> {
    let op = HaltingOperator::new(CaseTable::Standard, window);
    let probe = HaltProbe::simulate(machine, input, op.horizon_for(p))?;
    op.is_fixed_point(&probe, p)
}

/// `p_ω` when it is determined within `fuel` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Omega {
    Limit(PartialObservation),
    StillRunning(Step),
}

/// `K` zeros then ones if the machine halts at exact step `K ≤ fuel`.
/// Otherwise nothing is claimed.
pub fn make_p_omega<M: Machine>(machine: &M, input: &M::Input, fuel: Step) -> Result<Omega, OperatorError> {
    Ok(match run_bounded(machine, input, fuel).map_err(machine_err)?.0 {
        RunVerdict::HaltsAt(k) => Omega::Limit(PartialObservation::one_tail_from(k)),
        RunVerdict::RunningAt(_) => Omega::StillRunning(fuel),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiDecision {
    /// Halts at exact step `step`, first seen with fuel `fuel`.
    HaltsAt { step: Step, fuel: Step },
    /// No halt within the last fuel value. Not a negative answer.
    FuelExhausted(Step),
}

/// Run with each fuel in turn until the machine is seen halting.
pub fn semidecide_halts<M: Machine>(
    machine: &M,
    input: &M::Input,
    schedule: &[Step],
) -> Result<SemiDecision, OperatorError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OperatorError::BadSchedule);
    }
    for &fuel in schedule {
        if let RunVerdict::HaltsAt(step) = run_bounded(machine, input, fuel).map_err(machine_err)?.0 {
            return Ok(SemiDecision::HaltsAt { step, fuel });
        }
    }
    Ok(SemiDecision::FuelExhausted(*schedule.last().expect("non-empty")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::obs::{leq, lub};
    use crate::tm::{enumerate_machines, MachineSpec, Symbol};

    fn obs(s: &str) -> PartialObservation {
        s.parse().unwrap()
    }

    const EMPTY: &[Symbol] = &[];

    /// Ground truth by direct simulation: 1 iff halted by `k`.
    fn truth(m: &MachineSpec, input: &[Symbol], k: Step) -> Bit {
        Bit::from_bool(run_bounded(m, input, k).unwrap().0.halted())
    }

    #[test]
    fn base_case() {
        let m0 = fixtures::m_halt0();
        assert_eq!(
            apply_f(&m0, EMPTY, &PartialObservation::bottom()).unwrap(),
            obs("[1 | ⊥]")
        );
        let ml = fixtures::m_loop();
        assert_eq!(
            apply_f(&ml, &ml.self_input(), &PartialObservation::bottom()).unwrap(),
            obs("[0 | ⊥]")
        );
    }

    #[test]
    fn extends_by_one_step() {
        let m = fixtures::m_halt2();
        assert_eq!(apply_f(&m, EMPTY, &obs("[0 0 | ⊥]")).unwrap(), obs("[0 0 1 | ⊥]"));
    }

    #[test]
    fn hole_propagates() {
        // p = [_ 0]: r(0) from the base case, r(1) = ⊥ because p(0) = ⊥,
        // r(2) from p(1) = 0 and "m_halt2 halted by 2" = 1.
        let m = fixtures::m_halt2();
        let r = apply_f(&m, EMPTY, &obs("[_ 0 | ⊥]")).unwrap();
        assert_eq!(r, obs("[0 _ 1 | ⊥]"));
        assert_eq!(r.get(1), None);
    }

    #[test]
    fn chain_examples() {
        let m = fixtures::m_halt2();
        let c = iterate_chain(&m, EMPTY, 4).unwrap();
        let want: Vec<_> = ["[ | ⊥]", "[0 | ⊥]", "[0 0 | ⊥]", "[0 0 1 | ⊥]", "[0 0 1 1 | ⊥]"]
            .iter()
            .map(|s| obs(s))
            .collect();
        assert_eq!(c.stages, want);
        let ml = fixtures::m_loop();
        let c = iterate_chain(&ml, &ml.self_input(), 3).unwrap();
        assert_eq!(c.stages[3], obs("[0 0 0 | ⊥]"));
        assert_eq!(
            iterate_chain(&ml, &ml.self_input(), 0).unwrap().stages,
            vec![PartialObservation::bottom()]
        );
    }

    #[test]
    fn chain_ledgers() {
        let m = fixtures::m_halt2();
        let c = iterate_chain(&m, EMPTY, 5).unwrap();
        let totals: Vec<u64> = c.ledgers.iter().map(|l| l.total()).collect();
        assert_eq!(totals, vec![0, 1, 2, 3, 3, 3]);
        for (i, l) in c.ledgers.iter().enumerate().skip(1) {
            assert_eq!(*l, run_bounded(&m, EMPTY, i as Step - 1).unwrap().1);
        }
    }

    #[test]
    fn fixed_point_examples() {
        let m = fixtures::m_halt2();
        let c = iterate_chain(&m, EMPTY, 3).unwrap();
        let check = is_fixed_point(&m, EMPTY, &c.stages[3], 10).unwrap();
        assert_eq!(
            check,
            FixedPointCheck {
                fixed: false,
                witness: Some(3)
            }
        );
        let omega = PartialObservation::one_tail_from(2);
        assert!(is_fixed_point(&m, EMPTY, &omega, 10).unwrap().fixed);
        let ml = fixtures::m_loop();
        let zc = PartialObservation::zero_claim();
        assert!(is_fixed_point(&ml, &ml.self_input(), &zc, 10).unwrap().fixed);
        // The claim is refuted for a halting machine.
        assert_eq!(
            is_fixed_point(&m, EMPTY, &zc, 10).unwrap(),
            FixedPointCheck {
                fixed: false,
                witness: Some(2)
            }
        );
    }

    #[test]
    fn zero_claim_maps_to_halting_step() {
        let op = HaltingOperator::new(CaseTable::Standard, 4);
        let zc = PartialObservation::zero_claim();
        assert_eq!(
            op.apply(&HaltProbe::halting_at(3), &zc).unwrap(),
            PartialObservation::one_tail_from(3)
        );
        // Known halting beyond the window is still honoured.
        assert_eq!(
            op.apply(&HaltProbe::halting_at(40), &zc).unwrap(),
            PartialObservation::one_tail_from(40)
        );
        assert_eq!(op.apply(&HaltProbe::never(), &zc).unwrap(), zc);
    }

    #[test]
    fn one_tail_maps_to_earlier_halt() {
        let op = HaltingOperator::default();
        let p = PartialObservation::one_tail_from(5);
        assert_eq!(
            op.apply(&HaltProbe::halting_at(2), &p).unwrap(),
            PartialObservation::one_tail_from(2)
        );
        assert_eq!(
            op.apply(&HaltProbe::never(), &p).unwrap(),
            PartialObservation::one_tail_from(6)
        );
    }

    #[test]
    fn p_omega_examples() {
        let m = fixtures::m_halt2();
        assert_eq!(make_p_omega(&m, EMPTY, 100).unwrap(), Omega::Limit(obs("[0 0 | 1…@2]")));
        let ml = fixtures::m_loop();
        assert_eq!(
            make_p_omega(&ml, &ml.self_input(), 100).unwrap(),
            Omega::StillRunning(100)
        );
        assert_eq!(
            make_p_omega(&fixtures::m_halt0(), EMPTY, 0).unwrap(),
            Omega::Limit(PartialObservation::one_tail_from(0))
        );
    }

    #[test]
    fn semidecision_examples() {
        let m = fixtures::m_halt2();
        assert_eq!(
            semidecide_halts(&m, EMPTY, &[1, 2, 4, 8]).unwrap(),
            SemiDecision::HaltsAt { step: 2, fuel: 2 }
        );
        let ml = fixtures::m_loop();
        assert_eq!(
            semidecide_halts(&ml, &ml.self_input(), &[1, 2, 4]).unwrap(),
            SemiDecision::FuelExhausted(4)
        );
        assert_eq!(
            semidecide_halts(&fixtures::m_halt0(), EMPTY, &[1]).unwrap(),
            SemiDecision::HaltsAt { step: 0, fuel: 1 }
        );
        assert_eq!(semidecide_halts(&m, EMPTY, &[]), Err(OperatorError::BadSchedule));
        assert_eq!(semidecide_halts(&m, EMPTY, &[3, 3]), Err(OperatorError::BadSchedule));
    }

    #[test]
    fn probe_refuses_to_guess() {
        let ml = fixtures::m_loop();
        let probe = HaltProbe::simulate(&ml, EMPTY, 5).unwrap();
        assert_eq!(probe.halted_by(5), Ok(false));
        assert_eq!(
            probe.halted_by(6),
            Err(OperatorError::BeyondHorizon { index: 6, horizon: 5 })
        );
    }

    #[test]
    fn chain_matches_run_oracle_on_small_machines() {
        for m in enumerate_machines(1, 2, Default::default()).unwrap() {
            let input = m.self_input();
            let c = iterate_chain(&m, &input, 12).unwrap();
            for i in 0..12usize {
                for k in 0..=i {
                    assert_eq!(c.stages[i + 1].get(k as Step), Some(truth(&m, &input, k as Step)));
                }
            }
        }
    }

    #[test]
    fn search_agrees_with_brute_force() {
        let probes = [
            HaltProbe::halting_at(0),
            HaltProbe::halting_at(2),
            HaltProbe::halting_at(4),
            HaltProbe::never(),
        ];
        let tables = [
            CaseTable::Standard,
            CaseTable::Swap01,
            CaseTable::DropBottom,
            CaseTable::BaseOffByOne,
        ];
        for probe in probes {
            for table in tables {
                let op = HaltingOperator::new(table, 8);
                for n in 0..=5 {
                    let mut fast: Vec<String> = match op.search_fixed_points(&probe, n) {
                        Ok(s) => s.fixed_points.iter().map(|p| p.to_string()).collect(),
                        Err(_) => continue,
                    };
                    let mut slow: Vec<String> = match op.brute_force_fixed_points(&probe, n) {
                        Ok(v) => v.iter().map(|p| p.to_string()).collect(),
                        Err(e) => panic!("brute force failed where search did not: {e}"),
                    };
                    fast.sort();
                    slow.sort();
                    assert_eq!(fast, slow, "{table} {probe:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn only_fixed_point_is_the_limit() {
        for k in [0, 1, 2, 5] {
            let probe = HaltProbe::halting_at(k);
            let found = HaltingOperator::default()
                .search_fixed_points(&probe, k as usize + 3)
                .unwrap();
            assert_eq!(found.fixed_points, vec![PartialObservation::one_tail_from(k)]);
        }
        let found = HaltingOperator::default()
            .search_fixed_points(&HaltProbe::never(), 6)
            .unwrap();
        assert_eq!(found.fixed_points, vec![PartialObservation::zero_claim()]);
    }

    #[test]
    fn mutants_differ_from_standard() {
        let probe = HaltProbe::halting_at(1);
        let std_op = HaltingOperator::default();
        for table in CaseTable::MUTANTS {
            let op = HaltingOperator::new(table, 8);
            let differs = PartialObservation::all_finite(4)
                .iter()
                .any(|p| op.apply(&probe, p).ok() != std_op.apply(&probe, p).ok());
            assert!(differs, "{table}");
            assert_eq!(table.name().parse::<CaseTable>().unwrap(), table);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_probe() -> impl Strategy<Value = HaltProbe> {
            prop_oneof![(0u64..8).prop_map(HaltProbe::halting_at), Just(HaltProbe::never()),]
        }

        fn arb_obs() -> impl Strategy<Value = PartialObservation> {
            let all = PartialObservation::all_finite(5);
            prop_oneof![
                6 => (0..all.len()).prop_map(move |i| all[i].clone()),
                1 => Just(PartialObservation::zero_claim()),
                1 => (0u64..8).prop_map(PartialObservation::one_tail_from),
            ]
        }

        proptest! {
            #[test]
            fn monotone(probe in arb_probe(), p in arb_obs(), q in arb_obs()) {
                let op = HaltingOperator::default();
                if leq(&p, &q) {
                    prop_assert!(leq(&op.apply(&probe, &p).unwrap(), &op.apply(&probe, &q).unwrap()));
                }
            }

            #[test]
            fn commutes_with_binary_lub(probe in arb_probe(), p in arb_obs(), q in arb_obs()) {
                let op = HaltingOperator::default();
                if let Ok(j) = lub([&p, &q]) {
                    let fp = op.apply(&probe, &p).unwrap();
                    let fq = op.apply(&probe, &q).unwrap();
                    prop_assert_eq!(op.apply(&probe, &j).unwrap(), lub([&fp, &fq]).unwrap());
                }
            }

            #[test]
            fn finite_stays_finite_and_grows_by_one(probe in arb_probe(), p in arb_obs()) {
                let r = HaltingOperator::default().apply(&probe, &p).unwrap();
                if let Some(n) = p.support_len() {
                    prop_assert_eq!(r.support_len(), Some(n + 1));
                    let check = HaltingOperator::default().is_fixed_point(&probe, &p).unwrap();
                    prop_assert!(!check.fixed);
                }
            }

            #[test]
            fn exact_step_unique(k in 0u64..30) {
                let probe = HaltProbe::halting_at(k);
                let hits = (0..40).filter(|&j| probe.halts_at_exact(j).unwrap()).count();
                prop_assert_eq!(hits, 1);
            }
        }
    }
}
