//! Model-agnostic machine interface and the tick-exact bounded runner.
//!
//! A configuration at step `t` is the snapshot after `t` followed
//! transitions. A machine *halts at exact step `k`* when the configuration at
//! step `k` is halting and none before it is.
//!
//! Tick model: one tick per transition actually followed, plus one tick per
//! emitted verdict. Under this model a verdict about step `T` costs at least
//! `T + 1` ticks whenever the machine is still running at `T`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Step index. Arithmetic on step indices is always checked.
pub type Step = u64;

/// Result of a single transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome<C> {
    Running(C),
    Halted,
}

/// Verdict of a bounded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunVerdict {
    /// Halting configuration first reached at this exact step.
    HaltsAt(Step),
    /// No configuration up to and including this step is halting.
    RunningAt(Step),
}

impl RunVerdict {
    pub fn halted(&self) -> bool {
        matches!(self, RunVerdict::HaltsAt(_))
    }
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunVerdict::HaltsAt(k) => write!(f, "HALTS at {k}"),
            RunVerdict::RunningAt(t) => write!(f, "RUNNING at {t}"),
        }
    }
}

/// Tick accounting for one bounded run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostLedger {
    simulated_steps: u64,
    verdict_ticks: u64,
    total: u64,
}

impl CostLedger {
    /// The ledger of a computation that has not done anything yet.
    pub const EMPTY: CostLedger = CostLedger {
        simulated_steps: 0,
        verdict_ticks: 0,
        total: 0,
    };

    pub fn new(simulated_steps: u64, verdict_ticks: u64) -> Self {
        let total = simulated_steps.checked_add(verdict_ticks).expect("tick count overflow");
        CostLedger {
            simulated_steps,
            verdict_ticks,
            total,
        }
    }

    pub fn simulated_steps(&self) -> u64 {
        self.simulated_steps
    }

    pub fn verdict_ticks(&self) -> u64 {
        self.verdict_ticks
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// A deterministic computational device.
///
/// Implementations must be pure: `step` on the same configuration always
/// yields the same outcome, and nothing is mutated behind `&self`.
pub trait Machine {
    type Input: ?Sized;
    type Config: Clone + fmt::Debug + PartialEq;
    type Error: std::error::Error + Send + Sync + 'static;

    /// Configuration at step 0 for the given input.
    fn initial(&self, input: &Self::Input) -> Result<Self::Config, Self::Error>;

    /// `Halted` iff `config` is a halting configuration, otherwise the unique
    /// successor configuration.
    fn step(&self, config: &Self::Config) -> Result<StepOutcome<Self::Config>, Self::Error>;

    /// Step index recorded in a configuration.
    fn step_index(&self, config: &Self::Config) -> Step;

    fn is_halting(&self, config: &Self::Config) -> Result<bool, Self::Error> {
        Ok(matches!(self.step(config)?, StepOutcome::Halted))
    }

    /// In-place form of [`Machine::step`]: returns `false` (leaving `config`
    /// untouched) when it is halting. Overridden where cloning a
    /// configuration per step is expensive; must agree with `step`.
    fn advance(&self, config: &mut Self::Config) -> Result<bool, Self::Error> {
        match self.step(config)? {
            StepOutcome::Halted => Ok(false),
            StepOutcome::Running(next) => {
                *config = next;
                Ok(true)
            }
        }
    }
}

/// Run `machine` on `input` for at most `bound` transitions.
///
/// `simulated_steps` is `min(k, bound)` where `k` is the exact halting step,
/// and exactly one verdict tick is charged.
pub fn run_bounded<M: Machine>(
    machine: &M,
    input: &M::Input,
    bound: Step,
) -> Result<(RunVerdict, CostLedger), M::Error> {
    let mut config = machine.initial(input)?;
    let mut t: Step = 0;
    loop {
        if t == bound {
            // Inspecting c_T for haltingness is not a followed transition.
            return Ok(if machine.is_halting(&config)? {
                (RunVerdict::HaltsAt(t), CostLedger::new(t, 1))
            } else {
                (RunVerdict::RunningAt(bound), CostLedger::new(t, 1))
            });
        }
        if !machine.advance(&mut config)? {
            return Ok((RunVerdict::HaltsAt(t), CostLedger::new(t, 1)));
        }
        t = t.checked_add(1).expect("step index overflow");
    }
}

/// True iff the exact halting step equals `k`.
pub fn halts_at_exact<M: Machine>(machine: &M, input: &M::Input, k: Step) -> Result<bool, M::Error> {
    Ok(run_bounded(machine, input, k)?.0 == RunVerdict::HaltsAt(k))
}

/// True iff the machine has halted at some step `<= k`.
pub fn halted_by<M: Machine>(machine: &M, input: &M::Input, k: Step) -> Result<bool, M::Error> {
    Ok(run_bounded(machine, input, k)?.0.halted())
}

/// Configurations `c_0, c_1, …` up to the first halting one or `limit`
/// transitions, whichever comes first.
pub fn trace<M: Machine>(machine: &M, input: &M::Input, limit: Step) -> Result<Vec<M::Config>, M::Error> {
    let mut config = machine.initial(input)?;
    let mut out = Vec::new();
    loop {
        let outcome = machine.step(&config)?;
        let t = machine.step_index(&config);
        out.push(config);
        match outcome {
            StepOutcome::Halted => return Ok(out),
            StepOutcome::Running(_) if t >= limit => return Ok(out),
            StepOutcome::Running(next) => config = next,
        }
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Counter that halts once it reaches `halt_at` (never, if `None`).
    #[derive(Debug, Clone)]
    pub struct Countdown {
        pub halt_at: Option<Step>,
    }

    #[derive(Debug, thiserror::Error)]
    #[error("never")]
    pub struct Never;

    impl Machine for Countdown {
        type Input = ();
        type Config = Step;
        type Error = Never;

        fn initial(&self, _: &()) -> Result<Step, Never> {
            Ok(0)
        }

        fn step(&self, c: &Step) -> Result<StepOutcome<Step>, Never> {
            Ok(match self.halt_at {
                Some(h) if *c >= h => StepOutcome::Halted,
                _ => StepOutcome::Running(c + 1),
            })
        }

        fn step_index(&self, c: &Step) -> Step {
            *c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testing::Countdown;
    use super::*;

    #[test]
    fn running_verdict_costs_bound_plus_one() {
        let m = Countdown { halt_at: None };
        for bound in 0..50 {
            let (v, ledger) = run_bounded(&m, &(), bound).unwrap();
            assert_eq!(v, RunVerdict::RunningAt(bound));
            assert_eq!(ledger.simulated_steps(), bound);
            assert_eq!(ledger.verdict_ticks(), 1);
            assert_eq!(ledger.total(), bound + 1);
        }
    }

    #[test]
    fn halting_cost_plateaus() {
        let m = Countdown { halt_at: Some(7) };
        for bound in 0..20 {
            let (v, ledger) = run_bounded(&m, &(), bound).unwrap();
            if bound >= 7 {
                assert_eq!(v, RunVerdict::HaltsAt(7));
                assert_eq!(ledger.total(), 8);
            } else {
                assert_eq!(v, RunVerdict::RunningAt(bound));
            }
        }
    }

    #[test]
    fn exact_halting_step_is_unique() {
        let m = Countdown { halt_at: Some(3) };
        let hits: Vec<_> = (0..10).filter(|&k| halts_at_exact(&m, &(), k).unwrap()).collect();
        assert_eq!(hits, vec![3]);
        assert!(!halted_by(&m, &(), 2).unwrap());
        assert!(halted_by(&m, &(), 3).unwrap());
        assert!(halted_by(&m, &(), 9).unwrap());
    }

    #[test]
    fn ledger_total_is_sum() {
        let l = CostLedger::new(4, 1);
        assert_eq!(l.total(), 5);
        assert_eq!(CostLedger::EMPTY.total(), 0);
    }

    #[test]
    fn trace_stops_at_halting_config() {
        let m = Countdown { halt_at: Some(2) };
        assert_eq!(trace(&m, &(), 100).unwrap(), vec![0, 1, 2]);
        let m = Countdown { halt_at: None };
        assert_eq!(trace(&m, &(), 3).unwrap(), vec![0, 1, 2, 3]);
    }
}
