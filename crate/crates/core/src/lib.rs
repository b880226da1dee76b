//! Halting observations as a Scott domain: the one-step observation
//! operator, its Kleene chain and limit, and the diagonal argument against
//! step-bounded deciders, over Turing machines and a small register VM.

pub mod fixtures;
pub mod guest;
pub mod harness;
pub mod machine;
pub mod obs;
pub mod operator;
pub mod tm;
mod wire;

pub use harness::{Config, PropertyResult, Subject, SuiteReport};
pub use machine::{halted_by, halts_at_exact, run_bounded, trace, CostLedger, Machine, RunVerdict, Step, StepOutcome};
pub use obs::{in_bounded_class, is_directed, leq, lub, Bit, ObsError, PartialObservation, Tail};
pub use operator::{
    apply_f, is_fixed_point, iterate_chain, make_p_omega, semidecide_halts, CaseTable, ChainRecord, FixedPointCheck,
    HaltProbe, HaltingOperator, Omega, OperatorError, SemiDecision,
};
