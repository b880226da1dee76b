//! A small register VM with a bounded simulate primitive (`EXEC`), program
//! specialization and a quine transform.

mod construct;
pub mod program;
mod vm;

pub use construct::{
    decider_cost_bound, diagonal_transcript, make_bounded_decider, make_diagonalizer, quine_transform, smn,
    DiagonalTranscript, XBehavior,
};
pub use program::{GuestProgram, GuestVerdict, Instr, Reg, Value, REGISTERS};
pub use vm::{run_guest, GuestConfig, GuestMachine, GuestRun};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GuestError {
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Asm { line: usize, message: String },
    #[error("malformed program encoding at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("fault at pc {pc}: {message}")]
    Fault { pc: u32, message: String },
    #[error("configuration does not belong to this program: {0}")]
    BadConfiguration(String),
    #[error("program contains SELF; pass it through quine_transform first")]
    UnresolvedSelf,
    #[error("template has no SELF instruction")]
    NoSelf,
    #[error("template uses every register; none left for the quine seed")]
    NoFreeRegister,
    #[error("decider emitted no verdict within {budget} ticks")]
    DeciderSilent { budget: u64 },
}
