//! Named reference machines shipped with the repository (`fixtures/`).

use crate::guest::GuestProgram;
use crate::tm::{parse_machine, MachineSpec};

pub const M_HALT0: &str = include_str!("../../../fixtures/m_halt0.tm");
pub const M_HALT2: &str = include_str!("../../../fixtures/m_halt2.tm");
pub const M_LOOP: &str = include_str!("../../../fixtures/m_loop.tm");
pub const M_PINGPONG: &str = include_str!("../../../fixtures/m_pingpong.tm");
pub const M_BB2: &str = include_str!("../../../fixtures/m_bb2.tm");
pub const M_ERASER: &str = include_str!("../../../fixtures/m_eraser.tm");

pub const G_LOOP: &str = include_str!("../../../fixtures/g_loop.gasm");
pub const G_HALT: &str = include_str!("../../../fixtures/g_halt.gasm");
pub const G_COUNTDOWN: &str = include_str!("../../../fixtures/g_countdown.gasm");

fn tm(text: &str) -> MachineSpec {
    parse_machine(text).expect("bundled fixture parses")
}

/// Halted at step 0.
pub fn m_halt0() -> MachineSpec {
    tm(M_HALT0)
}

/// Halts at exact step 2 on every input.
pub fn m_halt2() -> MachineSpec {
    tm(M_HALT2)
}

/// Never halts: moves right forever.
pub fn m_loop() -> MachineSpec {
    tm(M_LOOP)
}

/// Never halts: bounces between two cells.
pub fn m_pingpong() -> MachineSpec {
    tm(M_PINGPONG)
}

/// Halts at exact step 6 on the empty tape.
pub fn m_bb2() -> MachineSpec {
    tm(M_BB2)
}

/// Halts at step `n + 1` on `1^n`.
pub fn m_eraser() -> MachineSpec {
    tm(M_ERASER)
}

fn guest(text: &str) -> GuestProgram {
    GuestProgram::parse(text).expect("bundled fixture parses")
}

/// `[LOOP]`.
pub fn g_loop() -> GuestProgram {
    guest(G_LOOP)
}

/// `[HALT]`.
pub fn g_halt() -> GuestProgram {
    guest(G_HALT)
}

/// Counts register 1 down from 5; halts at exact step 17.
pub fn g_countdown() -> GuestProgram {
    guest(G_COUNTDOWN)
}

/// Every bundled Turing machine with its name, whether it halts on the
/// empty tape, and if so the exact step.
pub fn turing_fixtures() -> Vec<(&'static str, MachineSpec, Option<u64>)> {
    vec![
        ("m_halt0", m_halt0(), Some(0)),
        ("m_halt2", m_halt2(), Some(2)),
        ("m_loop", m_loop(), None),
        ("m_pingpong", m_pingpong(), None),
        ("m_bb2", m_bb2(), Some(6)),
        ("m_eraser", m_eraser(), Some(1)),
    ]
}
