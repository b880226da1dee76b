//! Specialization, self-reference and the bounded-decider diagonal.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::program::{GuestProgram, GuestVerdict, Instr, Reg, Value, REGISTERS};
use super::vm::{run_guest, GuestMachine};
use super::GuestError;
use crate::machine::Step;

/// Fix the first input: the result writes `literal` into `r0`, then runs
/// `program`. Applied twice, the literal written last (the one from the
/// inner application) is the one `program` sees.
pub fn smn(program: &GuestProgram, literal: Value) -> Result<GuestProgram, GuestError> {
    program.prepend_load(Reg(0), literal)
}

/// Close a template over its own encoding.
///
/// Let `k` be the highest register the template never mentions and `B` the
/// template with every `SELF d` replaced by `DIAG d, k`. The result is
/// `P = [LOAD k, ⟨B⟩] ++ B`. When `DIAG d, k` runs, `k` still holds `⟨B⟩`,
/// so it writes `⟨[LOAD k, ⟨B⟩] ++ B⟩ = ⟨P⟩` into `d`.
///
/// Overhead over the template (counting `SELF` as one tick): one tick for
/// the leading `LOAD`.
pub fn quine_transform(template: &GuestProgram) -> Result<GuestProgram, GuestError> {
    if template.is_closed() {
        return Err(GuestError::NoSelf);
    }
    let used: BTreeSet<Reg> = template.instrs().iter().flat_map(Instr::registers).collect();
    let seed = (0..REGISTERS as u8)
        .rev()
        .map(Reg)
        .find(|r| !used.contains(r))
        .ok_or(GuestError::NoFreeRegister)?;
    let body = template
        .instrs()
        .iter()
        .map(|i| match i {
            Instr::SelfRef(d) => Instr::Diag { dst: *d, src: seed },
            other => other.clone(),
        })
        .collect();
    let body = GuestProgram::new(body)?;
    let quoted = Value::bytes(body.encode());
    body.prepend_load(seed, quoted)
}

/// `D_T`: read a program encoding from `r0`, run it on input 0 for at most
/// `t` transitions, emit `HALTS` if it halted, `DOES_NOT_HALT` otherwise.
/// Input that is not a closed program encoding idles out the budget and is
/// answered `DOES_NOT_HALT`.
///
/// ```text
/// 0  LOAD r1, t
/// 1  EXEC r2, r3, r0, r4, r1
/// 2  JZ   r2, 5
/// 3  EMIT HALTS
/// 4  HALT
/// 5  EMIT DOES_NOT_HALT
/// 6  HALT
/// ```
///
/// It halts at exact step `4 + min(k, t)` where `k` is the inner halting
/// step, so every run costs at most [`decider_cost_bound`] ticks.
pub fn make_bounded_decider(t: Step) -> GuestProgram {
    GuestProgram::new(vec![
        Instr::Load {
            dst: Reg(1),
            value: Value::Num(t),
        },
        Instr::Exec {
            halted: Reg(2),
            output: Reg(3),
            program: Reg(0),
            input: Reg(4),
            budget: Reg(1),
        },
        Instr::Jz { reg: Reg(2), target: 5 },
        Instr::Emit(GuestVerdict::Halts),
        Instr::Halt,
        Instr::Emit(GuestVerdict::DoesNotHalt),
        Instr::Halt,
    ])
    .expect("decider layout is valid")
}

/// Exact upper bound on the halting step of `make_bounded_decider(t)`.
pub fn decider_cost_bound(t: Step) -> Step {
    t.checked_add(4).expect("bound overflow")
}

/// `X`: obtain `⟨X⟩`, run `decider` on it with budget `cost_bound + 1`, then
/// halt if the verdict was `DOES_NOT_HALT` and `LOOP` otherwise.
///
/// Template before the quine transform:
///
/// ```text
/// 0  SELF r1
/// 1  LOAD r2, ⟨decider⟩
/// 2  LOAD r3, cost_bound + 1
/// 3  EXEC r4, r5, r2, r1, r3
/// 4  JZ   r5, 6
/// 5  LOOP
/// 6  HALT
/// ```
///
/// `cost_bound` is the decider's declared maximum halting step. The decider
/// is run once on `⟨X⟩` at construction time; if it has emitted nothing
/// within `cost_bound` ticks the construction fails.
pub fn make_diagonalizer(decider: &GuestProgram, cost_bound: Step) -> Result<GuestProgram, GuestError> {
    let d = GuestMachine::new(decider.clone())?;
    let budget = cost_bound
        .checked_add(1)
        .ok_or_else(|| GuestError::Invalid("cost bound overflow".into()))?;
    let template = GuestProgram::new(vec![
        Instr::SelfRef(Reg(1)),
        Instr::Load {
            dst: Reg(2),
            value: Value::bytes(decider.encode()),
        },
        Instr::Load {
            dst: Reg(3),
            value: Value::Num(budget),
        },
        Instr::Exec {
            halted: Reg(4),
            output: Reg(5),
            program: Reg(2),
            input: Reg(1),
            budget: Reg(3),
        },
        Instr::Jz { reg: Reg(5), target: 6 },
        Instr::Loop,
        Instr::Halt,
    ])?;
    let x = quine_transform(&template)?;
    let run = run_guest(&d, &Value::bytes(x.encode()), cost_bound)?;
    if run.output.as_ref().and_then(GuestVerdict::from_value).is_none() {
        return Err(GuestError::DeciderSilent { budget: cost_bound });
    }
    Ok(x)
}

/// What `X` was observed to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "step", rename_all = "snake_case")]
pub enum XBehavior {
    /// Halted at this exact step.
    Halted(Step),
    /// Reached the top-level `LOOP` at this step: structurally non-halting.
    Looped(Step),
    /// Neither within the fuel.
    Undetermined(Step),
}

/// Both sides of one diagonal experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalTranscript {
    pub cost_bound: Step,
    pub verdict: GuestVerdict,
    /// Step at which the decider halted on `⟨X⟩`.
    pub decider_halted_at: Step,
    pub x: XBehavior,
    /// Observed behavior contradicts the verdict.
    pub contradiction: bool,
}

impl DiagonalTranscript {
    /// Step index witnessing the contradiction, if there is one.
    pub fn witness_step(&self) -> Option<Step> {
        match (self.contradiction, self.x) {
            (true, XBehavior::Halted(s) | XBehavior::Looped(s)) => Some(s),
            _ => None,
        }
    }
}

/// Build `X` against `decider`, run the decider on `⟨X⟩` and `X` on input 0,
/// and compare.
pub fn diagonal_transcript(
    decider: &GuestProgram,
    cost_bound: Step,
    fuel: Step,
) -> Result<(GuestProgram, DiagonalTranscript), GuestError> {
    let x = make_diagonalizer(decider, cost_bound)?;
    let d = GuestMachine::new(decider.clone())?;
    let drun = run_guest(&d, &Value::bytes(x.encode()), cost_bound)?;
    let verdict = drun
        .output
        .as_ref()
        .and_then(GuestVerdict::from_value)
        .ok_or(GuestError::DeciderSilent { budget: cost_bound })?;
    let xm = GuestMachine::new(x.clone())?;
    let xrun = run_guest(&xm, &Value::Num(0), fuel)?;
    let behavior = match (xrun.halted_at, xrun.loop_at) {
        (Some(k), _) => XBehavior::Halted(k),
        (None, Some(s)) => XBehavior::Looped(s),
        (None, None) => XBehavior::Undetermined(xrun.steps),
    };
    let contradiction = matches!(
        (verdict, behavior),
        (GuestVerdict::DoesNotHalt, XBehavior::Halted(_)) | (GuestVerdict::Halts, XBehavior::Looped(_))
    );
    Ok((
        x,
        DiagonalTranscript {
            cost_bound,
            verdict,
            decider_halted_at: drun.halted_at.unwrap_or(drun.steps),
            x: behavior,
            contradiction,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::machine::{run_bounded, RunVerdict};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(p: &GuestProgram, input: Value) -> super::super::GuestRun {
        run_guest(&GuestMachine::new(p.clone()).unwrap(), &input, 10_000).unwrap()
    }

    #[test]
    fn smn_fixes_the_input() {
        let identity = GuestProgram::parse("EMIT r0\nHALT").unwrap();
        let p = smn(&identity, Value::Num(7)).unwrap();
        for input in [Value::Num(0), Value::Num(99), Value::bytes(vec![1, 2])] {
            assert_eq!(run(&p, input).output, Some(Value::Num(7)));
        }
    }

    #[test]
    fn smn_twice_inner_literal_wins() {
        let identity = GuestProgram::parse("EMIT r0\nHALT").unwrap();
        let p = smn(&smn(&identity, Value::Num(1)).unwrap(), Value::Num(2)).unwrap();
        // [LOAD r0 2; LOAD r0 1; EMIT r0; HALT]: the later write is 1.
        assert_eq!(run(&p, Value::Num(0)).output, Some(Value::Num(1)));
    }

    fn pool() -> Vec<GuestProgram> {
        [
            "EMIT r0\nHALT",
            "COPY r3, r0\nEMIT r3\nHALT",
            "JZ r0, z\nEMIT HALTS\nHALT\nz: EMIT DOES_NOT_HALT\nHALT",
            "INC r0\nINC r0\nEMIT r0\nHALT",
            "DEC r0\nDEC r0\nEMIT r0\nHALT",
            "top: JZ r0, end\nDEC r0\nJMP top\nend: EMIT r0\nHALT",
            "LOAD r2, 5\nEXEC r3, r4, r0, r2, r2\nEMIT r3\nHALT",
        ]
        .iter()
        .map(|t| GuestProgram::parse(t).unwrap())
        .collect()
    }

    /// Specializing and running through EXEC gives what running directly
    /// gives.
    #[test]
    fn smn_then_exec_matches_direct_run() {
        let pool = pool();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inputs = [
            Value::Num(0),
            Value::Num(3),
            Value::bytes(fixtures::g_halt().encode()),
            Value::bytes(fixtures::g_loop().encode()),
        ];
        for _ in 0..20 {
            let p = &pool[rng.random_range(0..pool.len())];
            let q = &inputs[rng.random_range(0..inputs.len())];
            // Arithmetic on a bytes input faults; such pairs have no run to compare.
            let Ok(direct) = run_guest(&GuestMachine::new(p.clone()).unwrap(), q, 10_000) else {
                continue;
            };
            let specialized = smn(p, q.clone()).unwrap();
            let wrapper = GuestProgram::new(vec![
                Instr::Load {
                    dst: Reg(1),
                    value: Value::bytes(specialized.encode()),
                },
                Instr::Load {
                    dst: Reg(2),
                    value: Value::Num(1000),
                },
                Instr::Exec {
                    halted: Reg(3),
                    output: Reg(4),
                    program: Reg(1),
                    input: Reg(5),
                    budget: Reg(2),
                },
                Instr::EmitReg(Reg(4)),
                Instr::Halt,
            ])
            .unwrap();
            let via = run(&wrapper, Value::Num(0));
            assert!(direct.halted_at.is_some());
            assert_eq!(
                via.output,
                Some(direct.output.unwrap_or_else(Value::empty)),
                "{}",
                p.to_asm()
            );
        }
    }

    #[test]
    fn quine_outputs_its_own_encoding() {
        let t = GuestProgram::parse("SELF r0\nEMIT r0\nHALT").unwrap();
        let p = quine_transform(&t).unwrap();
        assert_eq!(run(&p, Value::Num(0)).output, Some(Value::bytes(p.encode())));
    }

    #[test]
    fn quine_fidelity_for_several_templates() {
        for text in [
            "SELF r0\nEMIT r0\nHALT",
            "LOAD r3, 9\nSELF r7\nEMIT r7\nHALT",
            "JZ r0, a\nLOOP\na: SELF r2\nSELF r4\nEMIT r4\nHALT",
        ] {
            let p = quine_transform(&GuestProgram::parse(text).unwrap()).unwrap();
            assert!(p.is_closed());
            assert_eq!(run(&p, Value::Num(0)).output, Some(Value::bytes(p.encode())), "{text}");
        }
    }

    #[test]
    fn quine_overhead_is_one_tick() {
        let p = quine_transform(&GuestProgram::parse("SELF r0\nHALT").unwrap()).unwrap();
        // Template would halt at 1 (one tick for SELF); the prologue adds 1.
        let m = GuestMachine::new(p).unwrap();
        assert_eq!(run_bounded(&m, &Value::Num(0), 100).unwrap().0, RunVerdict::HaltsAt(2));
    }

    #[test]
    fn quine_of_distinct_templates_differ() {
        let a = quine_transform(&GuestProgram::parse("SELF r0\nHALT").unwrap()).unwrap();
        let b = quine_transform(&GuestProgram::parse("SELF r0\nLOOP").unwrap()).unwrap();
        assert_ne!(a, b);
        assert_ne!(a.encode(), b.encode());
    }

    #[test]
    fn quine_rejects_closed_or_full_templates() {
        assert_eq!(quine_transform(&fixtures::g_halt()), Err(GuestError::NoSelf));
        let mut text = String::from("SELF r0\n");
        for r in 1..16 {
            text.push_str(&format!("INC r{r}\n"));
        }
        text.push_str("HALT");
        assert_eq!(
            quine_transform(&GuestProgram::parse(&text).unwrap()),
            Err(GuestError::NoFreeRegister)
        );
    }

    fn decide(t: Step, target: &GuestProgram) -> (GuestVerdict, RunVerdict, u64) {
        let d = GuestMachine::new(make_bounded_decider(t)).unwrap();
        let input = Value::bytes(target.encode());
        let run = run_guest(&d, &input, 10_000).unwrap();
        let (v, ledger) = run_bounded(&d, &input, 10_000).unwrap();
        (
            GuestVerdict::from_value(run.output.as_ref().unwrap()).unwrap(),
            v,
            ledger.total(),
        )
    }

    #[test]
    fn bounded_decider_examples() {
        let inc_halt = GuestProgram::parse("INC r0\nHALT").unwrap();
        assert_eq!(decide(5, &inc_halt).0, GuestVerdict::Halts);
        let (v, run, total) = decide(3, &fixtures::g_loop());
        assert_eq!(v, GuestVerdict::DoesNotHalt);
        assert_eq!(run, RunVerdict::HaltsAt(decider_cost_bound(3)));
        assert!(total >= 4);
        assert_eq!(decide(0, &fixtures::g_halt()).0, GuestVerdict::Halts);
    }

    #[test]
    fn bounded_decider_boundary() {
        // g_countdown halts at exactly 17.
        assert_eq!(decide(16, &fixtures::g_countdown()).0, GuestVerdict::DoesNotHalt);
        assert_eq!(decide(17, &fixtures::g_countdown()).0, GuestVerdict::Halts);
    }

    #[test]
    fn bounded_decider_on_garbage_says_no() {
        let d = GuestMachine::new(make_bounded_decider(4)).unwrap();
        for input in [Value::Num(5), Value::bytes(vec![0xff; 3])] {
            let run = run_guest(&d, &input, 100).unwrap();
            assert_eq!(run.output, Some(GuestVerdict::DoesNotHalt.to_value()));
            assert_eq!(run.halted_at, Some(decider_cost_bound(4)));
        }
    }

    #[test]
    fn diagonalizer_against_d3() {
        let (_, tr) = diagonal_transcript(&make_bounded_decider(3), decider_cost_bound(3), 1000).unwrap();
        assert_eq!(tr.verdict, GuestVerdict::DoesNotHalt);
        assert_eq!(tr.x, XBehavior::Halted(3 + 10));
        assert!(tr.contradiction);
        assert!(tr.witness_step().unwrap() > 3);
    }

    #[test]
    fn diagonalizer_against_always_yes() {
        let yes = GuestProgram::parse("EMIT HALTS\nHALT").unwrap();
        let (x, tr) = diagonal_transcript(&yes, 1, 1000).unwrap();
        assert_eq!(tr.verdict, GuestVerdict::Halts);
        assert_eq!(tr.x, XBehavior::Looped(7));
        assert!(tr.contradiction);
        let m = GuestMachine::new(x).unwrap();
        for t in [10, 100, 1000] {
            assert_eq!(run_bounded(&m, &Value::Num(0), t).unwrap().0, RunVerdict::RunningAt(t));
        }
    }

    #[test]
    fn silent_decider_is_rejected() {
        let mute = GuestProgram::parse("HALT").unwrap();
        assert_eq!(
            make_diagonalizer(&mute, 5),
            Err(GuestError::DeciderSilent { budget: 5 })
        );
        assert!(make_diagonalizer(&fixtures::g_loop(), 50).is_err());
    }
}
