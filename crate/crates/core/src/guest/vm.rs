//! Tick-level interpreter for guest programs.
//!
//! One call to `step` retires one tick. Most instructions take one tick.
//! `EXEC` takes one dispatch tick plus one tick per transition of the inner
//! program, so it charges exactly `min(k, budget) + 1` ticks where `k` is the
//! inner program's exact halting step. Nested `EXEC`s are kept as a frame
//! stack inside the configuration; every tick is a transition of every
//! enclosing frame.
//!
//! Inner programs that cannot run (bytes that do not decode, an unresolved
//! `SELF`, a runtime fault) are replaced by a frame that idles until its
//! budget is spent, so `EXEC` always completes. Faults in the top-level
//! program are errors.

use std::sync::Arc;

use super::program::{GuestProgram, Instr, Reg, Value, REGISTERS};
use super::GuestError;
use crate::machine::{Machine, Step, StepOutcome};

#[derive(Debug, Clone, PartialEq)]
enum Code {
    Program(Arc<GuestProgram>),
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    code: Code,
    pc: u32,
    regs: Vec<Value>,
    output: Option<Value>,
    steps: Step,
    budget: Option<Step>,
    /// Registers of the parent frame receiving (halted, output).
    ret: Option<(Reg, Reg)>,
}

impl Frame {
    fn new(code: Code, input: Value, budget: Option<Step>, ret: Option<(Reg, Reg)>) -> Frame {
        let mut regs = vec![Value::Num(0); REGISTERS];
        regs[0] = input;
        Frame {
            code,
            pc: 0,
            regs,
            output: None,
            steps: 0,
            budget,
            ret,
        }
    }

    fn current(&self) -> Option<&Instr> {
        match &self.code {
            Code::Program(p) => p.instrs().get(self.pc as usize),
            Code::Idle => None,
        }
    }

    fn at_halt(&self) -> bool {
        matches!(self.current(), Some(Instr::Halt))
    }

    fn exhausted(&self) -> bool {
        self.budget == Some(self.steps)
    }
}

/// Guest machine configuration: the frame stack, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct GuestConfig {
    frames: Vec<Frame>,
}

impl GuestConfig {
    pub fn step(&self) -> Step {
        self.frames[0].steps
    }

    /// Nesting depth of in-progress `EXEC`s.
    pub fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn pc(&self) -> u32 {
        self.frames[0].pc
    }

    pub fn register(&self, r: Reg) -> &Value {
        &self.frames[0].regs[r.0 as usize]
    }

    /// Value emitted by the top-level program so far.
    pub fn output(&self) -> Option<&Value> {
        self.frames[0].output.as_ref()
    }

    /// Control of the top-level program sits on `LOOP` with no `EXEC` in
    /// flight. Every later configuration repeats this one up to the step
    /// counter, so the program never halts.
    pub fn at_loop(&self) -> bool {
        self.frames.len() == 1 && matches!(self.frames[0].current(), Some(Instr::Loop))
    }
}

/// A closed guest program viewed as a [`Machine`]. Its input is placed in
/// register 0; all other registers start at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GuestMachine {
    program: Arc<GuestProgram>,
}

impl GuestMachine {
    /// Refuses programs that still contain `SELF`.
    pub fn new(program: GuestProgram) -> Result<Self, GuestError> {
        if !program.is_closed() {
            return Err(GuestError::UnresolvedSelf);
        }
        Ok(GuestMachine {
            program: Arc::new(program),
        })
    }

    pub fn program(&self) -> &GuestProgram {
        &self.program
    }

    fn validate(&self, c: &GuestConfig) -> Result<(), GuestError> {
        let bad = |m: &str| Err(GuestError::BadConfiguration(m.into()));
        let Some(top) = c.frames.first() else {
            return bad("no frames");
        };
        match &top.code {
            Code::Program(p) if **p == *self.program => {}
            _ => return bad("top frame runs a different program"),
        }
        if top.budget.is_some() || top.ret.is_some() {
            return bad("top frame has a budget");
        }
        for f in &c.frames {
            if f.regs.len() != REGISTERS {
                return bad("register file size");
            }
            if let Code::Program(p) = &f.code {
                if f.pc as usize >= p.len() {
                    return bad("pc out of range");
                }
            }
        }
        Ok(())
    }

    /// One tick.
    fn tick(&self, c: &mut GuestConfig) -> Result<(), GuestError> {
        let depth = c.frames.len() - 1;
        let spawned = {
            let frame = &mut c.frames[depth];
            match execute(frame) {
                Ok(spawn) => spawn,
                Err(message) if depth == 0 => return Err(GuestError::Fault { pc: frame.pc, message }),
                Err(_) => {
                    frame.code = Code::Idle;
                    None
                }
            }
        };
        for f in &mut c.frames {
            f.steps = f.steps.checked_add(1).expect("step index overflow");
        }
        if let Some(child) = spawned {
            c.frames.push(child);
        }
        // Retire finished inner runs innermost first, so a parent whose
        // child finishes on the parent's last budgeted tick still reaches
        // its next instruction. A frame out of budget takes its unfinished
        // descendants with it.
        loop {
            let n = c.frames.len();
            if n == 1 {
                break;
            }
            let inner = &c.frames[n - 1];
            if !(inner.exhausted() || inner.at_halt()) {
                match (1..n - 1).find(|&j| c.frames[j].exhausted()) {
                    Some(j) => {
                        c.frames.truncate(j + 1);
                        continue;
                    }
                    None => break,
                }
            }
            let child = c.frames.pop().expect("n > 1");
            let halted = child.at_halt();
            let (h, o) = child.ret.expect("inner frames carry return registers");
            let parent = c.frames.last_mut().expect("parent frame");
            parent.regs[h.0 as usize] = Value::Num(halted as u64);
            parent.regs[o.0 as usize] = child.output.unwrap_or_else(Value::empty);
            parent.pc += 1;
        }
        Ok(())
    }
}

/// Execute the instruction under `frame.pc`. Returns a frame to push when
/// the instruction is an `EXEC` dispatch. `Err` is a runtime fault.
fn execute(frame: &mut Frame) -> Result<Option<Frame>, String> {
    let Code::Program(program) = &frame.code else {
        return Ok(None);
    };
    let instr = program
        .instrs()
        .get(frame.pc as usize)
        .ok_or("pc out of range")?
        .clone();
    let reg = |r: Reg| r.0 as usize;
    let num = |frame: &Frame, r: Reg| match &frame.regs[reg(r)] {
        Value::Num(n) => Ok(*n),
        Value::Bytes(_) => Err(format!("{r} holds bytes, expected a number")),
    };
    match instr {
        Instr::Load { dst, value } => {
            frame.regs[reg(dst)] = value;
            frame.pc += 1;
        }
        Instr::Copy { dst, src } => {
            frame.regs[reg(dst)] = frame.regs[reg(src)].clone();
            frame.pc += 1;
        }
        Instr::Inc(r) => {
            let n = num(frame, r)?.checked_add(1).ok_or("INC overflow")?;
            frame.regs[reg(r)] = Value::Num(n);
            frame.pc += 1;
        }
        Instr::Dec(r) => {
            frame.regs[reg(r)] = Value::Num(num(frame, r)?.saturating_sub(1));
            frame.pc += 1;
        }
        Instr::Jz { reg: r, target } => {
            frame.pc = if frame.regs[reg(r)].is_zero() {
                target
            } else {
                frame.pc + 1
            };
        }
        Instr::Jmp { target } => frame.pc = target,
        Instr::Exec {
            halted,
            output,
            program: p,
            input,
            budget,
        } => {
            let budget = num(frame, budget)?;
            let code = frame.regs[reg(p)]
                .as_bytes()
                .and_then(|b| GuestProgram::decode(b).ok())
                .filter(GuestProgram::is_closed)
                .map(|p| Code::Program(Arc::new(p)))
                .unwrap_or(Code::Idle);
            let child = Frame::new(
                code,
                frame.regs[reg(input)].clone(),
                Some(budget),
                Some((halted, output)),
            );
            // pc stays on EXEC until the child is retired.
            return Ok(Some(child));
        }
        Instr::Emit(v) => {
            emit(frame, v.to_value())?;
            frame.pc += 1;
        }
        Instr::EmitReg(r) => {
            emit(frame, frame.regs[reg(r)].clone())?;
            frame.pc += 1;
        }
        Instr::Diag { dst, src } => {
            let bytes = frame.regs[reg(src)]
                .as_bytes()
                .ok_or_else(|| format!("DIAG: {src} holds a number"))?
                .to_vec();
            let q = GuestProgram::decode(&bytes).map_err(|e| format!("DIAG: {e}"))?;
            let quoted = q
                .prepend_load(src, Value::bytes(bytes))
                .map_err(|e| format!("DIAG: {e}"))?;
            frame.regs[reg(dst)] = Value::bytes(quoted.encode());
            frame.pc += 1;
        }
        Instr::Loop => {}
        Instr::SelfRef(_) => return Err("unresolved SELF".into()),
        Instr::Halt => return Err("HALT executed".into()),
    }
    Ok(None)
}

fn emit(frame: &mut Frame, v: Value) -> Result<(), String> {
    if frame.output.is_some() {
        return Err("EMIT fired twice".into());
    }
    frame.output = Some(v);
    Ok(())
}

impl Machine for GuestMachine {
    type Input = Value;
    type Config = GuestConfig;
    type Error = GuestError;

    fn initial(&self, input: &Value) -> Result<GuestConfig, GuestError> {
        Ok(GuestConfig {
            frames: vec![Frame::new(
                Code::Program(self.program.clone()),
                input.clone(),
                None,
                None,
            )],
        })
    }

    fn step(&self, config: &GuestConfig) -> Result<StepOutcome<GuestConfig>, GuestError> {
        let mut next = config.clone();
        if self.advance(&mut next)? {
            Ok(StepOutcome::Running(next))
        } else {
            Ok(StepOutcome::Halted)
        }
    }

    fn step_index(&self, config: &GuestConfig) -> Step {
        config.step()
    }

    fn is_halting(&self, config: &GuestConfig) -> Result<bool, GuestError> {
        self.validate(config)?;
        Ok(config.frames.len() == 1 && config.frames[0].at_halt())
    }

    fn advance(&self, config: &mut GuestConfig) -> Result<bool, GuestError> {
        if self.is_halting(config)? {
            return Ok(false);
        }
        self.tick(config)?;
        Ok(true)
    }
}

/// Outcome of running a guest program with a fuel limit.
#[derive(Debug, Clone, PartialEq)]
pub struct GuestRun {
    /// Halted at this exact step.
    pub halted_at: Option<Step>,
    /// Structurally non-halting: reached top-level `LOOP` at this step.
    pub loop_at: Option<Step>,
    /// Steps actually executed.
    pub steps: Step,
    pub output: Option<Value>,
}

/// Run `program` on `input` for at most `fuel` ticks, stopping early on
/// halting or on reaching a top-level `LOOP`.
pub fn run_guest(machine: &GuestMachine, input: &Value, fuel: Step) -> Result<GuestRun, GuestError> {
    let mut c = machine.initial(input)?;
    loop {
        if machine.is_halting(&c)? {
            return Ok(GuestRun {
                halted_at: Some(c.step()),
                loop_at: None,
                steps: c.step(),
                output: c.output().cloned(),
            });
        }
        if c.at_loop() {
            return Ok(GuestRun {
                halted_at: None,
                loop_at: Some(c.step()),
                steps: c.step(),
                output: c.output().cloned(),
            });
        }
        if c.step() >= fuel {
            return Ok(GuestRun {
                halted_at: None,
                loop_at: None,
                steps: c.step(),
                output: c.output().cloned(),
            });
        }
        machine.tick(&mut c)?;
    }
}
