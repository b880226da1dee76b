//! Guest programs: instruction set, assembly text, binary encoding.
//!
//! Binary encoding (same framing as machine encodings):
//!
//! ```text
//! 0  4  magic "SLGP"
//! 4  1  version (1)
//! 5  4  body length, u32 LE
//! 9  .. body: u32 instruction count, then per instruction an opcode byte
//!       followed by its operands (registers are u8, targets u32 LE):
//!       0x01 LOAD  dst, tag u8 (0: u64 LE number | 1: u32 LE length + bytes)
//!       0x02 COPY  dst, src
//!       0x03 INC   r
//!       0x04 DEC   r
//!       0x05 JZ    r, target
//!       0x06 JMP   target
//!       0x07 EXEC  halted, output, program, input, budget
//!       0x08 EMIT  verdict byte (1 = HALTS, 0 = DOES_NOT_HALT)
//!       0x09 EMIT  r            (emit register contents)
//!       0x0A SELF  dst
//!       0x0B DIAG  dst, src
//!       0x0C HALT
//!       0x0D LOOP
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::GuestError;
use crate::wire::{Reader, WireError, Writer};

pub const MAGIC: &[u8; 4] = b"SLGP";
pub const VERSION: u8 = 1;

/// Size of the register file.
pub const REGISTERS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(pub u8);

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Register contents.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Num(u64),
    Bytes(Arc<[u8]>),
}

impl Value {
    pub fn bytes(b: impl Into<Arc<[u8]>>) -> Value {
        Value::Bytes(b.into())
    }

    pub fn empty() -> Value {
        Value::Bytes(Arc::from(&[][..]))
    }

    /// `JZ` treats `0` and the empty byte string as zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Num(n) => *n == 0,
            Value::Bytes(b) => b.is_empty(),
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            Value::Bytes(b) => Some(b),
            Value::Num(_) => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Bytes(b) => {
                f.write_str("0x")?;
                for byte in b.iter() {
                    write!(f, "{byte:02x}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuestVerdict {
    #[serde(rename = "HALTS")]
    Halts,
    #[serde(rename = "DOES_NOT_HALT")]
    DoesNotHalt,
}

impl GuestVerdict {
    /// Single-byte wire form.
    pub fn to_byte(self) -> u8 {
        match self {
            GuestVerdict::Halts => 1,
            GuestVerdict::DoesNotHalt => 0,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(GuestVerdict::Halts),
            0 => Some(GuestVerdict::DoesNotHalt),
            _ => None,
        }
    }

    /// Verdicts are emitted as the numbers 1 and 0.
    pub fn to_value(self) -> Value {
        Value::Num(self.to_byte() as u64)
    }

    pub fn from_value(v: &Value) -> Option<Self> {
        match v {
            Value::Num(n) => u8::try_from(*n).ok().and_then(Self::from_byte),
            Value::Bytes(_) => None,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GuestVerdict::Halts => "HALTS",
            GuestVerdict::DoesNotHalt => "DOES_NOT_HALT",
        }
    }
}

impl fmt::Display for GuestVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    Load {
        dst: Reg,
        value: Value,
    },
    Copy {
        dst: Reg,
        src: Reg,
    },
    Inc(Reg),
    /// Natural-number decrement: `DEC` of 0 stays 0.
    Dec(Reg),
    Jz {
        reg: Reg,
        target: u32,
    },
    Jmp {
        target: u32,
    },
    /// Run the program encoded in `program` on `input` for at most `budget`
    /// transitions; write 1/0 (halted within budget) to `halted` and the
    /// inner program's emitted value (empty bytes if none) to `output`.
    Exec {
        halted: Reg,
        output: Reg,
        program: Reg,
        input: Reg,
        budget: Reg,
    },
    Emit(GuestVerdict),
    EmitReg(Reg),
    /// Placeholder for the program's own encoding. Only valid in templates
    /// given to `quine_transform`.
    SelfRef(Reg),
    /// `dst ← ⟨LOAD src, q ; q⟩` where `q` is the program encoded in `src`.
    Diag {
        dst: Reg,
        src: Reg,
    },
    Halt,
    /// Jumps to itself forever.
    Loop,
}

impl Instr {
    pub fn registers(&self) -> Vec<Reg> {
        match self {
            Instr::Load { dst, .. } => vec![*dst],
            Instr::Copy { dst, src } | Instr::Diag { dst, src } => vec![*dst, *src],
            Instr::Inc(r) | Instr::Dec(r) | Instr::EmitReg(r) | Instr::SelfRef(r) => vec![*r],
            Instr::Jz { reg, .. } => vec![*reg],
            Instr::Exec {
                halted,
                output,
                program,
                input,
                budget,
            } => vec![*halted, *output, *program, *input, *budget],
            Instr::Jmp { .. } | Instr::Emit(_) | Instr::Halt | Instr::Loop => vec![],
        }
    }

    fn target_mut(&mut self) -> Option<&mut u32> {
        match self {
            Instr::Jz { target, .. } | Instr::Jmp { target } => Some(target),
            _ => None,
        }
    }

    fn target(&self) -> Option<u32> {
        match self {
            Instr::Jz { target, .. } | Instr::Jmp { target } => Some(*target),
            _ => None,
        }
    }

    fn falls_through(&self) -> bool {
        !matches!(self, Instr::Jmp { .. } | Instr::Halt | Instr::Loop)
    }
}

/// A loaded guest program.
///
/// Invariants: non-empty, every register index is below [`REGISTERS`],
/// every jump target is in range, and no instruction falls through past the
/// end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuestProgram {
    instrs: Vec<Instr>,
}

impl GuestProgram {
    pub fn new(instrs: Vec<Instr>) -> Result<Self, GuestError> {
        if instrs.is_empty() {
            return Err(GuestError::Invalid("empty program".into()));
        }
        let len = instrs.len();
        if len > u32::MAX as usize {
            return Err(GuestError::Invalid("program too long".into()));
        }
        for (pc, i) in instrs.iter().enumerate() {
            if let Some(r) = i.registers().into_iter().find(|r| r.0 as usize >= REGISTERS) {
                return Err(GuestError::Invalid(format!("{pc}: register {r} out of range")));
            }
            if let Some(t) = i.target() {
                if t as usize >= len {
                    return Err(GuestError::Invalid(format!("{pc}: jump target {t} out of range")));
                }
            }
        }
        if instrs[len - 1].falls_through() {
            return Err(GuestError::Invalid(
                "last instruction falls through past the end".into(),
            ));
        }
        Ok(GuestProgram { instrs })
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// True when the program contains no `SELF` placeholder.
    pub fn is_closed(&self) -> bool {
        !self.instrs.iter().any(|i| matches!(i, Instr::SelfRef(_)))
    }

    /// `[LOAD reg, value] ++ self`, with jump targets shifted by one.
    pub fn prepend_load(&self, reg: Reg, value: Value) -> Result<GuestProgram, GuestError> {
        let mut instrs = Vec::with_capacity(self.instrs.len() + 1);
        instrs.push(Instr::Load { dst: reg, value });
        for i in &self.instrs {
            let mut i = i.clone();
            if let Some(t) = i.target_mut() {
                *t = t
                    .checked_add(1)
                    .ok_or_else(|| GuestError::Invalid("program too long".into()))?;
            }
            instrs.push(i);
        }
        GuestProgram::new(instrs)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.u32(self.instrs.len() as u32);
        for i in &self.instrs {
            match i {
                Instr::Load { dst, value } => {
                    w.u8(0x01);
                    w.u8(dst.0);
                    match value {
                        Value::Num(n) => {
                            w.u8(0);
                            w.u64(*n);
                        }
                        Value::Bytes(b) => {
                            w.u8(1);
                            w.u32(u32::try_from(b.len()).expect("literal larger than 4 GiB"));
                            w.bytes(b);
                        }
                    }
                }
                Instr::Copy { dst, src } => {
                    w.u8(0x02);
                    w.u8(dst.0);
                    w.u8(src.0);
                }
                Instr::Inc(r) => {
                    w.u8(0x03);
                    w.u8(r.0);
                }
                Instr::Dec(r) => {
                    w.u8(0x04);
                    w.u8(r.0);
                }
                Instr::Jz { reg, target } => {
                    w.u8(0x05);
                    w.u8(reg.0);
                    w.u32(*target);
                }
                Instr::Jmp { target } => {
                    w.u8(0x06);
                    w.u32(*target);
                }
                Instr::Exec {
                    halted,
                    output,
                    program,
                    input,
                    budget,
                } => {
                    w.u8(0x07);
                    for r in [halted, output, program, input, budget] {
                        w.u8(r.0);
                    }
                }
                Instr::Emit(v) => {
                    w.u8(0x08);
                    w.u8(v.to_byte());
                }
                Instr::EmitReg(r) => {
                    w.u8(0x09);
                    w.u8(r.0);
                }
                Instr::SelfRef(r) => {
                    w.u8(0x0A);
                    w.u8(r.0);
                }
                Instr::Diag { dst, src } => {
                    w.u8(0x0B);
                    w.u8(dst.0);
                    w.u8(src.0);
                }
                Instr::Halt => w.u8(0x0C),
                Instr::Loop => w.u8(0x0D),
            }
        }
        w.frame(MAGIC, VERSION)
    }

    pub fn decode(bytes: &[u8]) -> Result<GuestProgram, GuestError> {
        let mut r = Reader::open(bytes, MAGIC, VERSION)?;
        let count = r.u32()?;
        let mut instrs = Vec::new();
        for _ in 0..count {
            let at = r.offset();
            let reg = |r: &mut Reader| -> Result<Reg, WireError> { Ok(Reg(r.u8()?)) };
            let i = match r.u8()? {
                0x01 => {
                    let dst = reg(&mut r)?;
                    let value = match r.u8()? {
                        0 => Value::Num(r.u64()?),
                        1 => {
                            let n = r.u32()? as usize;
                            Value::bytes(r.take(n)?)
                        }
                        t => return Err(r.error_at(r.offset() - 1, format!("bad literal tag {t}")).into()),
                    };
                    Instr::Load { dst, value }
                }
                0x02 => Instr::Copy {
                    dst: reg(&mut r)?,
                    src: reg(&mut r)?,
                },
                0x03 => Instr::Inc(reg(&mut r)?),
                0x04 => Instr::Dec(reg(&mut r)?),
                0x05 => Instr::Jz {
                    reg: reg(&mut r)?,
                    target: r.u32()?,
                },
                0x06 => Instr::Jmp { target: r.u32()? },
                0x07 => Instr::Exec {
                    halted: reg(&mut r)?,
                    output: reg(&mut r)?,
                    program: reg(&mut r)?,
                    input: reg(&mut r)?,
                    budget: reg(&mut r)?,
                },
                0x08 => {
                    let b = r.u8()?;
                    Instr::Emit(
                        GuestVerdict::from_byte(b)
                            .ok_or_else(|| r.error_at(r.offset() - 1, format!("bad verdict byte {b}")))?,
                    )
                }
                0x09 => Instr::EmitReg(reg(&mut r)?),
                0x0A => Instr::SelfRef(reg(&mut r)?),
                0x0B => Instr::Diag {
                    dst: reg(&mut r)?,
                    src: reg(&mut r)?,
                },
                0x0C => Instr::Halt,
                0x0D => Instr::Loop,
                op => return Err(r.error_at(at, format!("unknown opcode {op:#04x}")).into()),
            };
            instrs.push(i);
        }
        r.finish()?;
        GuestProgram::new(instrs)
    }

    /// Parse guest assembly: one instruction per line, `name:` labels,
    /// `#` comments, operands separated by commas or whitespace. Jump targets
    /// are labels or instruction indices; `LOAD` literals are decimal
    /// numbers or `0x`-prefixed hex byte strings.
    pub fn parse(text: &str) -> Result<GuestProgram, GuestError> {
        let mut labels: BTreeMap<String, u32> = BTreeMap::new();
        let mut lines: Vec<(usize, Vec<String>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let mut line = raw.split('#').next().unwrap_or("").trim();
            while let Some((label, rest)) = line.split_once(':') {
                let label = label.trim();
                if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(GuestError::Asm {
                        line: line_no,
                        message: format!("bad label `{label}`"),
                    });
                }
                if labels.insert(label.to_owned(), lines.len() as u32).is_some() {
                    return Err(GuestError::Asm {
                        line: line_no,
                        message: format!("duplicate label `{label}`"),
                    });
                }
                line = rest.trim();
            }
            if line.is_empty() {
                continue;
            }
            let toks = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            lines.push((line_no, toks));
        }

        let mut instrs = Vec::with_capacity(lines.len());
        for (line_no, toks) in &lines {
            let err = |message: String| GuestError::Asm {
                line: *line_no,
                message,
            };
            let reg = |t: &str| -> Result<Reg, GuestError> {
                t.strip_prefix(['r', 'R'])
                    .and_then(|n| n.parse::<u8>().ok())
                    .map(Reg)
                    .ok_or_else(|| err(format!("expected register, got `{t}`")))
            };
            let target = |t: &str| -> Result<u32, GuestError> {
                if let Ok(n) = t.parse::<u32>() {
                    return Ok(n);
                }
                labels
                    .get(t)
                    .copied()
                    .ok_or_else(|| err(format!("unknown label `{t}`")))
            };
            let op = toks[0].to_ascii_uppercase();
            let args: Vec<&str> = toks[1..].iter().map(String::as_str).collect();
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{op} takes {n} operand(s), got {}", args.len())))
                }
            };
            let i = match op.as_str() {
                "LOAD" => {
                    arity(2)?;
                    Instr::Load {
                        dst: reg(args[0])?,
                        value: parse_literal(args[1]).ok_or_else(|| err(format!("bad literal `{}`", args[1])))?,
                    }
                }
                "COPY" => {
                    arity(2)?;
                    Instr::Copy {
                        dst: reg(args[0])?,
                        src: reg(args[1])?,
                    }
                }
                "INC" => {
                    arity(1)?;
                    Instr::Inc(reg(args[0])?)
                }
                "DEC" => {
                    arity(1)?;
                    Instr::Dec(reg(args[0])?)
                }
                "JZ" => {
                    arity(2)?;
                    Instr::Jz {
                        reg: reg(args[0])?,
                        target: target(args[1])?,
                    }
                }
                "JMP" => {
                    arity(1)?;
                    Instr::Jmp {
                        target: target(args[0])?,
                    }
                }
                "EXEC" => {
                    arity(5)?;
                    Instr::Exec {
                        halted: reg(args[0])?,
                        output: reg(args[1])?,
                        program: reg(args[2])?,
                        input: reg(args[3])?,
                        budget: reg(args[4])?,
                    }
                }
                "EMIT" => {
                    arity(1)?;
                    match args[0].to_ascii_uppercase().as_str() {
                        "HALTS" => Instr::Emit(GuestVerdict::Halts),
                        "DOES_NOT_HALT" => Instr::Emit(GuestVerdict::DoesNotHalt),
                        _ => Instr::EmitReg(reg(args[0])?),
                    }
                }
                "SELF" => {
                    arity(1)?;
                    Instr::SelfRef(reg(args[0])?)
                }
                "DIAG" => {
                    arity(2)?;
                    Instr::Diag {
                        dst: reg(args[0])?,
                        src: reg(args[1])?,
                    }
                }
                "HALT" => {
                    arity(0)?;
                    Instr::Halt
                }
                "LOOP" => {
                    arity(0)?;
                    Instr::Loop
                }
                other => return Err(err(format!("unknown instruction `{other}`"))),
            };
            instrs.push(i);
        }
        GuestProgram::new(instrs)
    }

    /// Assembly text with numeric jump targets; parses back to `self`.
    pub fn to_asm(&self) -> String {
        let mut s = String::new();
        for (pc, i) in self.instrs.iter().enumerate() {
            s += &format!("{:>4}: ", format!("L{pc}"));
            s += &match i {
                Instr::Load { dst, value } => format!("LOAD {dst}, {value}"),
                Instr::Copy { dst, src } => format!("COPY {dst}, {src}"),
                Instr::Inc(r) => format!("INC {r}"),
                Instr::Dec(r) => format!("DEC {r}"),
                Instr::Jz { reg, target } => format!("JZ {reg}, {target}"),
                Instr::Jmp { target } => format!("JMP {target}"),
                Instr::Exec {
                    halted,
                    output,
                    program,
                    input,
                    budget,
                } => format!("EXEC {halted}, {output}, {program}, {input}, {budget}"),
                Instr::Emit(v) => format!("EMIT {v}"),
                Instr::EmitReg(r) => format!("EMIT {r}"),
                Instr::SelfRef(r) => format!("SELF {r}"),
                Instr::Diag { dst, src } => format!("DIAG {dst}, {src}"),
                Instr::Halt => "HALT".into(),
                Instr::Loop => "LOOP".into(),
            };
            s.push('\n');
        }
        s
    }
}

fn parse_literal(t: &str) -> Option<Value> {
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        if hex.len() % 2 != 0 {
            return None;
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        return Some(Value::bytes(bytes));
    }
    t.parse::<u64>().ok().map(Value::Num)
}

impl From<WireError> for GuestError {
    fn from(e: WireError) -> Self {
        GuestError::Malformed {
            offset: e.offset,
            message: e.message,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asm_labels_and_literals() {
        let p =
            GuestProgram::parse("start: LOAD r1, 0x0aff\n LOAD r2, 7 # seven\n JZ r2, end\n JMP start\nend: HALT\n")
                .unwrap();
        assert_eq!(
            p.instrs(),
            &[
                Instr::Load {
                    dst: Reg(1),
                    value: Value::bytes(vec![0x0a, 0xff])
                },
                Instr::Load {
                    dst: Reg(2),
                    value: Value::Num(7)
                },
                Instr::Jz { reg: Reg(2), target: 4 },
                Instr::Jmp { target: 0 },
                Instr::Halt,
            ]
        );
    }

    #[test]
    fn asm_round_trip() {
        let text = "SELF r1\nLOAD r2, 0x\nEXEC r4, r5, r2, r1, r3\nJZ r5, 6\nEMIT HALTS\nEMIT r0\nDIAG r0, r15\nLOOP\n";
        let p = GuestProgram::parse(text).unwrap();
        assert_eq!(GuestProgram::parse(&p.to_asm()).unwrap(), p);
        assert!(!p.is_closed());
    }

    #[test]
    fn loader_rejects_bad_programs() {
        assert!(GuestProgram::parse("").is_err());
        assert!(GuestProgram::parse("JMP 3\nHALT").is_err());
        assert!(GuestProgram::parse("INC r16\nHALT").is_err());
        assert!(GuestProgram::parse("INC r1").is_err());
        assert!(matches!(
            GuestProgram::parse("HALT\nFROB r1\n"),
            Err(GuestError::Asm { line: 2, .. })
        ));
        assert!(matches!(
            GuestProgram::parse("JZ r1, nowhere\nHALT"),
            Err(GuestError::Asm { line: 1, .. })
        ));
    }

    #[test]
    fn encoding_round_trip_and_truncation() {
        let p = GuestProgram::parse(
            "LOAD r1, 0x0102\nLOAD r3, 99\nEXEC r4, r5, r1, r0, r3\nEMIT DOES_NOT_HALT\nSELF r2\nDIAG r2, r1\nJZ r4, 0\nLOOP\n",
        )
        .unwrap();
        let bytes = p.encode();
        assert_eq!(&bytes[..5], b"SLGP\x01");
        assert_eq!(GuestProgram::decode(&bytes).unwrap(), p);
        for cut in 0..bytes.len() {
            assert!(matches!(
                GuestProgram::decode(&bytes[..cut]),
                Err(GuestError::Malformed { .. })
            ));
        }
    }

    #[test]
    fn loop_encoding_is_bit_exact() {
        let p = GuestProgram::new(vec![Instr::Loop]).unwrap();
        assert_eq!(p.encode(), b"SLGP\x01\x05\x00\x00\x00\x01\x00\x00\x00\x0d");
    }

    #[test]
    fn prepend_shifts_targets() {
        let p = GuestProgram::parse("a: JZ r0, a\nJMP a\n").unwrap();
        let q = p.prepend_load(Reg(3), Value::Num(1)).unwrap();
        assert_eq!(q.instrs()[1], Instr::Jz { reg: Reg(0), target: 1 });
        assert_eq!(q.instrs()[2], Instr::Jmp { target: 1 });
    }

    #[test]
    fn verdict_wire_byte() {
        assert_eq!(GuestVerdict::Halts.to_byte(), 1);
        assert_eq!(GuestVerdict::DoesNotHalt.to_byte(), 0);
        assert_eq!(GuestVerdict::from_byte(2), None);
        for v in [GuestVerdict::Halts, GuestVerdict::DoesNotHalt] {
            assert_eq!(GuestVerdict::from_value(&v.to_value()), Some(v));
        }
    }
}
