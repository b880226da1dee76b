//! A machine of either kind together with the input it runs on.

use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::guest::{GuestError, GuestMachine, GuestProgram, Value};
use crate::machine::{run_bounded, CostLedger, RunVerdict, Step};
use crate::obs::PartialObservation;
use crate::operator::{make_p_omega, semidecide_halts, HaltProbe, Omega, OperatorError, SemiDecision};
use crate::tm::{parse_machine, Encoding, MachineSpec, Symbol, TmError};

#[derive(Debug, thiserror::Error)]
pub enum SubjectError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: unknown machine file type (expected .tm or .gasm)")]
    UnknownKind { path: String },
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Guest(#[from] GuestError),
    #[error("bad input spec {spec:?}: {message}")]
    Input { spec: String, message: String },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone)]
pub enum Subject {
    Tm { spec: MachineSpec, input: Vec<Symbol> },
    Guest { machine: GuestMachine, input: Value },
}

/// One row of an overhead sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OverheadRow {
    pub bound: Step,
    pub verdict: RunVerdict,
    pub ledger: CostLedger,
}

impl Subject {
    /// Load a `.tm` or `.gasm` file with the default input (`self`).
    pub fn load(path: &Path) -> Result<Subject, SubjectError> {
        let text = std::fs::read_to_string(path).map_err(|e| SubjectError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("tm") => Ok(Subject::tm(parse_machine(&text)?)),
            Some("gasm") => Ok(Subject::guest(GuestProgram::parse(&text)?)?),
            _ => Err(SubjectError::UnknownKind {
                path: path.display().to_string(),
            }),
        }
    }

    /// A Turing machine on its own encoding.
    pub fn tm(spec: MachineSpec) -> Subject {
        let input = spec.self_input();
        Subject::Tm { spec, input }
    }

    /// A guest program on its own encoding.
    pub fn guest(program: GuestProgram) -> Result<Subject, SubjectError> {
        let input = Value::bytes(program.encode());
        Ok(Subject::Guest {
            machine: GuestMachine::new(program)?,
            input,
        })
    }

    /// Replace the input.
    ///
    /// Both kinds: `self` (own encoding) and `empty`. Turing machines also
    /// take `tape:a,b,…` (symbol names). Guest programs also take `num:N`
    /// and `hex:…`; `empty` is the number 0 for them.
    pub fn with_input(self, spec: &str) -> Result<Subject, SubjectError> {
        let bad = |message: &str| SubjectError::Input {
            spec: spec.to_string(),
            message: message.to_string(),
        };
        match self {
            Subject::Tm { spec: m, .. } => {
                let input = match spec {
                    "self" => m.self_input(),
                    "empty" => Vec::new(),
                    _ => {
                        let list = spec
                            .strip_prefix("tape:")
                            .ok_or_else(|| bad("expected self, empty or tape:…"))?;
                        list.split(',')
                            .filter(|s| !s.is_empty())
                            .map(|name| {
                                m.alphabet()
                                    .iter()
                                    .position(|a| a == name.trim())
                                    .map(|i| Symbol(i as u16))
                                    .ok_or_else(|| bad(&format!("unknown symbol {name:?}")))
                            })
                            .collect::<Result<_, _>>()?
                    }
                };
                Ok(Subject::Tm { spec: m, input })
            }
            Subject::Guest { machine, .. } => {
                let input = match spec {
                    "self" => Value::bytes(machine.program().encode()),
                    "empty" => Value::Num(0),
                    _ => {
                        if let Some(n) = spec.strip_prefix("num:") {
                            Value::Num(n.parse().map_err(|_| bad("num:N needs a non-negative integer"))?)
                        } else if let Some(h) = spec.strip_prefix("hex:") {
                            Value::bytes(parse_hex(h).ok_or_else(|| bad("hex:… needs an even count of hex digits"))?)
                        } else {
                            return Err(bad("expected self, empty, num:N or hex:…"));
                        }
                    }
                };
                Ok(Subject::Guest { machine, input })
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Subject::Tm { .. } => "tm",
            Subject::Guest { .. } => "guest",
        }
    }

    /// Canonical encoding bytes of the machine.
    pub fn encoding(&self) -> Vec<u8> {
        match self {
            Subject::Tm { spec, .. } => Encoding::encode(spec).into_bytes(),
            Subject::Guest { machine, .. } => machine.program().encode(),
        }
    }

    /// Lowercase hex SHA-256 of [`Subject::encoding`].
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.encoding()))
    }

    pub fn input_text(&self) -> String {
        match self {
            Subject::Tm { spec, input } => {
                let names: Vec<&str> = input.iter().map(|s| spec.symbol_name(*s)).collect();
                format!("tape:{}", names.join(","))
            }
            Subject::Guest { input, .. } => input.to_string(),
        }
    }

    pub fn run_bounded(&self, bound: Step) -> Result<(RunVerdict, CostLedger), SubjectError> {
        Ok(match self {
            Subject::Tm { spec, input } => run_bounded(spec, input.as_slice(), bound)?,
            Subject::Guest { machine, input } => run_bounded(machine, input, bound)?,
        })
    }

    pub fn probe(&self, horizon: Step) -> Result<HaltProbe, SubjectError> {
        Ok(match self {
            Subject::Tm { spec, input } => HaltProbe::simulate(spec, input.as_slice(), horizon)?,
            Subject::Guest { machine, input } => HaltProbe::simulate(machine, input, horizon)?,
        })
    }

    pub fn p_omega(&self, fuel: Step) -> Result<Omega, SubjectError> {
        Ok(match self {
            Subject::Tm { spec, input } => make_p_omega(spec, input.as_slice(), fuel)?,
            Subject::Guest { machine, input } => make_p_omega(machine, input, fuel)?,
        })
    }

    pub fn semidecide(&self, schedule: &[Step]) -> Result<SemiDecision, SubjectError> {
        Ok(match self {
            Subject::Tm { spec, input } => semidecide_halts(spec, input.as_slice(), schedule)?,
            Subject::Guest { machine, input } => semidecide_halts(machine, input, schedule)?,
        })
    }

    /// `run_bounded` for every bound in `bounds`.
    pub fn overhead(&self, bounds: impl IntoIterator<Item = Step>) -> Result<Vec<OverheadRow>, SubjectError> {
        bounds
            .into_iter()
            .map(|bound| {
                let (verdict, ledger) = self.run_bounded(bound)?;
                Ok(OverheadRow { bound, verdict, ledger })
            })
            .collect()
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind(), &self.digest()[..12])
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_hex(s: &str) -> Option<Vec<u8>> {
    let s = s.strip_prefix("0x").unwrap_or(s);
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
        .collect()
}

/// Exact halting limit of a subject, if reached within `fuel`.
pub fn limit_of(subject: &Subject, fuel: Step) -> Result<Option<PartialObservation>, SubjectError> {
    Ok(match subject.p_omega(fuel)? {
        Omega::Limit(p) => Some(p),
        Omega::StillRunning(_) => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn input_specs() {
        let s = Subject::tm(fixtures::m_eraser()).with_input("tape:1,1,1").unwrap();
        assert_eq!(s.input_text(), "tape:1,1,1");
        assert_eq!(s.run_bounded(100).unwrap().0, RunVerdict::HaltsAt(4));
        assert!(Subject::tm(fixtures::m_eraser()).with_input("tape:7").is_err());
        assert!(Subject::tm(fixtures::m_eraser()).with_input("num:3").is_err());
        let g = Subject::guest(fixtures::g_countdown()).unwrap();
        assert!(g.clone().with_input("num:4").is_ok());
        assert_eq!(g.clone().with_input("hex:0aff").unwrap().input_text(), "0x0aff");
        assert!(g.with_input("hex:abc").is_err());
    }

    #[test]
    fn digest_is_stable_and_distinguishes() {
        let a = Subject::tm(fixtures::m_halt2());
        assert_eq!(a.digest(), Subject::tm(fixtures::m_halt2()).digest());
        assert_ne!(a.digest(), Subject::tm(fixtures::m_loop()).digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn overhead_rows() {
        let rows = Subject::tm(fixtures::m_halt2()).overhead(0..=4).unwrap();
        let totals: Vec<u64> = rows.iter().map(|r| r.ledger.total()).collect();
        assert_eq!(totals, vec![1, 2, 3, 3, 3]);
        assert!(Subject::tm(fixtures::m_halt2()).overhead(0..0).unwrap().is_empty());
    }
}
