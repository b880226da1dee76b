//! Single-tape deterministic Turing machines on a bi-infinite tape.

mod encoding;
mod enumerate;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::machine::{Machine, Step, StepOutcome};

pub use encoding::{Encoding, MAGIC as ENCODING_MAGIC, VERSION as ENCODING_VERSION};
pub use enumerate::{enumerate_machines, machine_at, machine_count, EnumerationLimits, MachineEnumerator};
pub use parse::parse_machine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Right, Move::Stay];

    fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
            Move::Stay => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub next: State,
    pub write: Symbol,
    pub movement: Move,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown {kind} `{name}`")]
    Unknown {
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("line {line}: second transition for ({state}, {symbol})")]
    Nondeterministic { line: usize, state: String, symbol: String },
    #[error("no transition for non-halting ({state}, {symbol})")]
    MissingTransition { state: String, symbol: String },
    #[error("halt state {state} has an outgoing transition")]
    HaltStateTransition { state: String },
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("malformed encoding at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("symbol index {0} is not in the tape alphabet")]
    BadInputSymbol(u16),
    #[error("configuration does not belong to this machine: {0}")]
    BadConfiguration(String),
    #[error("head position overflow")]
    HeadOverflow,
    #[error("enumeration of {states} states x {symbols} symbols exceeds the guard; pass an explicit override")]
    EnumerationGuard { states: usize, symbols: usize },
}

/// A validated machine description.
///
/// Invariants: transitions are deterministic, defined for every
/// (non-halting state, symbol) pair, and absent for halting states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    states: Vec<String>,
    alphabet: Vec<String>,
    blank: Symbol,
    start: State,
    halt: BTreeSet<State>,
    // Dense `state * |alphabet| + symbol` table.
    table: Vec<Option<Action>>,
}

impl MachineSpec {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        blank: Symbol,
        start: State,
        halt: BTreeSet<State>,
        transitions: BTreeMap<(State, Symbol), Action>,
    ) -> Result<Self, TmError> {
        let invalid = |m: String| Err(TmError::Invalid(m));
        if states.is_empty() {
            return invalid("no states".into());
        }
        if alphabet.is_empty() {
            return invalid("empty tape alphabet".into());
        }
        if states.len() > u16::MAX as usize || alphabet.len() > u16::MAX as usize {
            return invalid("too many states or symbols".into());
        }
        if has_duplicates(&states) {
            return invalid("duplicate state name".into());
        }
        if has_duplicates(&alphabet) {
            return invalid("duplicate symbol name".into());
        }
        let n_states = states.len();
        let n_symbols = alphabet.len();
        if blank.0 as usize >= n_symbols {
            return invalid("blank symbol out of range".into());
        }
        if start.0 as usize >= n_states {
            return invalid("start state out of range".into());
        }
        if let Some(h) = halt.iter().find(|h| h.0 as usize >= n_states) {
            return invalid(format!("halt state index {} out of range", h.0));
        }
        let mut table = vec![None; n_states * n_symbols];
        for (&(state, read), &action) in &transitions {
            if state.0 as usize >= n_states
                || read.0 as usize >= n_symbols
                || action.next.0 as usize >= n_states
                || action.write.0 as usize >= n_symbols
            {
                return invalid("transition references an index out of range".into());
            }
            if halt.contains(&state) {
                return Err(TmError::HaltStateTransition {
                    state: states[state.0 as usize].clone(),
                });
            }
            table[state.0 as usize * n_symbols + read.0 as usize] = Some(action);
        }
        for q in 0..n_states {
            if halt.contains(&State(q as u16)) {
                continue;
            }
            for s in 0..n_symbols {
                if table[q * n_symbols + s].is_none() {
                    return Err(TmError::MissingTransition {
                        state: states[q].clone(),
                        symbol: alphabet[s].clone(),
                    });
                }
            }
        }
        Ok(MachineSpec {
            states,
            alphabet,
            blank,
            start,
            halt,
            table,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn start(&self) -> State {
        self.start
    }

    pub fn halt_states(&self) -> &BTreeSet<State> {
        &self.halt
    }

    pub fn is_halt(&self, q: State) -> bool {
        self.halt.contains(&q)
    }

    pub fn state_name(&self, q: State) -> &str {
        &self.states[q.0 as usize]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.alphabet[s.0 as usize]
    }

    pub fn action(&self, q: State, s: Symbol) -> Option<Action> {
        self.table
            .get(q.0 as usize * self.alphabet.len() + s.0 as usize)
            .copied()
            .flatten()
    }

    /// Transitions in `(state, symbol)` order.
    pub fn transitions(&self) -> impl Iterator<Item = ((State, Symbol), Action)> + '_ {
        let n = self.alphabet.len();
        self.table
            .iter()
            .enumerate()
            .filter_map(move |(i, a)| a.map(|a| ((State((i / n) as u16), Symbol((i % n) as u16)), a)))
    }

    /// Same machine with states renamed `q0, q1, …` and symbols `s0, s1, …`.
    pub fn canonical(&self) -> MachineSpec {
        MachineSpec {
            states: (0..self.states.len()).map(|i| format!("q{i}")).collect(),
            alphabet: (0..self.alphabet.len()).map(|i| format!("s{i}")).collect(),
            ..self.clone()
        }
    }

    /// The machine's own encoding written onto the tape, most significant
    /// bit first: a 1 bit becomes the lowest-indexed non-blank symbol and a
    /// 0 bit becomes blank. Machines over a blank-only alphabet get an empty
    /// tape.
    pub fn self_input(&self) -> Vec<Symbol> {
        let Some(mark) = (0..self.alphabet.len() as u16).map(Symbol).find(|&s| s != self.blank) else {
            return Vec::new();
        };
        let bytes = Encoding::encode(self);
        let mut out = Vec::with_capacity(bytes.as_bytes().len() * 8);
        for b in bytes.as_bytes() {
            for i in (0..8).rev() {
                out.push(if b >> i & 1 == 1 { mark } else { self.blank });
            }
        }
        out
    }

    /// Render in the line-based description format accepted by
    /// [`parse_machine`].
    pub fn to_text(&self) -> String {
        let halt: Vec<&str> = self.halt.iter().map(|&q| self.state_name(q)).collect();
        let mut s = format!(
            "states: {}\nalphabet: {}\nblank: {}\nstart: {}\nhalt: {}\n",
            self.states.join(" "),
            self.alphabet.join(" "),
            self.symbol_name(self.blank),
            self.state_name(self.start),
            halt.join(" "),
        );
        for ((q, r), a) in self.transitions() {
            s += &format!(
                "{} {} -> {} {} {}\n",
                self.state_name(q),
                self.symbol_name(r),
                self.state_name(a.next),
                self.symbol_name(a.write),
                a.movement.letter()
            );
        }
        s
    }
}

fn has_duplicates(names: &[String]) -> bool {
    let set: BTreeSet<&String> = names.iter().collect();
    set.len() != names.len()
}

/// One machine snapshot.
///
/// The tape never stores blanks, so structural equality is configuration
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub tape: BTreeMap<i64, Symbol>,
    pub head: i64,
    pub state: State,
    pub step: Step,
}

impl Configuration {
    /// Deterministic textual snapshot, used to compare runs.
    pub fn snapshot(&self, spec: &MachineSpec) -> String {
        let cells: Vec<String> = self
            .tape
            .iter()
            .map(|(i, s)| format!("{i}:{}", spec.symbol_name(*s)))
            .collect();
        format!(
            "t={} q={} head={} tape=[{}]",
            self.step,
            spec.state_name(self.state),
            self.head,
            cells.join(",")
        )
    }
}

impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl MachineSpec {
    fn validate_config(&self, c: &Configuration) -> Result<(), TmError> {
        if c.state.0 as usize >= self.states.len() {
            return Err(TmError::BadConfiguration("state out of range".into()));
        }
        for s in c.tape.values() {
            if s.0 as usize >= self.alphabet.len() {
                return Err(TmError::BadConfiguration("tape symbol out of range".into()));
            }
            if *s == self.blank {
                return Err(TmError::BadConfiguration("explicit blank on tape".into()));
            }
        }
        Ok(())
    }
}

impl Machine for MachineSpec {
    type Input = [Symbol];
    type Config = Configuration;
    type Error = TmError;

    fn initial(&self, input: &[Symbol]) -> Result<Configuration, TmError> {
        let mut tape = BTreeMap::new();
        for (i, &s) in input.iter().enumerate() {
            if s.0 as usize >= self.alphabet.len() {
                return Err(TmError::BadInputSymbol(s.0));
            }
            if s != self.blank {
                tape.insert(i as i64, s);
            }
        }
        Ok(Configuration {
            tape,
            head: 0,
            state: self.start,
            step: 0,
        })
    }

    fn step(&self, config: &Configuration) -> Result<StepOutcome<Configuration>, TmError> {
        self.validate_config(config)?;
        if self.is_halt(config.state) {
            return Ok(StepOutcome::Halted);
        }
        let mut next = config.clone();
        self.apply(&mut next)?;
        Ok(StepOutcome::Running(next))
    }

    fn step_index(&self, config: &Configuration) -> Step {
        config.step
    }

    fn is_halting(&self, config: &Configuration) -> Result<bool, TmError> {
        self.validate_config(config)?;
        Ok(self.is_halt(config.state))
    }

    fn advance(&self, config: &mut Configuration) -> Result<bool, TmError> {
        if config.state.0 as usize >= self.states.len() {
            return Err(TmError::BadConfiguration("state out of range".into()));
        }
        if self.is_halt(config.state) {
            return Ok(false);
        }
        self.apply(config)?;
        Ok(true)
    }
}

impl MachineSpec {
    fn apply(&self, c: &mut Configuration) -> Result<(), TmError> {
        let read = c.tape.get(&c.head).copied().unwrap_or(self.blank);
        let a = self
            .action(c.state, read)
            .ok_or_else(|| TmError::BadConfiguration("no transition".into()))?;
        if a.write == self.blank {
            c.tape.remove(&c.head);
        } else {
            c.tape.insert(c.head, a.write);
        }
        c.head = c.head.checked_add(a.movement.delta()).ok_or(TmError::HeadOverflow)?;
        c.state = a.next;
        c.step = c.step.checked_add(1).expect("step index overflow");
        Ok(())
    }
}
