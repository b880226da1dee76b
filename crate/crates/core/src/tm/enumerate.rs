//! Exhaustive enumeration of small machines.
//!
//! For `n` working states and `s` symbols the machine has states
//! `q0 … q(n-1)` plus one appended halt state `qh`, and symbols `_` (blank),
//! `1`, `2`, …. Each of the `n·s` keys independently picks a next state
//! (`n + 1` choices, the halt state included), a written symbol (`s`) and a
//! move (`L`, `R`, `S`), so there are `((n + 1)·s·3)^(n·s)` machines. Machine
//! `i` is the mixed-radix reading of `i` with the first key most significant.

use std::collections::{BTreeMap, BTreeSet};

use super::{Action, MachineSpec, Move, State, Symbol, TmError};

/// Enumeration guard. The default refuses anything above 3 states or 2
/// symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_states: usize,
    pub max_symbols: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_states: 3,
            max_symbols: 2,
        }
    }
}

impl EnumerationLimits {
    pub fn unlimited() -> Self {
        EnumerationLimits {
            max_states: usize::MAX,
            max_symbols: usize::MAX,
        }
    }
}

fn choices_per_key(n_states: usize, n_symbols: usize) -> u128 {
    (n_states as u128 + 1) * n_symbols as u128 * 3
}

/// Number of machines; `None` on `u128` overflow.
pub fn machine_count(n_states: usize, n_symbols: usize) -> Option<u128> {
    if n_states == 0 || n_symbols == 0 {
        return Some(0);
    }
    let keys = u32::try_from(n_states.checked_mul(n_symbols)?).ok()?;
    choices_per_key(n_states, n_symbols).checked_pow(keys)
}

pub fn enumerate_machines(
    n_states: usize,
    n_symbols: usize,
    limits: EnumerationLimits,
) -> Result<MachineEnumerator, TmError> {
    if n_states > limits.max_states || n_symbols > limits.max_symbols {
        return Err(TmError::EnumerationGuard {
            states: n_states,
            symbols: n_symbols,
        });
    }
    if n_states >= u16::MAX as usize || n_symbols > u16::MAX as usize {
        return Err(TmError::Invalid("enumeration size out of range".into()));
    }
    let total =
        machine_count(n_states, n_symbols).ok_or_else(|| TmError::Invalid("enumeration size overflows".into()))?;
    Ok(MachineEnumerator {
        n_states,
        n_symbols,
        next: 0,
        total,
    })
}

/// The `index`-th machine of the `(n_states, n_symbols)` enumeration.
pub fn machine_at(n_states: usize, n_symbols: usize, index: u128) -> Option<MachineSpec> {
    let total = machine_count(n_states, n_symbols)?;
    if index >= total {
        return None;
    }
    let radix = choices_per_key(n_states, n_symbols);
    let keys = n_states * n_symbols;
    let mut digits = vec![0u128; keys];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % radix;
        rest /= radix;
    }
    let per_target = n_symbols as u128 * 3;
    let mut transitions = BTreeMap::new();
    for (key, &digit) in digits.iter().enumerate() {
        let next = (digit / per_target) as u16;
        let write = ((digit / 3) % n_symbols as u128) as u16;
        let movement = Move::ALL[(digit % 3) as usize];
        transitions.insert(
            (State((key / n_symbols) as u16), Symbol((key % n_symbols) as u16)),
            Action {
                next: State(next),
                write: Symbol(write),
                movement,
            },
        );
    }
    let mut states: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    states.push("qh".into());
    let alphabet = (0..n_symbols)
        .map(|i| if i == 0 { "_".to_string() } else { i.to_string() })
        .collect();
    let halt = BTreeSet::from([State(n_states as u16)]);
    Some(
        MachineSpec::new(states, alphabet, Symbol(0), State(0), halt, transitions)
            .expect("enumerated machines are total and deterministic"),
    )
}

/// Deterministic stream over every machine of one size.
#[derive(Debug, Clone)]
pub struct MachineEnumerator {
    n_states: usize,
    n_symbols: usize,
    next: u128,
    total: u128,
}

impl MachineEnumerator {
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl Iterator for MachineEnumerator {
    type Item = MachineSpec;

    fn next(&mut self) -> Option<MachineSpec> {
        if self.next >= self.total {
            return None;
        }
        let m = machine_at(self.n_states, self.n_symbols, self.next);
        self.next += 1;
        m
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (usize::try_from(left).unwrap_or(usize::MAX), usize::try_from(left).ok())
    }
}
