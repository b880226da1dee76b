//! Canonical binary encoding `⟨M⟩` of a machine.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SLTM"
//! 4       1     version (1)
//! 5       4     body length in bytes, u32 LE
//! 9       ..    body:
//!               u16 state count, u16 symbol count, u16 blank, u16 start,
//!               u16 halt count, then that many u16 halt states (ascending),
//!               u32 transition count, then per transition in ascending
//!               (state, read) order: u16 state, u16 read, u16 next,
//!               u16 write, u8 move (0 = L, 1 = R, 2 = S)
//! ```
//!
//! All integers are little-endian. Names are not encoded: decoding yields
//! the canonical names `q0, q1, …` and `s0, s1, …`.

use std::collections::{BTreeMap, BTreeSet};

use super::{Action, MachineSpec, Move, State, Symbol, TmError};
use crate::wire::{Reader, WireError, Writer};

pub const MAGIC: &[u8; 4] = b"SLTM";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Encoding(Vec<u8>);

impl From<WireError> for TmError {
    fn from(e: WireError) -> Self {
        TmError::Malformed {
            offset: e.offset,
            message: e.message,
        }
    }
}

impl Encoding {
    pub fn encode(spec: &MachineSpec) -> Encoding {
        let mut w = Writer::default();
        w.u16(spec.states.len() as u16);
        w.u16(spec.alphabet.len() as u16);
        w.u16(spec.blank.0);
        w.u16(spec.start.0);
        w.u16(spec.halt.len() as u16);
        for h in &spec.halt {
            w.u16(h.0);
        }
        let transitions: Vec<_> = spec.transitions().collect();
        w.u32(transitions.len() as u32);
        for ((q, s), a) in transitions {
            w.u16(q.0);
            w.u16(s.0);
            w.u16(a.next.0);
            w.u16(a.write.0);
            w.u8(match a.movement {
                Move::Left => 0,
                Move::Right => 1,
                Move::Stay => 2,
            });
        }
        Encoding(w.frame(MAGIC, VERSION))
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Encoding {
        Encoding(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn decode(&self) -> Result<MachineSpec, TmError> {
        decode(&self.0)
    }
}

fn decode(bytes: &[u8]) -> Result<MachineSpec, TmError> {
    let mut r = Reader::open(bytes, MAGIC, VERSION)?;
    let n_states = r.u16()?;
    let n_symbols = r.u16()?;
    let blank = Symbol(r.u16()?);
    let start = State(r.u16()?);
    let n_halt = r.u16()?;
    let mut halt = BTreeSet::new();
    let mut prev: Option<u16> = None;
    for _ in 0..n_halt {
        let at = r.offset();
        let h = r.u16()?;
        if prev.is_some_and(|p| p >= h) || h >= n_states {
            return Err(r.error_at(at, "halt states must be ascending and in range").into());
        }
        prev = Some(h);
        halt.insert(State(h));
    }
    let n_trans = r.u32()?;
    let mut transitions = BTreeMap::new();
    let mut prev_key: Option<(u16, u16)> = None;
    for _ in 0..n_trans {
        let at = r.offset();
        let key = (r.u16()?, r.u16()?);
        let next = r.u16()?;
        let write = r.u16()?;
        let movement = match r.u8()? {
            0 => Move::Left,
            1 => Move::Right,
            2 => Move::Stay,
            other => return Err(r.error_at(r.offset() - 1, format!("bad move byte {other}")).into()),
        };
        if prev_key.is_some_and(|p| p >= key) {
            return Err(r.error_at(at, "transitions must be strictly ascending").into());
        }
        if key.0 >= n_states || key.1 >= n_symbols || next >= n_states || write >= n_symbols {
            return Err(r.error_at(at, "transition index out of range").into());
        }
        prev_key = Some(key);
        transitions.insert(
            (State(key.0), Symbol(key.1)),
            Action {
                next: State(next),
                write: Symbol(write),
                movement,
            },
        );
    }
    r.finish()?;
    let states = (0..n_states).map(|i| format!("q{i}")).collect();
    let alphabet = (0..n_symbols).map(|i| format!("s{i}")).collect();
    MachineSpec::new(states, alphabet, blank, start, halt, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_is_canonical_form() {
        for m in [
            fixtures::m_halt0(),
            fixtures::m_halt2(),
            fixtures::m_loop(),
            fixtures::m_bb2(),
        ] {
            let e = Encoding::encode(&m);
            assert_eq!(e.decode().unwrap(), m.canonical());
        }
    }

    #[test]
    fn encoding_is_deterministic_and_name_blind() {
        let m = fixtures::m_loop();
        assert_eq!(Encoding::encode(&m), Encoding::encode(&m));
        assert_eq!(Encoding::encode(&m), Encoding::encode(&m.canonical()));
    }

    #[test]
    fn halt2_bytes_are_bit_exact() {
        let e = Encoding::encode(&fixtures::m_halt2());
        #[rustfmt::skip]
        let expected: Vec<u8> = vec![
            b'S', b'L', b'T', b'M', 1, 34, 0, 0, 0,
            3, 0, 1, 0, 0, 0, 0, 0,     // states, symbols, blank, start
            1, 0, 2, 0,                 // one halt state: q2
            2, 0, 0, 0,                 // two transitions
            0, 0, 0, 0, 1, 0, 0, 0, 1,  // q0 s0 -> q1 s0 R
            1, 0, 0, 0, 2, 0, 0, 0, 1,  // q1 s0 -> q2 s0 R
        ];
        assert_eq!(e.as_bytes(), expected.as_slice());
    }

    #[test]
    fn truncated_bytes_rejected_with_offset() {
        let bytes = Encoding::encode(&fixtures::m_halt2()).into_bytes();
        for cut in 0..bytes.len() {
            let err = Encoding::from_bytes(bytes[..cut].to_vec()).decode().unwrap_err();
            assert!(matches!(err, TmError::Malformed { .. }), "cut {cut}: {err:?}");
        }
    }

    #[test]
    fn corrupt_body_rejected() {
        let mut bytes = Encoding::encode(&fixtures::m_halt2()).into_bytes();
        let last = bytes.len() - 1;
        bytes[last] = 9;
        match Encoding::from_bytes(bytes).decode() {
            Err(TmError::Malformed { offset, .. }) => assert_eq!(offset, last),
            other => panic!("{other:?}"),
        }
    }
}
