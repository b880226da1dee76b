//! Partial halting observations: monotone partial maps `ℕ → {0, 1, ⊥}`
//! ordered by extension.
//!
//! An observation is a finite list of cells plus a tail that gives the value
//! at every index past the cells (and at holes). The tail is `⊥`, an all-zero
//! claim, or "1 from `K` on" (with 0 below `K`). Monotone-1 holds throughout:
//! once the lookup is 1 it stays 1 wherever defined.
//!
//! Values are kept canonical, so two observations are structurally equal
//! iff their lookup functions are equal. In canonical form a tail-bearing
//! observation has no cells: its lookup is total and fixed by the tail.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::machine::Step;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_bool(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Bit::One
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_one() { "1" } else { "0" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    Bottom,
    /// Unproven claim that the value is 0 everywhere.
    ZeroClaim,
    /// 0 below `K`, 1 from `K` on.
    OneFrom(Step),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObsError {
    #[error("not monotone: 1 at index {one} followed by 0 at index {zero}")]
    NotMonotone { one: Step, zero: Step },
    #[error("cell {index} contradicts the tail")]
    TailMismatch { index: Step },
    #[error("conflict at index {index}")]
    Conflict { index: Step },
    #[error("bad observation text: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialObservation {
    /// Empty unless the tail is `Bottom`; never ends in `None`.
    cells: Vec<Option<Bit>>,
    tail: Tail,
}

impl Default for PartialObservation {
    fn default() -> Self {
        PartialObservation::bottom()
    }
}

impl PartialObservation {
    /// The everywhere-undefined observation `⊥`.
    pub fn bottom() -> Self {
        PartialObservation {
            cells: Vec::new(),
            tail: Tail::Bottom,
        }
    }

    /// `0` everywhere (a claim).
    pub fn zero_claim() -> Self {
        PartialObservation {
            cells: Vec::new(),
            tail: Tail::ZeroClaim,
        }
    }

    /// `K` zeros followed by ones forever.
    pub fn one_tail_from(k: Step) -> Self {
        PartialObservation {
            cells: Vec::new(),
            tail: Tail::OneFrom(k),
        }
    }

    /// Bottom-tailed observation defined exactly on `0..bits.len()`.
    pub fn from_bits(bits: &[Bit]) -> Result<Self, ObsError> {
        Self::new(bits.iter().copied().map(Some).collect(), Tail::Bottom)
    }

    /// Validate and canonicalize. A `None` cell is a hole, read through to
    /// the tail.
    pub fn new(cells: Vec<Option<Bit>>, tail: Tail) -> Result<Self, ObsError> {
        let tail_at = |k: Step| match tail {
            Tail::Bottom => None,
            Tail::ZeroClaim => Some(Bit::Zero),
            Tail::OneFrom(from) => Some(Bit::from_bool(k >= from)),
        };
        // Cells must agree with a tail that would also be read past them.
        for (k, c) in cells.iter().enumerate() {
            let k = k as Step;
            if let (Some(b), Some(t)) = (c, tail_at(k)) {
                if *b != t && !(b.is_one() && matches!(tail, Tail::OneFrom(_))) {
                    return Err(ObsError::TailMismatch { index: k });
                }
            }
        }
        let lookup = |k: Step| cells.get(k as usize).copied().flatten().or_else(|| tail_at(k));
        let span = match tail {
            Tail::OneFrom(from) => (cells.len() as Step).max(from.saturating_add(1)),
            _ => cells.len() as Step,
        };
        check_monotone((0..span).map(|k| (k, lookup(k))))?;
        Ok(match tail {
            Tail::Bottom => {
                let mut cells = cells;
                while cells.last() == Some(&None) {
                    cells.pop();
                }
                PartialObservation { cells, tail }
            }
            Tail::ZeroClaim => Self::zero_claim(),
            Tail::OneFrom(_) => {
                let first_one = (0..span)
                    .find(|&k| lookup(k) == Some(Bit::One))
                    .expect("tail supplies a 1");
                Self::one_tail_from(first_one)
            }
        })
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Cells of a bottom-tailed observation. Empty for tailed ones.
    pub fn cells(&self) -> &[Option<Bit>] {
        &self.cells
    }

    pub fn get(&self, k: Step) -> Option<Bit> {
        match self.tail {
            Tail::Bottom => usize::try_from(k)
                .ok()
                .and_then(|i| self.cells.get(i).copied().flatten()),
            Tail::ZeroClaim => Some(Bit::Zero),
            Tail::OneFrom(from) => Some(Bit::from_bool(k >= from)),
        }
    }

    /// Defined at only finitely many indices.
    pub fn is_finite(&self) -> bool {
        self.tail == Tail::Bottom
    }

    /// For finite observations, one past the highest defined index. This
    /// is the size of the defined set when there are no holes.
    pub fn support_len(&self) -> Option<Step> {
        self.is_finite().then_some(self.cells.len() as Step)
    }

    /// Number of defined indices, for finite observations.
    pub fn defined_count(&self) -> Option<Step> {
        self.is_finite()
            .then(|| self.cells.iter().filter(|c| c.is_some()).count() as Step)
    }

    /// Indices up to which the lookup is not simply the tail repeated:
    /// comparing two observations on `0..horizon()` plus their tails decides
    /// equality of lookups.
    pub fn horizon(&self) -> Step {
        match self.tail {
            Tail::Bottom => self.cells.len() as Step,
            Tail::ZeroClaim => 0,
            Tail::OneFrom(k) => k.saturating_add(1),
        }
    }

    /// Every bottom-tailed monotone observation whose defined set lies in
    /// `0..n`, in a fixed order (lexicographic over `⊥ < 0 < 1`).
    pub fn all_finite(n: usize) -> Vec<PartialObservation> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn go(n: usize, cur: &mut Vec<Option<Bit>>, seen_one: bool, out: &mut Vec<PartialObservation>) {
            if cur.len() == n {
                out.push(PartialObservation::new(cur.clone(), Tail::Bottom).expect("monotone by construction"));
                return;
            }
            for v in [None, Some(Bit::Zero), Some(Bit::One)] {
                if seen_one && v == Some(Bit::Zero) {
                    continue;
                }
                cur.push(v);
                go(n, cur, seen_one || v == Some(Bit::One), out);
                cur.pop();
            }
        }
        go(n, &mut cur, false, &mut out);
        out
    }
}

fn check_monotone(values: impl Iterator<Item = (Step, Option<Bit>)>) -> Result<(), ObsError> {
    let mut one = None;
    for (k, v) in values {
        match v {
            Some(Bit::One) if one.is_none() => one = Some(k),
            Some(Bit::Zero) => {
                if let Some(one) = one {
                    return Err(ObsError::NotMonotone { one, zero: k });
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// `p ⊑ q`: `q` agrees with `p` wherever `p` is defined.
pub fn leq(p: &PartialObservation, q: &PartialObservation) -> bool {
    match p.tail {
        // Total observations are maximal.
        Tail::ZeroClaim | Tail::OneFrom(_) => p == q,
        Tail::Bottom => p
            .cells
            .iter()
            .enumerate()
            .all(|(k, c)| c.is_none() || q.get(k as Step) == *c),
    }
}

/// Least upper bound of a finite set. The empty set has supremum `⊥`.
///
/// Fails with the first index at which two members disagree, or at which
/// the merged values break monotone-1 (the index of the offending 0).
pub fn lub<'a, I>(set: I) -> Result<PartialObservation, ObsError>
where
    I: IntoIterator<Item = &'a PartialObservation>,
{
    let set: Vec<&PartialObservation> = set.into_iter().collect();
    let horizon = set.iter().map(|p| p.horizon()).max().unwrap_or(0);
    let total = set.iter().find(|p| !p.is_finite()).copied();
    let mut cells = Vec::with_capacity(horizon as usize);
    for k in 0..horizon {
        let mut v = None;
        for p in &set {
            match (v, p.get(k)) {
                (Some(a), Some(b)) if a != b => return Err(ObsError::Conflict { index: k }),
                (None, b) => v = b,
                _ => {}
            }
        }
        cells.push(v);
    }
    if let Some(t) = total {
        // Two distinct total values differ somewhere in the horizon.
        if let Some(other) = set.iter().find(|p| !p.is_finite() && **p != t) {
            let k = (0..horizon.max(other.horizon()).saturating_add(1))
                .find(|&k| t.get(k) != other.get(k))
                .unwrap_or(horizon);
            return Err(ObsError::Conflict { index: k });
        }
        return Ok(t.clone());
    }
    PartialObservation::new(cells, Tail::Bottom).map_err(|e| match e {
        ObsError::NotMonotone { zero, .. } => ObsError::Conflict { index: zero },
        other => other,
    })
}

/// Every pair has an upper bound inside the set. True for the empty set.
pub fn is_directed(set: &[PartialObservation]) -> bool {
    set.iter()
        .enumerate()
        .all(|(i, a)| set[i + 1..].iter().all(|b| set.iter().any(|c| leq(a, c) && leq(b, c))))
}

/// Membership in `B_T`: finite, defined only inside `0..t`.
pub fn in_bounded_class(p: &PartialObservation, t: Step) -> bool {
    p.support_len().is_some_and(|n| n <= t)
}

impl fmt::Display for PartialObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let prefix: Vec<String> = match self.tail {
            Tail::Bottom => self
                .cells
                .iter()
                .map(|c| c.map_or_else(|| "_".to_string(), |b| b.to_string()))
                .collect(),
            Tail::ZeroClaim => Vec::new(),
            Tail::OneFrom(k) => vec!["0".to_string(); k as usize],
        };
        if prefix.is_empty() {
            f.write_str(" ")?;
        } else {
            write!(f, "{} ", prefix.join(" "))?;
        }
        match self.tail {
            Tail::Bottom => f.write_str("| ⊥]"),
            Tail::ZeroClaim => f.write_str("| 0…]"),
            Tail::OneFrom(k) => write!(f, "| 1…@{k}]"),
        }
    }
}

impl FromStr for PartialObservation {
    type Err = ObsError;

    /// Accepts the display form, with `...` for `…` and `bot` for `⊥`.
    fn from_str(s: &str) -> Result<Self, ObsError> {
        let syntax = |m: &str| ObsError::Syntax(format!("{m}: {s:?}"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| syntax("expected [cells | tail]"))?;
        let (cells, tail) = inner.split_once('|').ok_or_else(|| syntax("missing |"))?;
        let cells = cells
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(Some(Bit::Zero)),
                "1" => Ok(Some(Bit::One)),
                "_" => Ok(None),
                _ => Err(syntax("cells are 0, 1 or _")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match tail.trim().replace("...", "…").as_str() {
            "⊥" | "bot" => Tail::Bottom,
            "0…" => Tail::ZeroClaim,
            t => {
                let k = t
                    .strip_prefix("1…@")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| syntax("tail is ⊥, 0… or 1…@K"))?;
                Tail::OneFrom(k)
            }
        };
        PartialObservation::new(cells, tail)
    }
}

impl Serialize for PartialObservation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartialObservation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
