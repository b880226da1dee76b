use std::collections::{BTreeMap, BTreeSet};

use super::{Action, MachineSpec, Move, State, Symbol, TmError};

/// Parse the line-based machine description format.
///
/// ```text
/// # comment
/// states: q0 q1 qh
/// alphabet: _ 1
/// blank: _
/// start: q0
/// halt: qh
/// q0 _ -> q1 _ R
/// ```
///
/// Header values may be separated by whitespace or commas. `halt:` may be
/// empty. Transitions may appear in any order relative to the headers.
pub fn parse_machine(text: &str) -> Result<MachineSpec, TmError> {
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut alphabet: Option<(usize, Vec<String>)> = None;
    let mut blank: Option<(usize, String)> = None;
    let mut start: Option<(usize, String)> = None;
    let mut halt: Option<(usize, Vec<String>)> = None;
    let mut rules: Vec<(usize, [String; 5])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            let items: Vec<String> = value
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            let dup = |l: usize| TmError::Syntax {
                line: l,
                message: format!("duplicate `{key}:` header"),
            };
            let single = |items: Vec<String>| -> Result<String, TmError> {
                match <[String; 1]>::try_from(items) {
                    Ok([s]) => Ok(s),
                    Err(_) => Err(TmError::Syntax {
                        line: line_no,
                        message: format!("`{key}:` takes exactly one name"),
                    }),
                }
            };
            match key {
                "states" if states.is_some() => return Err(dup(line_no)),
                "alphabet" if alphabet.is_some() => return Err(dup(line_no)),
                "blank" if blank.is_some() => return Err(dup(line_no)),
                "start" if start.is_some() => return Err(dup(line_no)),
                "halt" if halt.is_some() => return Err(dup(line_no)),
                "states" => states = Some((line_no, items)),
                "alphabet" => alphabet = Some((line_no, items)),
                "blank" => blank = Some((line_no, single(items)?)),
                "start" => start = Some((line_no, single(items)?)),
                "halt" => halt = Some((line_no, items)),
                other => {
                    return Err(TmError::Syntax {
                        line: line_no,
                        message: format!("unknown header `{other}`"),
                    })
                }
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [q, s, "->", q2, s2, m] => rules.push((line_no, [q, s, q2, s2, m].map(|t| t.to_string()))),
            _ => {
                return Err(TmError::Syntax {
                    line: line_no,
                    message: "expected `state symbol -> state symbol move`".into(),
                })
            }
        }
    }

    let missing = |h: &str| TmError::Syntax {
        line: 0,
        message: format!("missing `{h}:` header"),
    };
    let (_, states) = states.ok_or_else(|| missing("states"))?;
    let (_, alphabet) = alphabet.ok_or_else(|| missing("alphabet"))?;
    let (blank_line, blank) = blank.ok_or_else(|| missing("blank"))?;
    let (start_line, start) = start.ok_or_else(|| missing("start"))?;
    let (halt_line, halt) = halt.ok_or_else(|| missing("halt"))?;

    let state_of = |line: usize, name: &str| {
        states
            .iter()
            .position(|s| s == name)
            .map(|i| State(i as u16))
            .ok_or_else(|| TmError::Unknown {
                line,
                kind: "state",
                name: name.to_owned(),
            })
    };
    let symbol_of = |line: usize, name: &str| {
        alphabet
            .iter()
            .position(|s| s == name)
            .map(|i| Symbol(i as u16))
            .ok_or_else(|| TmError::Unknown {
                line,
                kind: "symbol",
                name: name.to_owned(),
            })
    };

    let blank = symbol_of(blank_line, &blank)?;
    let start = state_of(start_line, &start)?;
    let halt = halt
        .iter()
        .map(|h| state_of(halt_line, h))
        .collect::<Result<BTreeSet<_>, _>>()?;

    let mut transitions = BTreeMap::new();
    for (line, [q, s, q2, s2, m]) in &rules {
        let key = (state_of(*line, q)?, symbol_of(*line, s)?);
        let movement = match m.as_str() {
            "L" | "l" => Move::Left,
            "R" | "r" => Move::Right,
            "S" | "s" | "N" | "n" => Move::Stay,
            other => {
                return Err(TmError::Syntax {
                    line: *line,
                    message: format!("bad move `{other}`, expected L, R or S"),
                })
            }
        };
        let action = Action {
            next: state_of(*line, q2)?,
            write: symbol_of(*line, s2)?,
            movement,
        };
        if transitions.insert(key, action).is_some() {
            return Err(TmError::Nondeterministic {
                line: *line,
                state: q.clone(),
                symbol: s.clone(),
            });
        }
    }

    MachineSpec::new(states, alphabet, blank, start, halt, transitions)
}
