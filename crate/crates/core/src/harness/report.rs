//! Text, CSV and JSON renderings of experiment results.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::Config;
use super::subject::{OverheadRow, Subject, SubjectError};
use super::suite::SuiteReport;
use crate::guest::{DiagonalTranscript, XBehavior};
use crate::machine::{RunVerdict, Step};
use crate::obs::{PartialObservation, Tail};
use crate::operator::{CaseTable, ChainRecord, HaltingOperator, Omega, SemiDecision};

pub const CHAIN_SCHEMA: &str = "scottlimit.chain/1";
pub const REPORT_SCHEMA: &str = "scottlimit.report/1";

/// Lookup text for one cell: `0`, `1` or `⊥`.
fn cell(p: &PartialObservation, k: Step) -> &'static str {
    match p.get(k) {
        Some(b) if b.is_one() => "1",
        Some(_) => "0",
        None => "⊥",
    }
}

/// One line per stage: index, observation, ticks spent producing it.
pub fn chain_text(chain: &ChainRecord) -> String {
    chain
        .stages
        .iter()
        .zip(&chain.ledgers)
        .enumerate()
        .map(|(i, (p, l))| format!("{i:>4}  {p}  ticks={}\n", l.total()))
        .collect()
}

/// `stage,index,value` with one row per stored cell plus one row for the
/// first index past them, so the tail is always visible.
pub fn chain_csv(chain: &ChainRecord) -> String {
    let mut out = String::from("stage,index,value\n");
    for (i, p) in chain.stages.iter().enumerate() {
        let last = match p.tail() {
            Tail::Bottom => p.cells().len() as Step,
            _ => p.horizon(),
        };
        for k in 0..=last {
            out.push_str(&format!("{i},{k},{}\n", cell(p, k)));
        }
    }
    out
}

pub fn chain_json(subject: &Subject, table: CaseTable, chain: &ChainRecord) -> serde_json::Value {
    let stages: Vec<serde_json::Value> = chain
        .stages
        .iter()
        .zip(&chain.ledgers)
        .enumerate()
        .map(|(i, (p, l))| {
            json!({
                "stage": i,
                "value": p.to_string(),
                "defined": p.defined_count(),
                "ledger": l,
            })
        })
        .collect();
    json!({
        "schema": CHAIN_SCHEMA,
        "machine": subject.kind(),
        "digest": subject.digest(),
        "input": subject.input_text(),
        "table": table,
        "stages": stages,
    })
}

pub fn overhead_csv(rows: &[OverheadRow]) -> String {
    let mut out = String::from("bound,verdict,step,simulated_steps,verdict_ticks,total\n");
    for r in rows {
        let (verdict, step) = match r.verdict {
            RunVerdict::HaltsAt(k) => ("halts", k),
            RunVerdict::RunningAt(k) => ("running", k),
        };
        out.push_str(&format!(
            "{},{verdict},{step},{},{},{}\n",
            r.bound,
            r.ledger.simulated_steps(),
            r.ledger.verdict_ticks(),
            r.ledger.total()
        ));
    }
    out
}

pub fn diagonal_text(tr: &DiagonalTranscript) -> String {
    let x = match tr.x {
        XBehavior::Halted(k) => format!("halted at step {k}"),
        XBehavior::Looped(k) => format!("entered LOOP at step {k}"),
        XBehavior::Undetermined(k) => format!("undetermined after {k} ticks"),
    };
    format!(
        "budget {}; decider said {} (halted at {}); X {x}; {}\n",
        tr.cost_bound,
        tr.verdict,
        tr.decider_halted_at,
        if tr.contradiction {
            "contradiction"
        } else {
            "no contradiction"
        }
    )
}

/// Everything known about one subject under one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub machine: String,
    pub digest: String,
    pub input: String,
    pub seed: u64,
    pub table: CaseTable,
    pub window: Step,
    /// Chain stages in text form.
    pub chain: Vec<String>,
    pub chain_fixed_points: usize,
    pub limit: Omega,
    pub limit_is_fixed: Option<bool>,
    pub semidecision: SemiDecision,
    pub overhead: Vec<OverheadRow>,
    pub suite: Option<SuiteReport>,
}

impl ExperimentReport {
    pub fn build(subject: &Subject, cfg: &Config, table: CaseTable, stages: Step) -> Result<Self, SubjectError> {
        let op = HaltingOperator::new(table, cfg.window);
        let probe = subject.probe(stages.max(cfg.omega_fuel).max(1))?;
        let chain = op.iterate_chain(&probe, stages)?;
        let mut chain_fixed_points = 0;
        for p in &chain.stages {
            if op.is_fixed_point(&probe, p)?.fixed {
                chain_fixed_points += 1;
            }
        }
        let limit = subject.p_omega(cfg.omega_fuel)?;
        let limit_is_fixed = match &limit {
            Omega::Limit(p) => Some(op.is_fixed_point(&probe, p)?.fixed),
            Omega::StillRunning(_) => None,
        };
        Ok(ExperimentReport {
            schema: REPORT_SCHEMA.into(),
            machine: subject.kind().into(),
            digest: subject.digest(),
            input: subject.input_text(),
            seed: cfg.seed,
            table,
            window: cfg.window,
            chain: chain.stages.iter().map(|p| p.to_string()).collect(),
            chain_fixed_points,
            limit,
            limit_is_fixed,
            semidecision: subject.semidecide(&cfg.fuel_schedule)?,
            overhead: subject.overhead(0..=cfg.overhead_max)?,
            suite: None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "machine {} {}\ninput {}\nseed {}; table {}; window {}\n",
            self.machine, self.digest, self.input, self.seed, self.table, self.window
        );
        out.push_str(&format!(
            "chain: {} stages, {} fixed; last {}\n",
            self.chain.len(),
            self.chain_fixed_points,
            self.chain.last().map(String::as_str).unwrap_or("-")
        ));
        match &self.limit {
            Omega::Limit(p) => out.push_str(&format!(
                "limit: {p} ({})\n",
                if self.limit_is_fixed == Some(true) {
                    "fixed"
                } else {
                    "not fixed"
                }
            )),
            Omega::StillRunning(f) => out.push_str(&format!("limit: undetermined, still running after {f} steps\n")),
        }
        match self.semidecision {
            SemiDecision::HaltsAt { step, fuel } => {
                out.push_str(&format!("semi-decision: halts at {step} (fuel {fuel})\n"))
            }
            SemiDecision::FuelExhausted(f) => out.push_str(&format!("semi-decision: no answer within fuel {f}\n")),
        }
        let worst = self
            .overhead
            .iter()
            .map(|r| r.ledger.total() as i128 - r.bound as i128)
            .max()
            .unwrap_or(0);
        out.push_str(&format!(
            "overhead: {} bounds, max ticks - bound = {worst}\n",
            self.overhead.len()
        ));
        if let Some(s) = &self.suite {
            out.push_str(&s.to_text());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::guest::{decider_cost_bound, diagonal_transcript, make_bounded_decider};

    fn halt2_chain(n: Step) -> (Subject, ChainRecord) {
        let s = Subject::tm(fixtures::m_halt2()).with_input("empty").unwrap();
        let probe = s.probe(n.max(1)).unwrap();
        let chain = HaltingOperator::default().iterate_chain(&probe, n).unwrap();
        (s, chain)
    }

    #[test]
    fn csv_rows() {
        let (_, chain) = halt2_chain(3);
        let csv = chain_csv(&chain);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "stage,index,value");
        assert_eq!(lines[1], "0,0,⊥");
        assert_eq!(lines[2..4], ["1,0,0", "1,1,⊥"]);
        assert_eq!(lines.last(), Some(&"3,3,⊥"));
        assert!(csv.contains("3,2,1\n"));
        // 1 + 2 + 3 + 4 data rows.
        assert_eq!(lines.len(), 11);
    }

    #[test]
    fn json_shape() {
        let (s, chain) = halt2_chain(2);
        let v = chain_json(&s, CaseTable::Standard, &chain);
        assert_eq!(v["schema"], CHAIN_SCHEMA);
        assert_eq!(v["stages"].as_array().unwrap().len(), 3);
        assert_eq!(v["stages"][1]["value"], "[0 | ⊥]");
        assert_eq!(v["stages"][2]["ledger"]["simulated_steps"], 1);
        assert_eq!(v["table"], "standard");
    }

    #[test]
    fn overhead_rows_render() {
        let s = Subject::tm(fixtures::m_loop());
        let csv = overhead_csv(&s.overhead(0..=2).unwrap());
        assert_eq!(
            csv,
            "bound,verdict,step,simulated_steps,verdict_ticks,total\n0,running,0,0,1,1\n1,running,1,1,1,2\n2,running,2,2,1,3\n"
        );
    }

    #[test]
    fn diagonal_line() {
        let (_, tr) = diagonal_transcript(&make_bounded_decider(3), decider_cost_bound(3), 100).unwrap();
        let line = diagonal_text(&tr);
        assert!(line.contains("contradiction"), "{line}");
        assert!(line.starts_with("budget 7;"), "{line}");
    }

    #[test]
    fn report_round_trips_through_json() {
        let s = Subject::tm(fixtures::m_bb2()).with_input("empty").unwrap();
        let cfg = Config {
            overhead_max: 10,
            ..Config::default()
        };
        let r = ExperimentReport::build(&s, &cfg, CaseTable::Standard, 8).unwrap();
        assert_eq!(r.limit, Omega::Limit(PartialObservation::one_tail_from(6)));
        assert_eq!(r.limit_is_fixed, Some(true));
        assert_eq!(r.chain_fixed_points, 0);
        let text = serde_json::to_string(&r).unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(r.to_text().contains("halts at 6"));
    }
}
