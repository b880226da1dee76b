//! Cross-checks against independently written oracles.

use std::path::Path;

use scottlimit::guest::{decider_cost_bound, make_bounded_decider, run_guest, GuestMachine, GuestVerdict, Value};
use scottlimit::harness::Subject;
use scottlimit::tm::{enumerate_machines, EnumerationLimits, MachineSpec, Move, State, Symbol};
use scottlimit::{fixtures, leq, trace, HaltingOperator, Omega, PartialObservation, RunVerdict};

/// Dense-tape stepper sharing nothing with the library's runner except the
/// transition lookup.
struct Reference<'a> {
    spec: &'a MachineSpec,
    tape: Vec<Symbol>,
    origin: usize,
    head: i64,
    state: State,
}

impl<'a> Reference<'a> {
    fn new(spec: &'a MachineSpec, input: &[Symbol]) -> Self {
        Reference {
            spec,
            tape: if input.is_empty() {
                vec![spec.blank()]
            } else {
                input.to_vec()
            },
            origin: 0,
            head: 0,
            state: spec.start(),
        }
    }

    fn halted(&self) -> bool {
        self.spec.is_halt(self.state)
    }

    fn step(&mut self) {
        let i = (self.head + self.origin as i64) as usize;
        let a = self.spec.action(self.state, self.tape[i]).expect("total table");
        self.tape[i] = a.write;
        self.state = a.next;
        match a.movement {
            Move::Left => self.head -= 1,
            Move::Right => self.head += 1,
            Move::Stay => {}
        }
        if self.head + (self.origin as i64) < 0 {
            self.tape.insert(0, self.spec.blank());
            self.origin += 1;
        }
        if (self.head + self.origin as i64) as usize == self.tape.len() {
            self.tape.push(self.spec.blank());
        }
    }

    fn cells(&self) -> Vec<(i64, Symbol)> {
        self.tape
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != self.spec.blank())
            .map(|(i, s)| (i as i64 - self.origin as i64, *s))
            .collect()
    }
}

#[test]
fn stepper_matches_reference_on_all_two_state_machines() {
    let mut machines = 0;
    for m in enumerate_machines(2, 2, EnumerationLimits::default()).unwrap() {
        let input = m.self_input();
        let configs = trace(&m, input.as_slice(), 50).unwrap();
        let mut r = Reference::new(&m, &input);
        for (t, c) in configs.iter().enumerate() {
            assert_eq!(c.step, t as u64);
            assert_eq!((c.state, c.head), (r.state, r.head), "{m}at step {t}");
            let cells: Vec<(i64, Symbol)> = c.tape.iter().map(|(i, s)| (*i, *s)).collect();
            assert_eq!(cells, r.cells(), "{m}at step {t}");
            if t + 1 < configs.len() {
                assert!(!r.halted());
                r.step();
            }
        }
        let last = configs.len() as u64 - 1;
        assert_eq!(r.halted(), last < 50 || m.is_halt(configs[last as usize].state));
        machines += 1;
    }
    assert_eq!(machines, 104_976);
}

#[test]
fn fixture_files_match_bundled_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, spec, halt) in fixtures::turing_fixtures() {
        let s = Subject::load(&dir.join(format!("{name}.tm")))
            .unwrap()
            .with_input("empty")
            .unwrap();
        assert_eq!(s.digest(), Subject::tm(spec).digest(), "{name}");
        let expected = match halt {
            Some(k) => RunVerdict::HaltsAt(k),
            None => RunVerdict::RunningAt(200),
        };
        assert_eq!(s.run_bounded(200).unwrap().0, expected, "{name}");
    }
    for (name, steps) in [("g_halt", Some(0)), ("g_loop", None), ("g_countdown", Some(17))] {
        let s = Subject::load(&dir.join(format!("{name}.gasm"))).unwrap();
        let verdict = s.run_bounded(100).unwrap().0;
        assert_eq!(verdict.halted(), steps.is_some(), "{name}");
        if let Some(k) = steps {
            assert_eq!(verdict, RunVerdict::HaltsAt(k));
        }
    }
}

#[test]
fn every_chain_stage_lies_below_the_limit() {
    let op = HaltingOperator::default();
    for (name, spec, halt) in fixtures::turing_fixtures() {
        let s = Subject::tm(spec).with_input("empty").unwrap();
        let probe = s.probe(40).unwrap();
        let chain = op.iterate_chain(&probe, 40).unwrap();
        match s.p_omega(40).unwrap() {
            Omega::Limit(limit) => {
                let k = halt.expect("limit only for halting fixtures");
                assert_eq!(limit, PartialObservation::one_tail_from(k), "{name}");
                assert!(chain.stages.iter().all(|p| leq(p, &limit)), "{name}");
                // Stage K+1 already carries the whole zero prefix.
                let prefix = &chain.stages[k as usize + 1];
                assert_eq!(prefix.get(k), Some(scottlimit::Bit::One));
            }
            Omega::StillRunning(_) => {
                assert_eq!(halt, None);
                let zeros = PartialObservation::zero_claim();
                assert!(chain.stages.iter().all(|p| leq(p, &zeros)), "{name}");
            }
        }
    }
}

#[test]
fn bounded_decider_agrees_with_direct_runs() {
    // D_T on program P says HALTS iff P, run on input 0, halts within T.
    let programs = [fixtures::g_halt(), fixtures::g_loop(), fixtures::g_countdown()];
    for t in 0..=20 {
        let d = GuestMachine::new(make_bounded_decider(t)).unwrap();
        for p in &programs {
            let direct = run_guest(&GuestMachine::new(p.clone()).unwrap(), &Value::Num(0), t).unwrap();
            let run = run_guest(&d, &Value::bytes(p.encode()), decider_cost_bound(t)).unwrap();
            let verdict = run
                .output
                .as_ref()
                .and_then(GuestVerdict::from_value)
                .expect("decider answers");
            assert_eq!(
                verdict == GuestVerdict::Halts,
                direct.halted_at.is_some(),
                "T = {t}, {p:?}"
            );
        }
    }
}
