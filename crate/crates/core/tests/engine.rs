use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use sidl_core::record::RecordEntry;
use sidl_core::session::ReplayError;
use sidl_core::{
    replay, run_headless, ChanceSource, Engine, PolicyRegistry, Recorder, RunOptions, SeededChance, StopReason,
};

const GAMES: &[(&str, &str)] = &[
    ("example1", include_str!("../../../games/example1.sidl")),
    ("pico_turn", include_str!("../../../games/pico_turn.sidl")),
    ("countdown", include_str!("../../../games/countdown.sidl")),
    ("timeout", include_str!("../../../games/timeout.sidl")),
    ("sudden_event", include_str!("../../../games/sudden_event.sidl")),
];

fn headless(src: &str, assignments: &[&str], default: &str, seed: u64, max: u64) -> sidl_core::RunOutcome {
    let engine = Engine::load(src).unwrap();
    let assignments: Vec<String> = assignments.iter().map(|s| s.to_string()).collect();
    let mut policies = PolicyRegistry::default().assign(engine.spec(), &assignments, default, seed).unwrap();
    let options = RunOptions { seed, max_chronons: max, chronon_ms: 1000 };
    run_headless(engine, &mut policies, options, Recorder::in_memory()).unwrap()
}

fn text(out: &sidl_core::RunOutcome) -> String {
    String::from_utf8(out.recorder.bytes().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn at_most_one_operation_per_branching(game in 0..GAMES.len(), seed in any::<u64>()) {
        let engine = Engine::load(GAMES[game].1).unwrap();
        let mut policies = PolicyRegistry::default().assign(engine.spec(), &[], "random", seed).unwrap();
        let mut session = sidl_core::Session::start(Arc::clone(&engine), seed, 1000, Recorder::in_memory()).unwrap();
        while !session.is_over() && session.state().chronon < 200 {
            for cmd in sidl_core::session::collect_commands(&session, &mut policies) {
                session.submit(&cmd).unwrap();
            }
            let (step, _) = session.tick().unwrap();
            let mut seen = BTreeSet::new();
            for x in &step.executed {
                prop_assert!(seen.insert(x.branching), "branching {} ran twice", x.branching);
            }
            prop_assert_eq!(step.executed.len() + step.skipped.len(), engine.spec().branchings.len());
            session.state().check_invariants(engine.spec()).map_err(TestCaseError::fail)?;
        }
    }
}

#[test]
fn identical_runs_give_identical_records() {
    for (name, src) in GAMES {
        let a = headless(src, &[], "random", 99, 100);
        let b = headless(src, &[], "random", 99, 100);
        assert_eq!(a.recorder.bytes(), b.recorder.bytes(), "{name}");
    }
}

#[test]
fn replay_detects_an_altered_seed() {
    let first = |seed| SeededChance::new(seed).sample(&[0.5, 0.5]);
    let seed = 11;
    let other = (0..).find(|s| first(*s) != first(seed)).unwrap();
    let out = headless(GAMES[0].1, &["alice=fixed:Wait,A"], "idle", seed, 10);
    let altered = text(&out).replacen(&format!("\"seed\":{seed},"), &format!("\"seed\":{other},"), 1);
    match replay(&altered) {
        Err(ReplayError::Divergence { chronon: 0, field }) => assert_eq!(field, "executed"),
        other => panic!("expected divergence at chronon 0, got {other:?}"),
    }
}

#[test]
fn replay_detects_tampering() {
    let out = headless(GAMES[1].1, &["alice=fixed:8", "bob=fixed:13"], "idle", 7, 10);
    let log = text(&out);
    assert!(replay(&log).is_ok());

    let tampered = log.replace("\"bob\":1.0", "\"bob\":2.0");
    assert_ne!(tampered, log);
    assert!(matches!(replay(&tampered), Err(ReplayError::Divergence { chronon: 1, ref field }) if field == "accounts"));

    let edited_source = log.replacen("C1 > C2", "C1 < C2", 1);
    assert!(matches!(replay(&edited_source), Err(ReplayError::SpecMismatch)));

    assert!(matches!(replay(""), Err(ReplayError::Malformed(_))));
    let truncated: String = log.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert!(matches!(replay(&truncated), Err(ReplayError::Malformed(_))));
}

#[test]
fn record_shape() {
    let out = headless(GAMES[0].1, &["alice=fixed:Wait,A"], "idle", 3, 10);
    let entries = sidl_core::record::read_log(&text(&out)).unwrap();
    assert!(matches!(entries[0], RecordEntry::Header(_)));
    let commands = entries.iter().filter(|e| matches!(e, RecordEntry::Command(_))).count();
    let chronons: Vec<_> = entries
        .iter()
        .filter_map(|e| match e {
            RecordEntry::Chronon(c) => Some(c),
            _ => None,
        })
        .collect();
    assert_eq!(commands, 2);
    assert_eq!(chronons.len(), 2);
    assert!(chronons.last().unwrap().terminal);
    assert_eq!(chronons[0].facts[0].hidden_for, ["alice"]);
}

#[test]
fn timeout_rewards_a_press_and_punishes_waiting() {
    let pressed = headless(GAMES[3].1, &["player=fixed:wait,press"], "idle", 0, 100);
    assert_eq!((pressed.stop, pressed.state.chronon), (StopReason::Terminal, 2));
    assert_eq!(pressed.state.accounts["player"], 1.0);

    let waited = headless(GAMES[3].1, &[], "idle", 0, 100);
    assert_eq!((waited.stop, waited.state.chronon), (StopReason::Terminal, 6));
    assert_eq!(waited.state.accounts["player"], -1.0);
}

#[test]
fn sudden_event_ends_an_idle_farm() {
    let engine = Engine::load(GAMES[4].1).unwrap();
    for seed in 0..20 {
        let out = run_headless(Arc::clone(&engine), &mut [], RunOptions { seed, ..RunOptions::default() }, Recorder::in_memory()).unwrap();
        assert_eq!(out.stop, StopReason::Terminal);
        assert_eq!(out.state.accounts["farmer"], 0.0);
    }
    let harvest = headless(GAMES[4].1, &["farmer=fixed:hold,hold,harvest"], "idle", 1, 100);
    let a = harvest.state.accounts["farmer"];
    assert!(a == 0.0 || a == 3.0, "{a}");
}
