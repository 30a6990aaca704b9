mod common;

use common::*;
use ggma_server::ServerMessage;
use sidl_core::record::{read_log, RecordEntry};

/// Captures every line sent to alice over a whole game and checks it
/// against the record's per-fact hidden lists.
#[tokio::test]
async fn alice_never_sees_hidden_facts() {
    let (addr, server) = start(EXAMPLE, config(150)).await;
    let mut alice = LineClient::connect(addr).await;
    alice.join("alice").await;
    loop {
        match alice.recv().await {
            ServerMessage::View { chronon: 1, .. } => alice.command(1, "A").await,
            ServerMessage::GameOver { .. } => break,
            _ => {}
        }
    }
    alice.drain().await;
    let report = server.await.unwrap().unwrap();

    let views: Vec<ServerMessage> = alice
        .captured
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|m| matches!(m, ServerMessage::View { .. }))
        .collect();
    for line in alice.captured.iter().filter(|l| l.contains("\"type\":\"view\"")) {
        assert!(!line.contains("state("), "leaked: {line}");
    }
    let log = read_log(std::str::from_utf8(&report.record).unwrap()).unwrap();
    let chronons: Vec<_> = log
        .iter()
        .filter_map(|e| match e {
            RecordEntry::Chronon(c) => Some(c),
            _ => None,
        })
        .collect();
    assert_eq!(views.len(), chronons.len() + 1, "one view at the start and one per chronon");
    for (view, entry) in views[1..].iter().zip(&chronons) {
        let ServerMessage::View { chronon, facts, accounts, terminal } = view else { unreachable!() };
        assert_eq!(*chronon, entry.chronon + 1);
        let visible: Vec<_> = entry.facts.iter().filter(|f| !f.hidden_for.contains(&"alice".to_string())).map(|f| &f.fact).collect();
        assert_eq!(facts.iter().collect::<Vec<_>>(), visible);
        assert_eq!(accounts, &entry.accounts);
        assert_eq!(*terminal, entry.terminal);
    }
    assert!(chronons.iter().any(|c| c.facts.iter().any(|f| f.fact.to_string().starts_with("state(") && f.hidden_for == ["alice"])));
}
