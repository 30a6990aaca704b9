use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn game(name: &str) -> PathBuf {
    root().join("games").join(name)
}

fn ggma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggma")).args(args).env_remove("NO_COLOR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ggma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_accepts_the_corpus() {
    for name in ["example1.sidl", "pico_turn.sidl", "countdown.sidl", "timeout.sidl", "sudden_event.sidl"] {
        let out = ggma(&["check", game(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(stdout(&out), "OK\n");
    }
}

#[test]
fn check_reports_errors_with_exit_1() {
    let fixture = root().join("crates/core/tests/fixtures/invalid/duplicate_bid.sidl");
    let out = ggma(&["check", "--no-color", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("error[DuplicateBid]: BID 1 is declared more than once"));
    assert_eq!(ggma(&["check", "/nonexistent.sidl"]).status.code(), Some(1));
}

#[test]
fn pico_run_prints_the_winner_first() {
    let pico = game("pico_turn.sidl");
    let out = ggma(&["run", pico.to_str().unwrap(), "--policy", "alice=fixed:8", "--policy", "bob=fixed:13", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "bob 1.0\nalice 0.0\n");
}

#[test]
fn runs_are_reproducible_end_to_end() {
    let (a, b) = (tmp("a.sidlrec"), tmp("b.sidlrec"));
    let run = |rec: &PathBuf| {
        ggma(&["run", game("sudden_event.sidl").to_str().unwrap(), "--default-policy", "random", "--seed", "21", "--record", rec.to_str().unwrap()])
    };
    let (oa, ob) = (run(&a), run(&b));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(stdout(&oa).replace("a.sidlrec", "b.sidlrec"), stdout(&ob));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let replayed = ggma(&["replay", a.to_str().unwrap()]);
    assert_eq!(replayed.status.code(), Some(0));
    assert!(stdout(&replayed).starts_with("OK: "));
}

#[test]
fn exit_codes() {
    let rec = tmp("countdown.sidlrec");
    let out = ggma(&["run", game("countdown.sidl").to_str().unwrap(), "--max-chronons", "5", "--record", rec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let text = std::fs::read_to_string(&rec).unwrap();
    let tampered = tmp("tampered.sidlrec");
    std::fs::write(&tampered, text.replacen("countdown(29)", "countdown(28)", 1)).unwrap();
    let out = ggma(&["replay", tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverges at chronon 0"));

    std::fs::write(&tampered, "not a record\n").unwrap();
    assert_eq!(ggma(&["replay", tampered.to_str().unwrap()]).status.code(), Some(1));

    let bad_policy = ggma(&["run", game("pico_turn.sidl").to_str().unwrap(), "--policy", "alice=greedy"]);
    assert_eq!(bad_policy.status.code(), Some(1));
}

#[test]
fn serve_plays_a_game_over_tcp() {
    let rec = tmp("served.sidlrec");
    let mut child = Command::new(env!("CARGO_BIN_EXE_ggma"))
        .args(["serve", game("example1.sidl").to_str().unwrap(), "--port", "0", "--chronon-ms", "100", "--seed", "3"])
        .args(["--record", rec.to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    stderr.read_line(&mut line).unwrap();
    let port: u16 = line.trim().rsplit(':').next().unwrap().parse().unwrap_or_else(|_| panic!("{line}"));

    let stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let reader = BufReader::new(stream);
    writeln!(writer, r#"{{"type":"join","agent":"alice"}}"#).unwrap();
    let mut sent = false;
    for line in reader.lines() {
        let line = line.unwrap();
        if line.contains(r#""type":"view","chronon":1"#) && !sent {
            writeln!(writer, r#"{{"type":"command","bid":1,"alias":"A"}}"#).unwrap();
            sent = true;
        }
        if line.contains(r#""type":"game_over""#) {
            break;
        }
    }
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
    let mut out = String::new();
    std::io::Read::read_to_string(&mut child.stdout.take().unwrap(), &mut out).unwrap();
    assert!(out == "alice 1.0\n" || out == "alice 2.0\n", "{out}");
    assert_eq!(ggma(&["replay", rec.to_str().unwrap()]).status.code(), Some(0));
}
