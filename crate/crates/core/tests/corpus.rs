use std::fs;
use std::path::PathBuf;

use sidl_core::{parse_sidl, print_spec, validate};

fn games() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games");
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sidl"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn corpus_is_valid() {
    let games = games();
    assert_eq!(games.len(), 5);
    for (name, src) in &games {
        let report = validate(&parse_sidl(src).unwrap_or_else(|e| panic!("{name}: {e}")));
        assert!(report.is_ok(), "{name}: {report}");
        assert!(report.warnings.is_empty(), "{name}: {report}");
    }
}

#[test]
fn printing_is_a_fixed_point() {
    for (name, src) in games() {
        let spec = parse_sidl(&src).unwrap();
        let printed = print_spec(&spec);
        let reparsed = parse_sidl(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(reparsed, spec, "{name}");
        assert_eq!(print_spec(&reparsed), printed, "{name}");
    }
}
