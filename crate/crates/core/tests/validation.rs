use std::fs;
use std::path::Path;

use sidl_core::{parse_sidl, validate};

const CASES: &[(&str, &str)] = &[
    ("duplicate_bid", "DuplicateBid"),
    ("unknown_bid", "UnknownBid"),
    ("arity_mismatch", "ArityMismatch"),
    ("probability_out_of_range", "ProbabilityOutOfRange"),
    ("distribution_sum", "DistributionSum"),
    ("no_agents", "NoAgents"),
    ("nil_branching_arity", "NilBranchingArity"),
];

fn load(dir: &str, name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(dir).join(format!("{name}.sidl"));
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn each_fixture_fails_with_its_own_code() {
    for (name, code) in CASES {
        let report = validate(&parse_sidl(&load("invalid", name)).unwrap());
        let codes: Vec<_> = report.errors.iter().map(|e| e.code()).collect();
        assert_eq!(codes, [*code], "{name}: {report}");
    }
}

#[test]
fn each_minimal_fix_passes() {
    for (name, _) in CASES {
        let report = validate(&parse_sidl(&load("fixed", name)).unwrap());
        assert!(report.is_ok(), "{name}: {report}");
    }
}

#[test]
fn distribution_sum_reports_the_total() {
    let report = validate(&parse_sidl(&load("invalid", "distribution_sum")).unwrap());
    assert_eq!(report.to_string().lines().next().unwrap(), "error[DistributionSum]: chance 0: distribution sums to 1.1, not 1.0");
}
