//! Static checks over a parsed [`GameSpec`].

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::spec::{Bid, GameSpec, Literal};
use crate::term::Term;

/// Predicates with built-in meaning; they cannot be declared with `fact`.
pub const RESERVED: &[&str] = &[
    "account", "does", "fact", "switch", "chance", "branching", "hidden", "request", "operation",
    "init", "ax", "next", "goal", "command", "terminal", "not", "false",
];

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("BID {0} is declared more than once")]
    DuplicateBid(Bid),
    #[error("branching #{branching} refers to undeclared BID {bid}")]
    UnknownBid { branching: usize, bid: Bid },
    #[error("branching #{branching} has {operators} operators but BID {bid} has {expected} alternatives")]
    ArityMismatch { branching: usize, bid: Bid, operators: usize, expected: usize },
    #[error("chance {bid}: probability {value} is not strictly between 0 and 1")]
    ProbabilityOutOfRange { bid: Bid, value: f64 },
    #[error("chance {bid}: distribution sums to {sum}, not 1.0")]
    DistributionSum { bid: Bid, sum: f64 },
    #[error("no agents: at least one init(account(Agent, Balance)) is required")]
    NoAgents,
    #[error("branching #{branching} has BID nil but {operators} operators")]
    NilBranchingArity { branching: usize, operators: usize },
    #[error("`{predicate}` is declared with arity {declared} but used with arity {used}")]
    FactArity { predicate: String, declared: usize, used: usize },
    #[error("`{0}` is reserved and cannot be declared as a fact")]
    ReservedPredicate(String),
    #[error("switch {bid} is owned by `{owner}`, which has no account")]
    UnknownOwner { bid: Bid, owner: String },
    #[error("switch {0} declares no aliases")]
    EmptySwitch(Bid),
    #[error("effect literal in a non-operation rule: {0}")]
    EffectOutsideOperation(String),
    #[error("init fact `{0}` is not ground")]
    NonGroundInit(String),
    #[error("invalid switch initialization `{0}`")]
    InvalidDoesInit(String),
}

impl ValidationError {
    /// Stable error code, the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::DuplicateBid(_) => "DuplicateBid",
            ValidationError::UnknownBid { .. } => "UnknownBid",
            ValidationError::ArityMismatch { .. } => "ArityMismatch",
            ValidationError::ProbabilityOutOfRange { .. } => "ProbabilityOutOfRange",
            ValidationError::DistributionSum { .. } => "DistributionSum",
            ValidationError::NoAgents => "NoAgents",
            ValidationError::NilBranchingArity { .. } => "NilBranchingArity",
            ValidationError::FactArity { .. } => "FactArity",
            ValidationError::ReservedPredicate(_) => "ReservedPredicate",
            ValidationError::UnknownOwner { .. } => "UnknownOwner",
            ValidationError::EmptySwitch(_) => "EmptySwitch",
            ValidationError::EffectOutsideOperation(_) => "EffectOutsideOperation",
            ValidationError::NonGroundInit(_) => "NonGroundInit",
            ValidationError::InvalidDoesInit(_) => "InvalidDoesInit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationWarning {
    #[error("no terminal rule: the game never ends")]
    NoTerminalRule,
    #[error("switch {bid} lists alias `{alias}` more than once")]
    DuplicateAlias { bid: Bid, alias: String },
    #[error("operator `{0}` has no matching operation rule")]
    MissingOperationRule(String),
    #[error("predicate `{0}` is used but never declared with fact/2")]
    UndeclaredPredicate(String),
    #[error("switch {0} has no init(does({0}, Alias))")]
    MissingDoesInit(Bid),
}

impl ValidationWarning {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationWarning::NoTerminalRule => "NoTerminalRule",
            ValidationWarning::DuplicateAlias { .. } => "DuplicateAlias",
            ValidationWarning::MissingOperationRule(_) => "MissingOperationRule",
            ValidationWarning::UndeclaredPredicate(_) => "UndeclaredPredicate",
            ValidationWarning::MissingDoesInit(_) => "MissingDoesInit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: &str) -> bool {
        self.errors.iter().any(|e| e.code() == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error[{}]: {e}", e.code())?;
        }
        for w in &self.warnings {
            writeln!(f, "warning[{}]: {w}", w.code())?;
        }
        Ok(())
    }
}

pub fn validate(spec: &GameSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_bids(spec, &mut report);
    check_branchings(spec, &mut report);
    check_agents(spec, &mut report);
    check_facts(spec, &mut report);
    check_rules(spec, &mut report);
    if spec.terminal_rules.is_empty() {
        report.warnings.push(ValidationWarning::NoTerminalRule);
    }
    report
}

fn check_bids(spec: &GameSpec, report: &mut ValidationReport) {
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    let bids = spec.switches.iter().map(|s| s.bid).chain(spec.chances.iter().map(|c| c.bid));
    for bid in bids {
        if !seen.insert(bid) && reported.insert(bid) {
            report.errors.push(ValidationError::DuplicateBid(bid));
        }
    }
    for c in &spec.chances {
        for &p in &c.distribution {
            if !(p > 0.0 && p < 1.0) {
                report.errors.push(ValidationError::ProbabilityOutOfRange { bid: c.bid, value: p });
            }
        }
        let sum: f64 = c.distribution.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            report.errors.push(ValidationError::DistributionSum { bid: c.bid, sum });
        }
    }
    for s in &spec.switches {
        if s.aliases.is_empty() {
            report.errors.push(ValidationError::EmptySwitch(s.bid));
        }
        let mut names = HashSet::new();
        for a in &s.aliases {
            if !names.insert(a) {
                report
                    .warnings
                    .push(ValidationWarning::DuplicateAlias { bid: s.bid, alias: a.clone() });
            }
        }
    }
}

fn check_branchings(spec: &GameSpec, report: &mut ValidationReport) {
    let op_heads: HashSet<(String, usize)> = spec
        .operation_rules
        .iter()
        .filter_map(|r| r.head.args().first().and_then(|op| op.indicator()))
        .map(|(n, a)| (n.to_string(), a))
        .collect();
    let mut missing = HashSet::new();
    for b in &spec.branchings {
        match b.bid {
            None => {
                if b.operators.len() != 1 {
                    report.errors.push(ValidationError::NilBranchingArity {
                        branching: b.decl_index,
                        operators: b.operators.len(),
                    });
                }
            }
            Some(bid) => {
                let expected = match (spec.switch(bid), spec.chance(bid)) {
                    (Some(s), _) => Some(s.aliases.len()),
                    (None, Some(c)) => Some(c.distribution.len()),
                    (None, None) => None,
                };
                match expected {
                    None => report
                        .errors
                        .push(ValidationError::UnknownBid { branching: b.decl_index, bid }),
                    Some(expected) if expected != b.operators.len() => {
                        report.errors.push(ValidationError::ArityMismatch {
                            branching: b.decl_index,
                            bid,
                            operators: b.operators.len(),
                            expected,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for op in &b.operators {
            if let Some((n, a)) = op.indicator() {
                if !op_heads.contains(&(n.to_string(), a)) && missing.insert(op.to_string()) {
                    report.warnings.push(ValidationWarning::MissingOperationRule(op.to_string()));
                }
            }
        }
    }
}

fn check_agents(spec: &GameSpec, report: &mut ValidationReport) {
    if spec.agents.is_empty() {
        report.errors.push(ValidationError::NoAgents);
    }
    for s in &spec.switches {
        if !spec.is_agent(&s.owner) {
            report
                .errors
                .push(ValidationError::UnknownOwner { bid: s.bid, owner: s.owner.clone() });
        }
    }
    let mut initialized = HashSet::new();
    for f in &spec.init_facts {
        if let Some(("does", 2)) = f.indicator() {
            let valid = match (&f.args()[0], f.args()[1].alias_text()) {
                (Term::Int(bid), Some(alias)) => spec
                    .switch(*bid)
                    .is_some_and(|s| s.aliases.contains(&alias)),
                _ => false,
            };
            if valid {
                if let Term::Int(bid) = f.args()[0] {
                    initialized.insert(bid);
                }
            } else {
                report.errors.push(ValidationError::InvalidDoesInit(f.to_string()));
            }
        }
        if let Some(("account", 2)) = f.indicator() {
            if !f.args()[1].is_number() {
                report.errors.push(ValidationError::NonGroundInit(f.to_string()));
            }
        }
    }
    for s in &spec.switches {
        if !initialized.contains(&s.bid) {
            report.warnings.push(ValidationWarning::MissingDoesInit(s.bid));
        }
    }
}

fn check_facts(spec: &GameSpec, report: &mut ValidationReport) {
    for pred in spec.fact_decls.keys() {
        if RESERVED.contains(&pred.as_str()) {
            report.errors.push(ValidationError::ReservedPredicate(pred.clone()));
        }
    }
    let mut uses: Vec<&Term> = Vec::new();
    for f in &spec.init_facts {
        if !f.is_ground() {
            report.errors.push(ValidationError::NonGroundInit(f.to_string()));
        }
        if !matches!(f.indicator(), Some(("account", 2)) | Some(("does", 2))) {
            uses.push(f);
        }
    }
    for r in &spec.hidden_rules {
        if let Some(f) = r.head.args().first() {
            uses.push(f);
        }
    }
    let all_rules = spec.hidden_rules.iter().chain(&spec.operation_rules).chain(&spec.terminal_rules);
    for r in all_rules {
        for lit in &r.body {
            if let Some(t) = lit.fact_term() {
                // Calls to built-in rules are not fact uses.
                if !matches!(t.indicator(), Some(("hidden", 2)) | Some(("request", 2)) | Some(("terminal", 0))) {
                    uses.push(t);
                }
            }
        }
    }
    let mut reported_arity = HashSet::new();
    let mut reported_undeclared = HashSet::new();
    let declared: HashMap<&str, usize> =
        spec.fact_decls.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    for t in uses {
        let Some((name, arity)) = t.indicator() else { continue };
        match declared.get(name) {
            Some(&d) if d != arity => {
                if reported_arity.insert((name.to_string(), arity)) {
                    report.errors.push(ValidationError::FactArity {
                        predicate: name.to_string(),
                        declared: d,
                        used: arity,
                    });
                }
            }
            Some(_) => {}
            None => {
                let key = format!("{name}/{arity}");
                if reported_undeclared.insert(key.clone()) {
                    report.warnings.push(ValidationWarning::UndeclaredPredicate(key));
                }
            }
        }
    }
}

fn check_rules(spec: &GameSpec, report: &mut ValidationReport) {
    for r in spec.hidden_rules.iter().chain(&spec.terminal_rules) {
        if r.body.iter().any(Literal::is_effect) {
            report
                .errors
                .push(ValidationError::EffectOutsideOperation(crate::printer::rule_to_string(r)));
        }
    }
}
