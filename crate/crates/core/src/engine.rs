//! One chronon at a time: commands, branchings, the boundary, terminal.

use std::ops::ControlFlow;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chance::ChanceSource;
use crate::logic::{prove_operation, solve_each, EffectSet, Program};
use crate::parser::{parse_sidl, ParseError};
use crate::spec::{Bid, BidTarget, BranchingDecl, GameSpec, Literal};
use crate::state::{GameState, InitError};
use crate::term::Term;
use crate::validate::{validate, ValidationReport};

/// A request to move one switch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    pub agent: String,
    pub bid: Bid,
    pub alias: String,
}

impl Command {
    pub fn new(agent: impl Into<String>, bid: Bid, alias: impl Into<String>) -> Command {
        Command { agent: agent.into(), bid, alias: alias.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("switch {bid} belongs to {owner}")]
    NotOwner { bid: Bid, owner: String },
    #[error("no switch or chance with BID {0}")]
    UnknownBid(Bid),
    #[error("switch {bid} has no alias `{alias}`")]
    UnknownAlias { bid: Bid, alias: String },
    #[error("BID {0} is a chance, not a switch")]
    ChanceBid(Bid),
    #[error("the game is over")]
    GameOver,
}

impl CommandError {
    pub fn code(&self) -> &'static str {
        match self {
            CommandError::NotOwner { .. } => "NotYourSwitch",
            CommandError::UnknownBid(_) => "UnknownBid",
            CommandError::UnknownAlias { .. } => "UnknownAlias",
            CommandError::ChanceBid(_) => "ChanceBid",
            CommandError::GameOver => "GameOver",
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid game description:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Executed {
    pub branching: usize,
    pub operator: Term,
    pub effects: EffectSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    /// No operator position for the switch alias or chance sample.
    NoOperator,
    /// The operation's preconditions did not hold.
    Failed,
    /// Proving the operation raised an error.
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub branching: usize,
    pub operator: Option<Term>,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepResult {
    pub executed: Vec<Executed>,
    pub skipped: Vec<Skipped>,
    /// `(branching, index)` for every chance sample drawn.
    pub samples: Vec<(usize, usize)>,
    pub terminal: bool,
}

/// What one agent is allowed to see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleView {
    pub agent: String,
    pub facts: Vec<Term>,
    pub accounts: IndexMap<String, f64>,
    pub chronon: u64,
    pub terminal: bool,
}

/// A validated game description ready to run.
#[derive(Debug)]
pub struct Engine {
    source: String,
    spec: GameSpec,
    program: Program,
}

impl Engine {
    /// Parses and validates `source`. Warnings are allowed, errors are not.
    pub fn load(source: &str) -> Result<Arc<Engine>, LoadError> {
        let spec = parse_sidl(source)?;
        let report = validate(&spec);
        if !report.is_ok() {
            return Err(LoadError::Invalid(report));
        }
        Ok(Arc::new(Engine::from_spec(source, spec)))
    }

    /// Wraps an already validated spec.
    pub fn from_spec(source: &str, spec: GameSpec) -> Engine {
        let program = Program::from_spec(&spec);
        Engine { source: source.to_string(), spec, program }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn init_game(&self) -> Result<GameState, InitError> {
        GameState::init(&self.spec)
    }

    /// Moves a switch. Any declared alias is legal for the owner.
    pub fn apply_command(&self, state: &mut GameState, cmd: &Command) -> Result<(), CommandError> {
        let switch = match self.spec.target(cmd.bid) {
            Some(BidTarget::Switch(s)) => s,
            Some(BidTarget::Chance(_)) => return Err(CommandError::ChanceBid(cmd.bid)),
            None => return Err(CommandError::UnknownBid(cmd.bid)),
        };
        if switch.owner != cmd.agent {
            return Err(CommandError::NotOwner { bid: cmd.bid, owner: switch.owner.clone() });
        }
        if !switch.aliases.contains(&cmd.alias) {
            return Err(CommandError::UnknownAlias { bid: cmd.bid, alias: cmd.alias.clone() });
        }
        state.does.insert(cmd.bid, cmd.alias.clone());
        Ok(())
    }

    fn candidate(
        &self,
        b: &BranchingDecl,
        state: &GameState,
        chance: &mut dyn ChanceSource,
        samples: &mut Vec<(usize, usize)>,
    ) -> Option<Term> {
        let index = match b.bid {
            None => 0,
            Some(bid) => match self.spec.target(bid)? {
                BidTarget::Switch(s) => {
                    let alias = state.does.get(&bid)?;
                    s.aliases.iter().position(|a| a == alias)?
                }
                BidTarget::Chance(c) => {
                    let i = chance.sample(&c.distribution);
                    samples.push((b.decl_index, i));
                    i
                }
            },
        };
        b.operators.get(index).cloned()
    }

    /// Runs every branching in declaration order, then crosses the chronon
    /// boundary. Failed or erroring operations are skipped, never fatal.
    pub fn step_chronon(&self, state: &mut GameState, chance: &mut dyn ChanceSource) -> StepResult {
        let mut result = StepResult::default();
        for b in &self.spec.branchings {
            let Some(op) = self.candidate(b, state, chance, &mut result.samples) else {
                result.skipped.push(Skipped { branching: b.decl_index, operator: None, reason: SkipReason::NoOperator });
                continue;
            };
            let reason = match prove_operation(&op, &state.facts, &self.program) {
                Ok(Some(effects)) => match state.commit(&effects) {
                    Ok(()) => {
                        result.executed.push(Executed { branching: b.decl_index, operator: op, effects });
                        continue;
                    }
                    Err(e) => SkipReason::Error(e.to_string()),
                },
                Ok(None) => SkipReason::Failed,
                Err(e) => SkipReason::Error(e.to_string()),
            };
            result.skipped.push(Skipped { branching: b.decl_index, operator: Some(op), reason });
        }
        state.advance_chronon();
        result.terminal = self.is_terminal(state);
        result
    }

    /// True iff some terminal rule holds. Errors count as not terminal.
    pub fn is_terminal(&self, state: &GameState) -> bool {
        if self.spec.terminal_rules.is_empty() {
            return false;
        }
        let mut found = false;
        let goal = [Literal::Goal(Term::atom("terminal"))];
        let _ = solve_each(&goal, &state.facts, &self.program, &mut |_| {
            found = true;
            ControlFlow::Break(())
        });
        found
    }

    /// Agents barred from seeing `fact`: the union over all solutions of
    /// `hidden(fact, H)`. If the hidden rules error, every agent is barred.
    pub fn hidden_for(&self, state: &GameState, fact: &Term) -> Vec<String> {
        let mut barred: Vec<String> = Vec::new();
        let mut everyone = false;
        let goal = [Literal::Goal(Term::compound("hidden", vec![fact.clone(), Term::var("H")]))];
        let outcome = solve_each(&goal, &state.facts, &self.program, &mut |b| {
            match b.get("H") {
                Some(Term::List(items)) => {
                    for item in items {
                        match item.alias_text() {
                            Some(a) if !barred.contains(&a) => barred.push(a),
                            Some(_) => {}
                            None => everyone = true,
                        }
                    }
                }
                _ => everyone = true,
            }
            ControlFlow::Continue(())
        });
        if outcome.is_err() || everyone {
            return self.spec.agents.clone();
        }
        barred.sort_by_key(|a| self.spec.agents.iter().position(|x| x == a).unwrap_or(usize::MAX));
        barred
    }

    /// Every fact with the agents it is hidden from.
    pub fn annotated_facts(&self, state: &GameState) -> Vec<(Term, Vec<String>)> {
        state.facts.iter().map(|f| (f.clone(), self.hidden_for(state, f))).collect()
    }

    pub fn visible_view(&self, state: &GameState, agent: &str) -> VisibleView {
        let facts = state
            .facts
            .iter()
            .filter(|f| !self.hidden_for(state, f).iter().any(|a| a == agent))
            .cloned()
            .collect();
        VisibleView {
            agent: agent.to_string(),
            facts,
            accounts: state.accounts.clone(),
            chronon: state.chronon,
            terminal: self.is_terminal(state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chance::ScriptedChance;
    use crate::parser::parse_term;

    const EXAMPLE: &str = include_str!("../../../games/example1.sidl");

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn facts(s: &GameState) -> Vec<String> {
        s.facts.iter().map(|f| f.to_string()).collect()
    }

    #[test]
    fn commands() {
        let e = Engine::load(EXAMPLE).unwrap();
        let mut s = e.init_game().unwrap();
        e.apply_command(&mut s, &Command::new("alice", 1, "A")).unwrap();
        assert_eq!(s.does[&1], "A");
        assert_eq!(
            e.apply_command(&mut s, &Command::new("bob", 1, "B")),
            Err(CommandError::NotOwner { bid: 1, owner: "alice".into() })
        );
        assert!(matches!(
            e.apply_command(&mut s, &Command::new("alice", 1, "Z")),
            Err(CommandError::UnknownAlias { .. })
        ));
        assert_eq!(e.apply_command(&mut s, &Command::new("alice", 0, "A")), Err(CommandError::ChanceBid(0)));
        assert_eq!(e.apply_command(&mut s, &Command::new("alice", 9, "A")), Err(CommandError::UnknownBid(9)));
        assert_eq!(s.does[&1], "A");
    }

    #[test]
    fn example_trace() {
        let e = Engine::load(EXAMPLE).unwrap();
        let mut s = e.init_game().unwrap();
        let mut chance = ScriptedChance::new([0]);

        let r0 = e.step_chronon(&mut s, &mut chance);
        assert_eq!(r0.executed.len(), 1);
        assert_eq!(r0.executed[0].operator, t("nat(1)"));
        assert_eq!(r0.samples, vec![(0, 0)]);
        assert_eq!(facts(&s), ["state(1)"]);
        assert_eq!(s.accounts["alice"], 0.0);
        assert!(!r0.terminal);

        e.apply_command(&mut s, &Command::new("alice", 1, "A")).unwrap();
        let r1 = e.step_chronon(&mut s, &mut chance);
        assert_eq!(r1.samples.len(), 1, "the chance branching draws even when its operation fails");
        let ops: Vec<(usize, String)> =
            r1.executed.iter().map(|x| (x.branching, x.operator.to_string())).collect();
        assert_eq!(ops, vec![(1, "a(1)".to_string())]);
        assert_eq!(facts(&s), ["state(10)"]);
        assert_eq!(s.accounts["alice"], 2.0);
        assert!(r1.terminal);
        assert_eq!(s.chronon, 2);
    }

    #[test]
    fn terminal_queries() {
        let e = Engine::load(EXAMPLE).unwrap();
        let mut s = e.init_game().unwrap();
        assert!(!e.is_terminal(&s));
        s.facts = [t("state(10)")].into_iter().collect();
        assert!(e.is_terminal(&s));

        let no_terminal = Engine::load("init(account(a, 0)).").unwrap();
        assert!(!no_terminal.is_terminal(&no_terminal.init_game().unwrap()));
    }

    #[test]
    fn hidden_state_is_filtered() {
        let e = Engine::load(EXAMPLE).unwrap();
        let mut s = e.init_game().unwrap();
        s.facts = [t("state(1)")].into_iter().collect();
        assert_eq!(e.hidden_for(&s, &t("state(1)")), vec!["alice"]);
        let v = e.visible_view(&s, "alice");
        assert!(v.facts.is_empty());
        assert_eq!(v.accounts["alice"], 0.0);
        assert_eq!(e.visible_view(&s, "carol").facts, vec![t("state(1)")]);
    }

    #[test]
    fn failed_operation_changes_nothing() {
        let e = Engine::load(EXAMPLE).unwrap();
        let mut s = e.init_game().unwrap();
        s.facts = [t("state(5)")].into_iter().collect();
        let before = s.clone();
        let r = e.step_chronon(&mut s, &mut ScriptedChance::new([1]));
        assert!(r.executed.is_empty());
        assert_eq!(s.facts, before.facts);
        assert_eq!(s.accounts, before.accounts);
        assert_eq!(s.does, before.does);
    }
}
