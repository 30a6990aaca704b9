//! Per-game mutable state and its chronon-boundary transitions.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use thiserror::Error;

use crate::logic::{evaluate_term, EffectSet, FactDb};
use crate::spec::{Bid, GameSpec};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error("switch {0} has no init(does({0}, Alias))")]
    MissingDoesInit(Bid),
    #[error("no agents: the game needs at least one init(account(Agent, Balance))")]
    MissingAccount,
    #[error("invalid init fact `{0}`")]
    InvalidInit(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommitError {
    #[error("payoff to `{0}`, which has no account")]
    UnknownAgent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub facts: FactDb,
    /// Balances in agent declaration order.
    pub accounts: IndexMap<String, f64>,
    /// Current alias of every switch.
    pub does: BTreeMap<Bid, String>,
    /// Facts staged by `next`, merged at the chronon boundary.
    pub pending_next: FactDb,
    pub chronon: u64,
}

impl GameState {
    /// Builds the initial state from a validated spec.
    pub fn init(spec: &GameSpec) -> Result<GameState, InitError> {
        if spec.agents.is_empty() {
            return Err(InitError::MissingAccount);
        }
        let mut accounts: IndexMap<String, f64> =
            spec.agents.iter().map(|a| (a.clone(), 0.0)).collect();
        let mut does = BTreeMap::new();
        let mut facts = FactDb::new();
        for init in &spec.init_facts {
            let bad = || InitError::InvalidInit(init.to_string());
            let fact = evaluate_term(init).map_err(|_| bad())?;
            if !fact.is_ground() {
                return Err(bad());
            }
            match fact.indicator() {
                Some(("account", 2)) => {
                    let agent = fact.args()[0].as_atom().ok_or_else(bad)?;
                    let balance = match fact.args()[1] {
                        Term::Int(i) => i as f64,
                        Term::Real(r) => r,
                        _ => return Err(bad()),
                    };
                    accounts.insert(agent.to_string(), balance);
                }
                Some(("does", 2)) => {
                    let Term::Int(bid) = fact.args()[0] else { return Err(bad()) };
                    let alias = fact.args()[1].alias_text().ok_or_else(bad)?;
                    let switch = spec.switch(bid).ok_or_else(bad)?;
                    if !switch.aliases.contains(&alias) {
                        return Err(bad());
                    }
                    does.insert(bid, alias);
                }
                _ => {
                    facts.insert(fact);
                }
            }
        }
        if let Some(s) = spec.switches.iter().find(|s| !does.contains_key(&s.bid)) {
            return Err(InitError::MissingDoesInit(s.bid));
        }
        Ok(GameState { facts, accounts, does, pending_next: FactDb::new(), chronon: 0 })
    }

    /// Applies one operation's effects: removals and payoffs take effect
    /// now, `next` facts wait for the chronon boundary. Nothing changes on
    /// error.
    pub fn commit(&mut self, effects: &EffectSet) -> Result<(), CommitError> {
        if let Some((agent, _)) = effects.payoffs.iter().find(|(a, _)| !self.accounts.contains_key(a)) {
            return Err(CommitError::UnknownAgent(agent.clone()));
        }
        for fact in &effects.removals {
            self.facts.remove(fact);
        }
        for fact in &effects.next_facts {
            self.pending_next.insert(fact.clone());
        }
        for (agent, amount) in &effects.payoffs {
            *self.accounts.get_mut(agent).expect("checked above") += amount;
        }
        Ok(())
    }

    /// Merges staged facts into the database and advances the clock.
    pub fn advance_chronon(&mut self) {
        for fact in std::mem::take(&mut self.pending_next).iter() {
            self.facts.insert(fact.clone());
        }
        self.chronon += 1;
    }

    /// Checks the switch and account invariants against `spec`.
    pub fn check_invariants(&self, spec: &GameSpec) -> Result<(), String> {
        if self.does.len() != spec.switches.len() {
            return Err(format!("{} switch positions for {} switches", self.does.len(), spec.switches.len()));
        }
        for s in &spec.switches {
            match self.does.get(&s.bid) {
                Some(alias) if s.aliases.contains(alias) => {}
                other => return Err(format!("switch {} holds {other:?}", s.bid)),
            }
        }
        if !self.accounts.keys().eq(spec.agents.iter()) {
            return Err("account keys differ from the agent set".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_sidl, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    const EXAMPLE: &str = "
        fact(state, 1).
        switch(1, alice, ['A', 'B', 'Wait']).
        init(account(alice, 0.0)).
        init(does(1, 'Wait')).
        init(state(0)).
    ";

    #[test]
    fn init_from_example() {
        let s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        assert_eq!(s.facts.iter().cloned().collect::<Vec<_>>(), vec![t("state(0)")]);
        assert_eq!(s.accounts, IndexMap::from([("alice".to_string(), 0.0)]));
        assert_eq!(s.does, BTreeMap::from([(1, "Wait".to_string())]));
        assert_eq!(s.chronon, 0);
    }

    #[test]
    fn duplicate_init_is_one_fact() {
        let s = GameState::init(&parse_sidl(&format!("{EXAMPLE} init(state(0)).")).unwrap()).unwrap();
        assert_eq!(s.facts.len(), 1);
    }

    #[test]
    fn missing_does_init() {
        let src = format!("{EXAMPLE} switch(2, alice, [x]).");
        assert_eq!(
            GameState::init(&parse_sidl(&src).unwrap()),
            Err(InitError::MissingDoesInit(2))
        );
    }

    #[test]
    fn missing_account() {
        let spec = parse_sidl("init(state(0)).").unwrap();
        assert_eq!(GameState::init(&spec), Err(InitError::MissingAccount));
    }

    #[test]
    fn commit_then_advance() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        s.facts = [t("state(1)")].into_iter().collect();
        let eff = EffectSet {
            removals: vec![t("state(1)")],
            next_facts: vec![t("state(10)")],
            payoffs: vec![("alice".into(), 2.0)],
        };
        s.commit(&eff).unwrap();
        assert!(s.facts.is_empty());
        assert_eq!(s.pending_next.iter().cloned().collect::<Vec<_>>(), vec![t("state(10)")]);
        assert_eq!(s.accounts["alice"], 2.0);
        s.advance_chronon();
        assert_eq!(s.facts.iter().cloned().collect::<Vec<_>>(), vec![t("state(10)")]);
        assert!(s.pending_next.is_empty());
        assert_eq!(s.chronon, 1);
    }

    #[test]
    fn empty_commit_is_identity() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        let before = s.clone();
        s.commit(&EffectSet::default()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn pending_next_is_deduplicated() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        let eff = EffectSet { next_facts: vec![t("state(10)")], ..Default::default() };
        s.commit(&eff).unwrap();
        s.commit(&eff).unwrap();
        assert_eq!(s.pending_next.len(), 1);
        s.advance_chronon();
        assert_eq!(s.facts.len(), 2);
    }

    #[test]
    fn advance_with_nothing_pending() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        let facts = s.facts.clone();
        s.advance_chronon();
        assert_eq!(s.facts, facts);
        assert_eq!(s.chronon, 1);
    }

    #[test]
    fn countdown_step() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        s.facts = [t("countdown(30)")].into_iter().collect();
        let eff = EffectSet {
            removals: vec![t("countdown(30)")],
            next_facts: vec![t("countdown(29)")],
            ..Default::default()
        };
        s.commit(&eff).unwrap();
        s.advance_chronon();
        assert_eq!(s.facts.iter().cloned().collect::<Vec<_>>(), vec![t("countdown(29)")]);
    }

    #[test]
    fn payoff_to_unknown_agent_changes_nothing() {
        let mut s = GameState::init(&parse_sidl(EXAMPLE).unwrap()).unwrap();
        let before = s.clone();
        let eff = EffectSet {
            removals: vec![t("state(0)")],
            payoffs: vec![("mallory".into(), 1.0)],
            ..Default::default()
        };
        assert_eq!(s.commit(&eff), Err(CommitError::UnknownAgent("mallory".into())));
        assert_eq!(s, before);
    }
}
