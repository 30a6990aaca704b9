//! A running game: engine, state, chance stream and record together.

use std::sync::Arc;

use thiserror::Error;

use crate::chance::SeededChance;
use crate::engine::{Command, CommandError, Engine, LoadError, StepResult, VisibleView};
use crate::policy::{Context, Policy};
use crate::record::{
    read_log, ChrononEntry, CommandEntry, ExecutedEntry, FactEntry, Header, RecordEntry, RecordError, Recorder,
};
use crate::state::{GameState, InitError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("the game is over")]
    GameOver,
}

pub struct Session {
    engine: Arc<Engine>,
    state: GameState,
    chance: SeededChance,
    recorder: Recorder,
    /// First recorder failure while logging commands; reported by `tick`.
    deferred: Option<RecordError>,
    over: bool,
}

impl Session {
    /// Initializes the game and writes the record header.
    pub fn start(engine: Arc<Engine>, seed: u64, chronon_ms: u64, mut recorder: Recorder) -> Result<Session, SessionError> {
        let state = engine.init_game()?;
        let header = Header::new(engine.source(), seed, engine.spec().agents.clone(), chronon_ms);
        recorder.record(&RecordEntry::Header(header))?;
        let over = engine.is_terminal(&state);
        Ok(Session { engine, state, chance: SeededChance::new(seed), recorder, deferred: None, over })
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn is_over(&self) -> bool {
        self.over
    }

    pub fn recorder(&self) -> &Recorder {
        &self.recorder
    }

    pub fn into_parts(self) -> (GameState, Recorder) {
        (self.state, self.recorder)
    }

    pub fn view(&self, agent: &str) -> VisibleView {
        self.engine.visible_view(&self.state, agent)
    }

    /// Applies a command in the current window. Commands after the end are
    /// rejected and not recorded.
    pub fn submit(&mut self, cmd: &Command) -> Result<(), CommandError> {
        if self.over {
            return Err(CommandError::GameOver);
        }
        let outcome = self.engine.apply_command(&mut self.state, cmd);
        let entry = CommandEntry::new(self.state.chronon, cmd, &outcome);
        if let Err(e) = self.recorder.record(&RecordEntry::Command(entry)) {
            self.deferred.get_or_insert(e);
        }
        outcome
    }

    /// Closes the window: runs one chronon and records it.
    pub fn tick(&mut self) -> Result<(StepResult, ChrononEntry), SessionError> {
        if let Some(e) = self.deferred.take() {
            return Err(e.into());
        }
        if self.over {
            return Err(SessionError::GameOver);
        }
        let chronon = self.state.chronon;
        let step = self.engine.step_chronon(&mut self.state, &mut self.chance);
        let entry = ChrononEntry {
            chronon,
            executed: step.executed.iter().map(ExecutedEntry::from).collect(),
            facts: self
                .engine
                .annotated_facts(&self.state)
                .into_iter()
                .map(|(fact, hidden_for)| FactEntry { fact, hidden_for })
                .collect(),
            accounts: self.state.accounts.clone(),
            terminal: step.terminal,
        };
        self.recorder.record(&RecordEntry::Chronon(entry.clone()))?;
        self.over = step.terminal;
        Ok((step, entry))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Terminal,
    MaxChrononsExceeded,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub max_chronons: u64,
    /// Nominal chronon length written to the header.
    pub chronon_ms: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 0, max_chronons: 10_000, chronon_ms: 1000 }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub state: GameState,
    pub stop: StopReason,
    pub recorder: Recorder,
}

/// Asks each agent's policy for commands, in agent order.
pub fn collect_commands(session: &Session, policies: &mut [(String, Box<dyn Policy>)]) -> Vec<Command> {
    let spec = session.engine().spec();
    let mut out = Vec::new();
    for (agent, policy) in policies.iter_mut() {
        let view = session.view(agent);
        let ctx = Context {
            agent,
            chronon: session.state().chronon,
            switches: spec.switches_of(agent).collect(),
            view: &view,
        };
        out.extend(policy.decide(&ctx));
    }
    out
}

/// Plays a game with policies standing in for every agent.
pub fn run_headless(
    engine: Arc<Engine>,
    policies: &mut [(String, Box<dyn Policy>)],
    options: RunOptions,
    recorder: Recorder,
) -> Result<RunOutcome, SessionError> {
    let mut session = Session::start(engine, options.seed, options.chronon_ms, recorder)?;
    while !session.is_over() && session.state().chronon < options.max_chronons {
        for cmd in collect_commands(&session, policies) {
            let _ = session.submit(&cmd);
        }
        session.tick()?;
    }
    let stop = if session.is_over() { StopReason::Terminal } else { StopReason::MaxChrononsExceeded };
    let (state, mut recorder) = session.into_parts();
    recorder.flush()?;
    Ok(RunOutcome { state, stop, recorder })
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Malformed(#[from] RecordError),
    #[error("the recorded source does not match its spec_hash")]
    SpecMismatch,
    #[error("the recorded game does not load: {0}")]
    Load(#[from] LoadError),
    #[error("the recorded game does not start: {0}")]
    Init(#[from] InitError),
    #[error("replay diverges at chronon {chronon} in `{field}`")]
    Divergence { chronon: u64, field: String },
}

#[derive(Debug)]
pub struct ReplayOutcome {
    pub state: GameState,
    /// The record as re-written during replay.
    pub recorder: Recorder,
}

/// Re-runs a record and checks every logged outcome against a fresh run.
pub fn replay(text: &str) -> Result<ReplayOutcome, ReplayError> {
    let entries = read_log(text)?;
    let RecordEntry::Header(header) = &entries[0] else {
        unreachable!("read_log guarantees a leading header")
    };
    if crate::record::spec_hash(&header.source) != header.spec_hash {
        return Err(ReplayError::SpecMismatch);
    }
    let engine = Engine::load(&header.source)?;
    if engine.spec().agents != header.agents {
        return Err(ReplayError::Divergence { chronon: 0, field: "agents".into() });
    }
    let mut session = match Session::start(engine, header.seed, header.chronon_ms, Recorder::in_memory()) {
        Ok(s) => s,
        Err(SessionError::Init(e)) => return Err(e.into()),
        Err(SessionError::Record(e)) => return Err(e.into()),
        Err(SessionError::GameOver) => unreachable!("start never reports GameOver"),
    };
    let diverge = |chronon, field: &str| ReplayError::Divergence { chronon, field: field.to_string() };
    for entry in &entries[1..] {
        let chronon = session.state().chronon;
        match entry {
            RecordEntry::Header(_) => unreachable!("read_log rejects a second header"),
            RecordEntry::Command(c) => {
                if c.chronon != chronon {
                    return Err(diverge(chronon, "command.chronon"));
                }
                if session.is_over() {
                    return Err(diverge(chronon, "terminal"));
                }
                let outcome = session.submit(&Command::new(c.agent.clone(), c.bid, c.alias.clone()));
                let redone = CommandEntry::new(chronon, &Command::new(c.agent.clone(), c.bid, c.alias.clone()), &outcome);
                if redone.accepted != c.accepted {
                    return Err(diverge(chronon, "command.accepted"));
                }
                if redone.error != c.error {
                    return Err(diverge(chronon, "command.error"));
                }
            }
            RecordEntry::Chronon(logged) => {
                if session.is_over() {
                    return Err(diverge(chronon, "terminal"));
                }
                let (_, fresh) = session.tick().map_err(|e| match e {
                    SessionError::Record(e) => ReplayError::Malformed(e),
                    other => diverge(chronon, &other.to_string()),
                })?;
                if let Some(field) = logged.first_difference(&fresh) {
                    return Err(diverge(chronon, field));
                }
            }
        }
    }
    let (state, recorder) = session.into_parts();
    Ok(ReplayOutcome { state, recorder })
}
