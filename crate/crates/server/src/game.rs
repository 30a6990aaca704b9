use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use indexmap::IndexMap;
use sidl_core::engine::Command;
use sidl_core::policy::Policy;
use sidl_core::session::{collect_commands, SessionError};
use sidl_core::{Engine, GameState, PolicyRegistry, Recorder, Session, StopReason};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tokio::time::{sleep_until, Instant};

use crate::config::ServerConfig;
use crate::protocol::{ack, ClientMessage, RejectCode, ServerMessage};
use crate::transport::{self, ConnId, Event};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("port {port} is unavailable: {source}")]
    PortUnavailable { port: u16, source: std::io::Error },
    #[error("bad bot configuration: {0}")]
    Bots(String),
    #[error("cannot create record file: {0}")]
    RecordFile(std::io::Error),
    #[error("lobby timed out with no player or bot for: {}", .0.join(", "))]
    LobbyTimeout(Vec<String>),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// How a served game ended.
#[derive(Debug)]
pub struct GameReport {
    pub stop: StopReason,
    pub state: GameState,
    /// The complete record, as also written to `record_path`.
    pub record: Vec<u8>,
}

enum Seat {
    Open,
    Human(ConnId),
    Bot(Box<dyn Policy>),
}

struct Conn {
    outbound: mpsc::UnboundedSender<ServerMessage>,
    agent: Option<String>,
}

/// A bound, not yet running game server.
pub struct Server {
    listener: TcpListener,
    engine: Arc<Engine>,
    config: ServerConfig,
}

impl Server {
    pub async fn bind(engine: Arc<Engine>, config: ServerConfig) -> Result<Server, ServerError> {
        let listener = TcpListener::bind(("0.0.0.0", config.port))
            .await
            .map_err(|source| ServerError::PortUnavailable { port: config.port, source })?;
        Ok(Server { listener, engine, config })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    /// Runs the lobby and then the game until it ends.
    pub async fn run(self) -> Result<GameReport, ServerError> {
        let Server { listener, engine, config } = self;
        let registry = PolicyRegistry::default();
        for (agent, policy) in &config.bots {
            let index = engine
                .spec()
                .agents
                .iter()
                .position(|a| a == agent)
                .ok_or_else(|| ServerError::Bots(format!("`{agent}` is not an agent of this game")))?;
            registry.create(policy, agent, index, config.seed).map_err(|e| ServerError::Bots(e.to_string()))?;
        }
        let recorder = match &config.record_path {
            Some(path) => Recorder::to_writer(BufWriter::new(File::create(path).map_err(ServerError::RecordFile)?)),
            None => Recorder::in_memory(),
        };

        let (events_tx, events) = mpsc::unbounded_channel();
        let acceptor = tokio::spawn(async move {
            let mut next_id: ConnId = 0;
            loop {
                match listener.accept().await {
                    Ok((stream, peer)) => {
                        tracing::debug!(id = next_id, %peer, "connection accepted");
                        tokio::spawn(transport::handle(stream, next_id, events_tx.clone()));
                        next_id += 1;
                    }
                    Err(e) => tracing::warn!("accept failed: {e}"),
                }
            }
        });

        let mut game = Game {
            seats: engine.spec().agents.iter().map(|a| (a.clone(), Seat::Open)).collect(),
            engine,
            config,
            registry,
            conns: HashMap::new(),
            used_tokens: Vec::new(),
            session: None,
            events,
        };
        let result = game.play(recorder).await;
        acceptor.abort();
        // Dropping the outbound senders first lets writers drain and close.
        game.conns.clear();
        result
    }
}

struct Game {
    engine: Arc<Engine>,
    config: ServerConfig,
    registry: PolicyRegistry,
    seats: IndexMap<String, Seat>,
    conns: HashMap<ConnId, Conn>,
    used_tokens: Vec<String>,
    session: Option<Session>,
    events: mpsc::UnboundedReceiver<Event>,
}

impl Game {
    async fn play(&mut self, recorder: Recorder) -> Result<GameReport, ServerError> {
        self.lobby().await?;
        let session = Session::start(Arc::clone(&self.engine), self.config.seed, self.config.chronon_ms, recorder)?;
        self.session = Some(session);
        tracing::info!("game started");
        self.send_views();

        let window = Duration::from_millis(self.config.chronon_ms);
        let max = self.config.max_chronons.unwrap_or(u64::MAX);
        while !self.session().is_over() && self.session().state().chronon < max {
            let deadline = Instant::now() + window;
            self.bot_commands();
            loop {
                tokio::select! {
                    // A message arriving as the window closes goes to the next one.
                    biased;
                    _ = sleep_until(deadline) => break,
                    Some(event) = self.events.recv() => self.handle(event),
                }
            }
            let (_, entry) = self.session.as_mut().expect("game running").tick()?;
            tracing::debug!(chronon = entry.chronon, executed = entry.executed.len(), "chronon done");
            self.send_views();
        }

        let stop = if self.session().is_over() { StopReason::Terminal } else { StopReason::MaxChrononsExceeded };
        let accounts = self.session().state().accounts.clone();
        self.broadcast(ServerMessage::GameOver { accounts });
        tracing::info!(?stop, "game over");

        // Late messages still get an answer for one more window.
        let linger = Instant::now() + window;
        loop {
            tokio::select! {
                biased;
                _ = sleep_until(linger) => break,
                Some(event) = self.events.recv() => self.handle(event),
            }
        }
        let (state, mut recorder) = self.session.take().expect("game ran").into_parts();
        recorder.flush().map_err(SessionError::from)?;
        Ok(GameReport { stop, state, record: recorder.bytes().to_vec() })
    }

    fn session(&self) -> &Session {
        self.session.as_ref().expect("game running")
    }

    fn game_over(&self) -> bool {
        self.session.as_ref().is_some_and(|s| s.is_over())
            || self.session.as_ref().is_some_and(|s| s.state().chronon >= self.config.max_chronons.unwrap_or(u64::MAX))
    }

    async fn lobby(&mut self) -> Result<(), ServerError> {
        let deadline = Instant::now() + Duration::from_millis(self.config.lobby_timeout_ms);
        while self.seats.values().any(|s| matches!(s, Seat::Open)) {
            tokio::select! {
                biased;
                _ = sleep_until(deadline) => return self.fill_with_bots(),
                Some(event) = self.events.recv() => self.handle(event),
            }
        }
        Ok(())
    }

    fn fill_with_bots(&mut self) -> Result<(), ServerError> {
        let missing: Vec<String> = self
            .seats
            .iter()
            .filter(|(a, s)| matches!(s, Seat::Open) && !self.config.bots.contains_key(*a))
            .map(|(a, _)| a.clone())
            .collect();
        if !missing.is_empty() {
            self.broadcast(ServerMessage::reject(RejectCode::LobbyTimeout, format!("no player for {}", missing.join(", "))));
            return Err(ServerError::LobbyTimeout(missing));
        }
        for (index, (agent, seat)) in self.seats.iter_mut().enumerate() {
            if matches!(seat, Seat::Open) {
                let policy = self
                    .registry
                    .create(&self.config.bots[agent], agent, index, self.config.seed)
                    .map_err(|e| ServerError::Bots(e.to_string()))?;
                tracing::info!(%agent, policy = policy.name(), "seat filled by bot");
                *seat = Seat::Bot(policy);
            }
        }
        Ok(())
    }

    fn bot_commands(&mut self) {
        let mut bots: Vec<(String, Box<dyn Policy>)> = Vec::new();
        for (agent, seat) in self.seats.iter_mut() {
            if let Seat::Bot(_) = seat {
                let Seat::Bot(p) = std::mem::replace(seat, Seat::Open) else { unreachable!() };
                bots.push((agent.clone(), p));
            }
        }
        let session = self.session.as_mut().expect("game running");
        for cmd in collect_commands(session, &mut bots) {
            let _ = session.submit(&cmd);
        }
        for (agent, p) in bots {
            self.seats[&agent] = Seat::Bot(p);
        }
    }

    fn send(&self, id: ConnId, msg: ServerMessage) {
        if let Some(c) = self.conns.get(&id) {
            let _ = c.outbound.send(msg);
        }
    }

    fn broadcast(&self, msg: ServerMessage) {
        for c in self.conns.values() {
            let _ = c.outbound.send(msg.clone());
        }
    }

    fn view_message(&self, agent: &str) -> ServerMessage {
        let v = self.session().view(agent);
        ServerMessage::View { chronon: v.chronon, facts: v.facts, accounts: v.accounts, terminal: v.terminal }
    }

    fn send_views(&self) {
        for (agent, seat) in &self.seats {
            if let Seat::Human(id) = seat {
                self.send(*id, self.view_message(agent));
            }
        }
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::Opened { id, framing, outbound } => {
                tracing::debug!(id, ?framing, "connection opened");
                self.conns.insert(id, Conn { outbound, agent: None });
            }
            Event::Closed { id } => {
                if let Some(agent) = self.conns.remove(&id).and_then(|c| c.agent) {
                    tracing::info!(%agent, "player left");
                    self.seats[&agent] = Seat::Open;
                }
            }
            Event::Message { id, message: Err(detail) } => {
                self.send(id, ServerMessage::reject(RejectCode::MalformedMessage, detail));
            }
            Event::Message { id, message: Ok(ClientMessage::Join { agent, token }) } => self.join(id, agent, token),
            Event::Message { id, message: Ok(ClientMessage::Command { bid, alias }) } => self.command(id, bid, alias),
        }
    }

    fn join(&mut self, id: ConnId, agent: String, token: Option<String>) {
        let reject = |code, detail: String| ServerMessage::reject(code, detail);
        if self.game_over() {
            return self.send(id, reject(RejectCode::GameOver, "the game is over".into()));
        }
        if let Some(current) = self.conns.get(&id).and_then(|c| c.agent.clone()) {
            return self.send(id, reject(RejectCode::AgentTaken, format!("this connection already plays {current}")));
        }
        let Some(seat) = self.seats.get(&agent) else {
            return self.send(id, reject(RejectCode::UnknownAgent, format!("`{agent}` is not an agent of this game")));
        };
        if !matches!(seat, Seat::Open) {
            return self.send(id, reject(RejectCode::AgentTaken, format!("{agent} is already taken")));
        }
        if let Some(tokens) = &self.config.tokens {
            match token {
                Some(t) if tokens.contains(&t) && !self.used_tokens.contains(&t) => self.used_tokens.push(t),
                _ => return self.send(id, reject(RejectCode::InvalidToken, "missing, unknown or used token".into())),
            }
        }
        self.seats[&agent] = Seat::Human(id);
        if let Some(c) = self.conns.get_mut(&id) {
            c.agent = Some(agent.clone());
        }
        tracing::info!(%agent, "player joined");
        let spec = self.engine.spec();
        self.send(
            id,
            ServerMessage::Welcome {
                agent: agent.clone(),
                source: self.engine.source().to_string(),
                switches: spec.switches_of(&agent).map(|s| s.bid).collect(),
                chronon_ms: self.config.chronon_ms,
            },
        );
        if self.session.is_some() {
            self.send(id, self.view_message(&agent));
        }
    }

    fn command(&mut self, id: ConnId, bid: i64, alias: String) {
        let nack = |chronon, code: &str| ServerMessage::CommandAck { chronon, accepted: false, error: Some(code.into()) };
        let Some(agent) = self.conns.get(&id).and_then(|c| c.agent.clone()) else {
            return self.send(id, nack(0, ack::NOT_JOINED));
        };
        let over = self.game_over();
        let Some(session) = self.session.as_mut() else {
            return self.send(id, nack(0, ack::NOT_STARTED));
        };
        let chronon = session.state().chronon;
        if over {
            return self.send(id, nack(chronon, ack::GAME_OVER));
        }
        let outcome = session.submit(&Command::new(agent, bid, alias));
        self.send(
            id,
            ServerMessage::CommandAck {
                chronon,
                accepted: outcome.is_ok(),
                error: outcome.err().map(|e| e.code().to_string()),
            },
        );
    }
}
