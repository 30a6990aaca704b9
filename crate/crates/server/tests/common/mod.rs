#![allow(dead_code)]

use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use ggma_server::{ClientMessage, GameReport, Server, ServerConfig, ServerError, ServerMessage};
use sidl_core::Engine;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;

pub const EXAMPLE: &str = include_str!("../../../../games/example1.sidl");
pub const PICO: &str = include_str!("../../../../games/pico_turn.sidl");

pub const WAIT: Duration = Duration::from_secs(10);

pub async fn start(src: &str, config: ServerConfig) -> (SocketAddr, JoinHandle<Result<GameReport, ServerError>>) {
    let engine = Engine::load(src).unwrap();
    let server = Server::bind(engine, ServerConfig { port: 0, ..config }).await.unwrap();
    let addr = server.local_addr();
    (addr, tokio::spawn(server.run()))
}

pub fn config(chronon_ms: u64) -> ServerConfig {
    ServerConfig { chronon_ms, lobby_timeout_ms: 10_000, ..ServerConfig::default() }
}

/// A newline-delimited JSON client that keeps every line it receives.
pub struct LineClient {
    reader: BufReader<OwnedReadHalf>,
    writer: OwnedWriteHalf,
    pub captured: Vec<String>,
}

impl LineClient {
    pub async fn connect(addr: SocketAddr) -> LineClient {
        let stream = TcpStream::connect(("127.0.0.1", addr.port())).await.unwrap();
        let (r, w) = stream.into_split();
        LineClient { reader: BufReader::new(r), writer: w, captured: Vec::new() }
    }

    pub async fn send_raw(&mut self, line: &str) {
        self.writer.write_all(format!("{line}\n").as_bytes()).await.unwrap();
    }

    pub async fn send(&mut self, msg: ClientMessage) {
        self.send_raw(&msg.to_json()).await;
    }

    pub async fn join(&mut self, agent: &str) -> ServerMessage {
        self.send(ClientMessage::Join { agent: agent.into(), token: None }).await;
        self.recv().await
    }

    pub async fn command(&mut self, bid: i64, alias: &str) {
        self.send(ClientMessage::Command { bid, alias: alias.into() }).await;
    }

    /// Next message, or `None` once the server closes the connection.
    pub async fn try_recv(&mut self) -> Option<ServerMessage> {
        let mut line = String::new();
        let n = tokio::time::timeout(WAIT, self.reader.read_line(&mut line)).await.expect("server went quiet").unwrap();
        if n == 0 {
            return None;
        }
        self.captured.push(line.trim_end().to_string());
        Some(serde_json::from_str(&line).unwrap_or_else(|e| panic!("{line}: {e}")))
    }

    pub async fn recv(&mut self) -> ServerMessage {
        self.try_recv().await.expect("connection closed")
    }

    /// Reads until the server hangs up.
    pub async fn drain(&mut self) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        while let Some(m) = self.try_recv().await {
            out.push(m);
        }
        out
    }
}

pub struct WsClient {
    ws: tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<TcpStream>>,
}

impl WsClient {
    pub async fn connect(addr: SocketAddr) -> WsClient {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://127.0.0.1:{}/", addr.port())).await.unwrap();
        WsClient { ws }
    }

    pub async fn send(&mut self, msg: ClientMessage) {
        self.ws.send(Message::text(msg.to_json())).await.unwrap();
    }

    pub async fn send_frame(&mut self, frame: Message) {
        self.ws.send(frame).await.unwrap();
    }

    pub async fn try_recv(&mut self) -> Option<ServerMessage> {
        loop {
            match tokio::time::timeout(WAIT, self.ws.next()).await.expect("server went quiet") {
                Some(Ok(Message::Text(t))) => return Some(serde_json::from_str(t.as_str()).unwrap()),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
                Some(Ok(_)) => continue,
            }
        }
    }

    pub async fn recv(&mut self) -> ServerMessage {
        self.try_recv().await.expect("connection closed")
    }
}
