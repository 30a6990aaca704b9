//! Wire messages. Each message is one JSON object tagged by `"type"`: one
//! per line on a plain TCP stream, one per text frame over WebSocket.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sidl_core::{Bid, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Join {
        agent: String,
        #[serde(default)]
        token: Option<String>,
    },
    Command {
        bid: Bid,
        alias: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        agent: String,
        /// The full game description.
        source: String,
        /// BIDs of the switches this agent owns.
        switches: Vec<Bid>,
        chronon_ms: u64,
    },
    Reject {
        code: RejectCode,
        detail: String,
    },
    View {
        chronon: u64,
        facts: Vec<Term>,
        accounts: IndexMap<String, f64>,
        terminal: bool,
    },
    CommandAck {
        /// The chronon whose window the command landed in.
        chronon: u64,
        accepted: bool,
        error: Option<String>,
    },
    GameOver {
        accounts: IndexMap<String, f64>,
    },
}

/// Why a join or message was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectCode {
    UnknownAgent,
    AgentTaken,
    InvalidToken,
    GameOver,
    MalformedMessage,
    LobbyTimeout,
}

/// Error codes carried by a rejected `CommandAck`, beyond the engine's own.
pub mod ack {
    pub const NOT_JOINED: &str = "NotJoined";
    pub const NOT_STARTED: &str = "NotStarted";
    pub const GAME_OVER: &str = "GameOver";
}

impl ServerMessage {
    pub fn reject(code: RejectCode, detail: impl Into<String>) -> ServerMessage {
        ServerMessage::Reject { code, detail: detail.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

impl ClientMessage {
    pub fn parse(text: &str) -> Result<ClientMessage, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("client messages always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_messages() {
        assert_eq!(
            ClientMessage::parse(r#"{"type":"join","agent":"alice"}"#),
            Ok(ClientMessage::Join { agent: "alice".into(), token: None })
        );
        assert_eq!(
            ClientMessage::parse(r#"{"type":"command","bid":1,"alias":"A"}"#),
            Ok(ClientMessage::Command { bid: 1, alias: "A".into() })
        );
        assert!(ClientMessage::parse(r#"{"type":"command","bid":"1","alias":"A"}"#).is_err());
        assert!(ClientMessage::parse(r#"{"type":"join","agent":"a","extra":1}"#).is_err());
        assert!(ClientMessage::parse("join alice").is_err());
    }

    #[test]
    fn server_messages() {
        let view = ServerMessage::View {
            chronon: 2,
            facts: vec![sidl_core::parse_term("thrown(alice, 8)").unwrap()],
            accounts: IndexMap::from([("alice".to_string(), 0.0), ("bob".to_string(), 1.0)]),
            terminal: true,
        };
        assert_eq!(
            view.to_json(),
            r#"{"type":"view","chronon":2,"facts":["thrown(alice, 8)"],"accounts":{"alice":0.0,"bob":1.0},"terminal":true}"#
        );
        let ack = ServerMessage::CommandAck { chronon: 0, accepted: false, error: Some("NotYourSwitch".into()) };
        assert_eq!(ack.to_json(), r#"{"type":"command_ack","chronon":0,"accepted":false,"error":"NotYourSwitch"}"#);
        let reject = ServerMessage::reject(RejectCode::AgentTaken, "bob is taken");
        assert_eq!(reject.to_json(), r#"{"type":"reject","code":"AgentTaken","detail":"bob is taken"}"#);
        let back: ServerMessage = serde_json::from_str(&view.to_json()).unwrap();
        assert_eq!(back, view);
    }
}
