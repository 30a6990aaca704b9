//! The game management agent: serves one SIDL game to networked players.
//!
//! Players connect over TCP and speak either newline-delimited JSON or
//! WebSocket on the same port. After a lobby phase the server runs
//! wall-clock chronon windows, applies commands as they arrive, and sends
//! every player its filtered view after each chronon.

pub mod config;
mod game;
pub mod protocol;
pub mod transport;

pub use config::{ConfigError, ServerConfig};
pub use game::{GameReport, Server, ServerError};
pub use protocol::{ClientMessage, RejectCode, ServerMessage};
