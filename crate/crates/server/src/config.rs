use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Server settings, usually read from a JSON file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub port: u16,
    pub chronon_ms: u64,
    pub seed: u64,
    /// How long to wait for players before filling seats with bots.
    pub lobby_timeout_ms: u64,
    /// Policy spec (`kind[:script]`) per agent, used for seats nobody claims.
    pub bots: BTreeMap<String, String>,
    pub record_path: Option<PathBuf>,
    /// When set, every join must present one of these tokens. Each token
    /// claims at most one seat.
    pub tokens: Option<Vec<String>>,
    /// Stop after this many chronons even if the game has not ended.
    pub max_chronons: Option<u64>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            port: 7878,
            chronon_ms: 1000,
            seed: 0,
            lobby_timeout_ms: 60_000,
            bots: BTreeMap::new(),
            record_path: None,
            tokens: None,
            max_chronons: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

impl ServerConfig {
    pub fn from_file(path: &Path) -> Result<ServerConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c: ServerConfig = serde_json::from_str(r#"{"port": 9000, "bots": {"bob": "random"}}"#).unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.lobby_timeout_ms, 60_000);
        assert_eq!(c.bots["bob"], "random");
        assert!(serde_json::from_str::<ServerConfig>(r#"{"prot": 9000}"#).is_err());
    }
}
