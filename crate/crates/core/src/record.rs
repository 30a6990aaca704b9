//! Append-only game records in newline-delimited JSON (`.sidlrec`).
//!
//! Each line is one entry tagged by `"type"`. Field order is fixed by the
//! struct definitions below, terms are written in canonical text form and
//! reals in their shortest round-trip decimal form, so two runs that agree
//! bit for bit produce identical bytes.

use std::fmt;
use std::io::{self, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{CommandError, Executed};
use crate::term::Term;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RecordEntry {
    Header(Header),
    Command(CommandEntry),
    Chronon(ChrononEntry),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    /// Hex SHA-256 of `source`.
    pub spec_hash: String,
    pub seed: u64,
    pub agents: Vec<String>,
    pub chronon_ms: u64,
    pub source: String,
}

impl Header {
    pub fn new(source: &str, seed: u64, agents: Vec<String>, chronon_ms: u64) -> Header {
        Header { version: FORMAT_VERSION, spec_hash: spec_hash(source), seed, agents, chronon_ms, source: source.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEntry {
    /// The chronon whose window received the command.
    pub chronon: u64,
    pub agent: String,
    pub bid: i64,
    pub alias: String,
    pub accepted: bool,
    pub error: Option<String>,
}

impl CommandEntry {
    pub fn new(chronon: u64, cmd: &crate::engine::Command, outcome: &Result<(), CommandError>) -> CommandEntry {
        CommandEntry {
            chronon,
            agent: cmd.agent.clone(),
            bid: cmd.bid,
            alias: cmd.alias.clone(),
            accepted: outcome.is_ok(),
            error: outcome.as_ref().err().map(|e| e.code().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChrononEntry {
    /// Index of the chronon just executed, counting from 0.
    pub chronon: u64,
    pub executed: Vec<ExecutedEntry>,
    /// Facts after the boundary, with the agents each is hidden from.
    pub facts: Vec<FactEntry>,
    pub accounts: IndexMap<String, f64>,
    pub terminal: bool,
}

impl ChrononEntry {
    /// Name of the first field that differs, comparing serialized forms.
    pub fn first_difference(&self, other: &ChrononEntry) -> Option<&'static str> {
        fn differs<T: Serialize>(a: &T, b: &T) -> bool {
            serde_json::to_string(a).ok() != serde_json::to_string(b).ok()
        }
        if self.chronon != other.chronon {
            Some("chronon")
        } else if differs(&self.executed, &other.executed) {
            Some("executed")
        } else if differs(&self.facts, &other.facts) {
            Some("facts")
        } else if differs(&self.accounts, &other.accounts) {
            Some("accounts")
        } else if self.terminal != other.terminal {
            Some("terminal")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedEntry {
    pub branching: usize,
    pub operator: Term,
    pub removed: Vec<Term>,
    pub next: Vec<Term>,
    pub payoffs: Vec<PayoffEntry>,
}

impl From<&Executed> for ExecutedEntry {
    fn from(x: &Executed) -> Self {
        ExecutedEntry {
            branching: x.branching,
            operator: x.operator.clone(),
            removed: x.effects.removals.clone(),
            next: x.effects.next_facts.clone(),
            payoffs: x
                .effects
                .payoffs
                .iter()
                .map(|(agent, amount)| PayoffEntry { agent: agent.clone(), amount: *amount })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffEntry {
    pub agent: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactEntry {
    pub fact: Term,
    pub hidden_for: Vec<String>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("the header must be recorded first")]
    HeaderMissing,
    #[error("a record has exactly one header")]
    DuplicateHeader,
    #[error("chronon entry {found} out of order, expected {expected}")]
    OutOfOrder { expected: u64, found: u64 },
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

pub fn spec_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

/// One entry as a line of JSON, newline included.
pub fn encode_line(entry: &RecordEntry) -> String {
    let mut line = serde_json::to_string(entry).expect("record entries always serialize");
    line.push('\n');
    line
}

/// Tracks the ordering rules shared by the writer and the reader.
#[derive(Debug, Default, Clone)]
struct Order {
    header: bool,
    next_chronon: u64,
}

impl Order {
    fn check(&mut self, entry: &RecordEntry) -> Result<(), RecordError> {
        match entry {
            RecordEntry::Header(_) if self.header => return Err(RecordError::DuplicateHeader),
            RecordEntry::Header(_) => self.header = true,
            _ if !self.header => return Err(RecordError::HeaderMissing),
            RecordEntry::Chronon(c) => {
                if c.chronon != self.next_chronon {
                    return Err(RecordError::OutOfOrder { expected: self.next_chronon, found: c.chronon });
                }
                self.next_chronon += 1;
            }
            RecordEntry::Command(_) => {}
        }
        Ok(())
    }
}

/// Writes entries in order, keeping a copy of every byte written.
pub struct Recorder {
    out: Option<Box<dyn Write + Send>>,
    bytes: Vec<u8>,
    order: Order,
}

impl fmt::Debug for Recorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Recorder").field("bytes", &self.bytes.len()).finish_non_exhaustive()
    }
}

impl Recorder {
    pub fn in_memory() -> Recorder {
        Recorder { out: None, bytes: Vec::new(), order: Order::default() }
    }

    pub fn to_writer(out: impl Write + Send + 'static) -> Recorder {
        Recorder { out: Some(Box::new(out)), bytes: Vec::new(), order: Order::default() }
    }

    /// Appends `entry`; flushes after chronon entries.
    pub fn record(&mut self, entry: &RecordEntry) -> Result<(), RecordError> {
        self.order.check(entry)?;
        let line = encode_line(entry);
        self.bytes.extend_from_slice(line.as_bytes());
        if let Some(out) = self.out.as_mut() {
            out.write_all(line.as_bytes())?;
            if matches!(entry, RecordEntry::Chronon(_)) {
                out.flush()?;
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), RecordError> {
        if let Some(out) = self.out.as_mut() {
            out.flush()?;
        }
        Ok(())
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Parses and checks a whole record.
pub fn read_log(text: &str) -> Result<Vec<RecordEntry>, RecordError> {
    let mut order = Order::default();
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| RecordError::Malformed { line: i + 1, reason };
        let entry: RecordEntry = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        order.check(&entry).map_err(|e| malformed(e.to_string()))?;
        if let RecordEntry::Header(h) = &entry {
            if h.version != FORMAT_VERSION {
                return Err(malformed(format!("unsupported format version {}", h.version)));
            }
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(RecordError::Malformed { line: 0, reason: "empty record".into() });
    }
    Ok(entries)
}
