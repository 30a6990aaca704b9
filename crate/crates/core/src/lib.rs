//! SIDL: a logic-based language for strategic interactions, and the engine
//! that runs them in discrete chronons.

pub mod chance;
pub mod engine;
pub mod logic;
pub mod parser;
pub mod policy;
pub mod printer;
pub mod record;
pub mod session;
pub mod spec;
pub mod state;
pub mod term;
pub mod validate;

pub use chance::{ChanceSource, ScriptedChance, SeededChance};
pub use engine::{Command, CommandError, Engine, LoadError, StepResult, VisibleView};
pub use parser::{parse_sidl, parse_term, ParseError, ParseErrorKind};
pub use policy::{Policy, PolicyRegistry};
pub use printer::print_spec;
pub use record::{RecordEntry, Recorder};
pub use session::{replay, run_headless, RunOptions, RunOutcome, Session, StopReason};
pub use spec::{Bid, GameSpec};
pub use state::GameState;
pub use term::Term;
pub use validate::{validate, ValidationReport};
