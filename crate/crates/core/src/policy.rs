//! Automated agents, looked up by name at runtime.
//!
//! A policy spec string is `kind` or `kind:script`, e.g. `random`, `idle`
//! or `fixed:Wait,A`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{Command, VisibleView};
use crate::spec::{GameSpec, SwitchDecl};

/// What a policy knows when it decides.
pub struct Context<'a> {
    pub agent: &'a str,
    pub chronon: u64,
    /// Switches owned by `agent`, in declaration order.
    pub switches: Vec<&'a SwitchDecl>,
    pub view: &'a VisibleView,
}

pub trait Policy: Send {
    fn name(&self) -> &str;
    /// Commands to submit in the current chronon window.
    fn decide(&mut self, ctx: &Context<'_>) -> Vec<Command>;
}

/// Everything a factory may use to build a policy.
#[derive(Debug, Clone)]
pub struct PolicyArgs {
    pub agent: String,
    /// Position of the agent in declaration order; selects the RNG stream.
    pub agent_index: usize,
    pub seed: u64,
    pub script: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("unknown policy `{0}` (known: {1})")]
    Unknown(String, String),
    #[error("policy `{0}` requires a script, as in `{0}:...`")]
    MissingScript(String),
    #[error("policy `{0}` takes no script")]
    UnexpectedScript(String),
    #[error("`{0}` is not of the form agent=kind[:script]")]
    BadAssignment(String),
}

type Factory = Box<dyn Fn(&PolicyArgs) -> Result<Box<dyn Policy>, PolicyError> + Send + Sync>;

pub struct PolicyRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.factories.keys()).finish()
    }
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        let mut r = PolicyRegistry::empty();
        r.register("idle", |args| {
            no_script("idle", args)?;
            Ok(Box::new(Idle))
        });
        r.register("random", |args| {
            no_script("random", args)?;
            Ok(Box::new(RandomPolicy::new(args.seed, args.agent_index)))
        });
        r.register("fixed", |args| {
            let script = args.script.as_deref().ok_or_else(|| PolicyError::MissingScript("fixed".into()))?;
            Ok(Box::new(FixedPolicy::parse(script)))
        });
        r
    }
}

fn no_script(kind: &str, args: &PolicyArgs) -> Result<(), PolicyError> {
    match args.script {
        Some(_) => Err(PolicyError::UnexpectedScript(kind.into())),
        None => Ok(()),
    }
}

impl PolicyRegistry {
    pub fn empty() -> PolicyRegistry {
        PolicyRegistry { factories: BTreeMap::new() }
    }

    /// Adds or replaces a policy kind.
    pub fn register<F>(&mut self, kind: &str, factory: F)
    where
        F: Fn(&PolicyArgs) -> Result<Box<dyn Policy>, PolicyError> + Send + Sync + 'static,
    {
        self.factories.insert(kind.to_string(), Box::new(factory));
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    /// Builds a policy from a `kind[:script]` string.
    pub fn create(&self, spec: &str, agent: &str, agent_index: usize, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        let (kind, script) = match spec.split_once(':') {
            Some((k, s)) => (k, Some(s.to_string())),
            None => (spec, None),
        };
        let factory = self.factories.get(kind).ok_or_else(|| {
            PolicyError::Unknown(kind.to_string(), self.kinds().collect::<Vec<_>>().join(", "))
        })?;
        factory(&PolicyArgs { agent: agent.to_string(), agent_index, seed, script })
    }

    /// Builds one policy per agent of `spec` from `agent=kind[:script]`
    /// assignments. Unassigned agents get `default_kind`.
    pub fn assign(
        &self,
        spec: &GameSpec,
        assignments: &[String],
        default_kind: &str,
        seed: u64,
    ) -> Result<Vec<(String, Box<dyn Policy>)>, PolicyError> {
        let mut chosen: BTreeMap<&str, &str> = BTreeMap::new();
        for a in assignments {
            let (agent, kind) = a.split_once('=').ok_or_else(|| PolicyError::BadAssignment(a.clone()))?;
            if !spec.is_agent(agent) {
                return Err(PolicyError::BadAssignment(a.clone()));
            }
            chosen.insert(agent, kind);
        }
        spec.agents
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let kind = chosen.get(agent.as_str()).copied().unwrap_or(default_kind);
                Ok((agent.clone(), self.create(kind, agent, i, seed)?))
            })
            .collect()
    }
}

/// Never touches its switches.
pub struct Idle;

impl Policy for Idle {
    fn name(&self) -> &str {
        "idle"
    }

    fn decide(&mut self, _: &Context<'_>) -> Vec<Command> {
        Vec::new()
    }
}

/// Sets every owned switch to a uniformly chosen alias each chronon.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    /// Stream 0 belongs to chance nodes, so agent `i` draws from `i + 1`.
    pub fn new(seed: u64, agent_index: usize) -> RandomPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(agent_index as u64 + 1);
        RandomPolicy { rng }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, ctx: &Context<'_>) -> Vec<Command> {
        ctx.switches
            .iter()
            .map(|s| {
                let i = self.rng.gen_range(0..s.aliases.len());
                Command::new(ctx.agent, s.bid, s.aliases[i].clone())
            })
            .collect()
    }
}

/// Plays a comma-separated alias per chronon, then stops sending.
///
/// An alias goes to every owned switch that declares it, or to the first
/// owned switch when none does, so a bad script shows up as a rejection.
/// An empty entry skips that chronon.
pub struct FixedPolicy {
    script: Vec<String>,
}

impl FixedPolicy {
    pub fn parse(script: &str) -> FixedPolicy {
        FixedPolicy { script: script.split(',').map(|s| s.trim().to_string()).collect() }
    }
}

impl Policy for FixedPolicy {
    fn name(&self) -> &str {
        "fixed"
    }

    fn decide(&mut self, ctx: &Context<'_>) -> Vec<Command> {
        let Some(alias) = usize::try_from(ctx.chronon).ok().and_then(|t| self.script.get(t)) else {
            return Vec::new();
        };
        if alias.is_empty() {
            return Vec::new();
        }
        let mut targets: Vec<&SwitchDecl> =
            ctx.switches.iter().copied().filter(|s| s.aliases.contains(alias)).collect();
        if targets.is_empty() {
            targets.extend(ctx.switches.first());
        }
        targets.iter().map(|s| Command::new(ctx.agent, s.bid, alias.clone())).collect()
    }
}
