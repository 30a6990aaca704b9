use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, IsTerminal};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ggma_server::{Server, ServerConfig};
use sidl_core::session::ReplayError;
use sidl_core::{parse_sidl, replay, run_headless, validate, Engine, PolicyRegistry, Recorder, RunOptions, StopReason};

#[derive(Parser)]
#[command(name = "ggma", version, about = "Check, run, serve and replay SIDL games")]
struct Cli {
    /// Plain output without ANSI colors (also honors NO_COLOR).
    #[arg(long, global = true)]
    no_color: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a game description.
    Check { file: PathBuf },
    /// Play a game locally with policies for every agent.
    Run(RunArgs),
    /// Serve a game to networked players.
    Serve(ServeArgs),
    /// Re-run a record and verify every chronon.
    Replay { file: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Policy for one agent, as `agent=kind[:script]`. Repeatable.
    #[arg(long = "policy", value_name = "AGENT=POLICY")]
    policies: Vec<String>,
    /// Policy for agents without an explicit one.
    #[arg(long, default_value = "idle", value_name = "POLICY")]
    default_policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_chronons: u64,
    /// Nominal chronon length written to the record header.
    #[arg(long, default_value_t = 1000)]
    chronon_ms: u64,
    /// Write the record to this file.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    file: PathBuf,
    /// JSON config file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    chronon_ms: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lobby_timeout_ms: Option<u64>,
    /// Bot for a seat nobody claims, as `agent=kind[:script]`. Repeatable.
    #[arg(long = "bots", value_name = "AGENT=POLICY")]
    bots: Vec<String>,
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long)]
    max_chronons: Option<u64>,
}

enum Failure {
    /// Bad input: unreadable, unparsable or invalid files and arguments.
    Input(String),
    /// The run stopped before the game ended.
    NotTerminal(String),
    Divergence(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NotTerminal(_) => 2,
            Failure::Divergence(_) => 3,
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn ok(&self, text: &str) -> String {
        self.paint("32", text)
    }

    fn error(&self, text: &str) -> String {
        self.paint("31", text)
    }

    fn warning(&self, text: &str) -> String {
        self.paint("33", text)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<std::sync::Arc<Engine>, Failure> {
    let source = read(path)?;
    Engine::load(&source).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn check(path: &Path, style: &Style) -> Result<(), Failure> {
    let source = read(path)?;
    let spec = parse_sidl(&source).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    let report = validate(&spec);
    for w in &report.warnings {
        println!("{}: {w}", style.warning(&format!("warning[{}]", w.code())));
    }
    for e in &report.errors {
        println!("{}: {e}", style.error(&format!("error[{}]", e.code())));
    }
    if report.is_ok() {
        println!("{}", style.ok("OK"));
        Ok(())
    } else {
        Err(Failure::Input(format!("{}: {} validation error(s)", path.display(), report.errors.len())))
    }
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let engine = load(&args.file)?;
    let registry = PolicyRegistry::default();
    let mut policies = registry
        .assign(engine.spec(), &args.policies, &args.default_policy, args.seed)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let recorder = match &args.record {
        Some(path) => Recorder::to_writer(BufWriter::new(
            File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        )),
        None => Recorder::in_memory(),
    };
    let options = RunOptions { seed: args.seed, max_chronons: args.max_chronons, chronon_ms: args.chronon_ms };
    let out = run_headless(engine, &mut policies, options, recorder).map_err(|e| Failure::Input(e.to_string()))?;

    let mut ranked: Vec<(&String, &f64)> = out.state.accounts.iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(a.1));
    for (agent, balance) in ranked {
        println!("{agent} {balance:?}");
    }
    if let Some(path) = &args.record {
        println!("record: {}", path.display());
    }
    match out.stop {
        StopReason::Terminal => Ok(()),
        StopReason::MaxChrononsExceeded => Err(Failure::NotTerminal(format!(
            "stopped after {} chronons without reaching a terminal state",
            out.state.chronon
        ))),
    }
}

fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, String>, Failure> {
    items
        .iter()
        .map(|item| {
            item.split_once('=')
                .map(|(a, p)| (a.to_string(), p.to_string()))
                .ok_or_else(|| Failure::Input(format!("`{item}` is not of the form agent=kind[:script]")))
        })
        .collect()
}

fn serve(args: &ServeArgs) -> Result<(), Failure> {
    let engine = load(&args.file)?;
    let mut config = match &args.config {
        Some(path) => ServerConfig::from_file(path).map_err(|e| Failure::Input(e.to_string()))?,
        None => ServerConfig::default(),
    };
    config.port = args.port.unwrap_or(config.port);
    config.chronon_ms = args.chronon_ms.unwrap_or(config.chronon_ms);
    config.seed = args.seed.unwrap_or(config.seed);
    config.lobby_timeout_ms = args.lobby_timeout_ms.unwrap_or(config.lobby_timeout_ms);
    config.bots.extend(parse_assignments(&args.bots)?);
    config.record_path = args.record.clone().or(config.record_path);
    config.max_chronons = args.max_chronons.or(config.max_chronons);

    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Input(e.to_string()))?;
    let report = runtime.block_on(async {
        let server = Server::bind(engine, config).await?;
        eprintln!("listening on {}", server.local_addr());
        tokio::select! {
            report = server.run() => report.map(Some),
            _ = tokio::signal::ctrl_c() => Ok(None),
        }
    });
    match report {
        Ok(Some(report)) => {
            for (agent, balance) in &report.state.accounts {
                println!("{agent} {balance:?}");
            }
            match report.stop {
                StopReason::Terminal => Ok(()),
                StopReason::MaxChrononsExceeded => {
                    Err(Failure::NotTerminal(format!("stopped after {} chronons", report.state.chronon)))
                }
            }
        }
        Ok(None) => Err(Failure::NotTerminal("interrupted".into())),
        Err(e) => Err(Failure::Input(e.to_string())),
    }
}

fn replay_file(path: &Path, style: &Style) -> Result<(), Failure> {
    let text = read(path)?;
    match replay(&text) {
        Ok(out) => {
            println!("{}: {} chronons replayed", style.ok("OK"), out.state.chronon);
            for (agent, balance) in &out.state.accounts {
                println!("{agent} {balance:?}");
            }
            Ok(())
        }
        Err(e @ ReplayError::Divergence { .. }) => Err(Failure::Divergence(format!("{}: {e}", path.display()))),
        Err(e) => Err(Failure::Input(format!("{}: {e}", path.display()))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style {
        color: !cli.no_color && std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal(),
    };
    let result = match &cli.command {
        Cmd::Check { file } => check(file, &style),
        Cmd::Run(args) => run(args),
        Cmd::Serve(args) => serve(args),
        Cmd::Replay { file } => replay_file(file, &style),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::NotTerminal(msg) | Failure::Divergence(msg)) = &f;
            let color = !cli.no_color && std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal();
            eprintln!("{}: {msg}", Style { color }.error("error"));
            ExitCode::from(f.exit_code())
        }
    }
}
