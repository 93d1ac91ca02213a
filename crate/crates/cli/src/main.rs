//! `rdsim`: run scenarios, recompute metrics from traces, serve a live run.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdsim_core::metrics::Activity;
use rdsim_core::scenario::builtin;
use rdsim_core::trace::DEFAULT_SNAPSHOT_EVERY;
use rdsim_core::{parse_scenario, run, LoggedCommand, RunError, RunOptions, Scenario, Summary, Trace, TraceError};

const EXIT_USAGE: u8 = 2;
const EXIT_SCENARIO: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_CORRUPT_TRACE: u8 = 5;

#[derive(Parser)]
#[command(name = "rdsim", version, about = "Rhombic-dodecahedron modular robot simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario to its tick budget and print summary metrics.
    Run {
        /// Scenario file, or the name of a shipped scenario.
        #[arg(long)]
        scenario: String,
        /// Overrides the scenario's seed.
        #[arg(long)]
        rng_seed: Option<u64>,
        /// Overrides the scenario's tick budget.
        #[arg(long)]
        ticks: Option<u64>,
        /// Trace output (JSON lines).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SNAPSHOT_EVERY, value_parser = clap::value_parser!(u64).range(1..))]
        snapshot_every: u64,
        /// Command log to replay: JSON lines of {"tick": t, "command": {...}}.
        #[arg(long)]
        commands: Option<PathBuf>,
    },
    /// Recompute metrics from a trace.
    Metrics { trace: PathBuf },
    /// Serve a live, steerable run over HTTP.
    Serve {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        rng_seed: Option<u64>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Ticks per second of wall time.
        #[arg(long, default_value_t = 10.0)]
        tps: f64,
        /// Trace output for the whole session.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the log of applied commands on shutdown.
        #[arg(long)]
        command_log: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SNAPSHOT_EVERY, value_parser = clap::value_parser!(u64).range(1..))]
        snapshot_every: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rdsim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run { scenario, rng_seed, ticks, out, snapshot_every, commands } => {
            let scenario = load_scenario(&scenario, rng_seed)?;
            let commands = match commands {
                Some(p) => read_command_log(&p)?,
                None => Vec::new(),
            };
            let options = RunOptions { ticks, commands, snapshot_every };
            let outcome = match out {
                Some(path) => {
                    let file = File::create(&path)
                        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", path.display())))?;
                    let mut w = BufWriter::new(file);
                    run(&scenario, &options, Some(&mut w))
                }
                None => run(&scenario, &options, None),
            }
            .map_err(run_failure)?;
            print_summary(&outcome.summary)
        }
        Cmd::Metrics { trace } => {
            let file = File::open(&trace)
                .map_err(|e| Failure::new(EXIT_IO, format!("cannot open {}: {e}", trace.display())))?;
            let trace = Trace::read(BufReader::new(file)).map_err(|e| match e {
                TraceError::Io(e) => Failure::new(EXIT_IO, e.to_string()),
                corrupt => Failure::new(EXIT_CORRUPT_TRACE, corrupt.to_string()),
            })?;
            let activity = Activity::from_trace(&trace);
            let summary = Summary::compute(trace.meta.scenario.behavior, &activity, trace.final_snapshot());
            print_summary(&summary)
        }
        Cmd::Serve { scenario, rng_seed, port, tps, out, command_log, snapshot_every } => {
            let scenario = load_scenario(&scenario, rng_seed)?;
            if !(tps > 0.0 && tps.is_finite()) {
                return Err(Failure::new(EXIT_USAGE, "--tps must be positive"));
            }
            let config = rdsim_server::ServerConfig {
                scenario,
                port,
                ticks_per_second: tps,
                trace: out,
                command_log,
                snapshot_every,
            };
            rdsim_server::serve_blocking(config).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
        }
    }
}

fn print_summary(summary: &Summary) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    write!(out, "{summary}").and_then(|_| out.flush()).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

/// Reads a scenario from a path, falling back to the shipped scenario of
/// that name.
fn load_scenario(arg: &str, rng_seed: Option<u64>) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match builtin(arg) {
            Some(t) if !path.exists() => t.to_string(),
            _ => return Err(Failure::new(EXIT_IO, format!("cannot read scenario {arg}: {e}"))),
        },
    };
    let mut scenario = parse_scenario(&text).map_err(|e| Failure::new(EXIT_SCENARIO, format!("{arg}: {e}")))?;
    for w in scenario.warnings() {
        eprintln!("rdsim: warning: {w}");
    }
    if let Some(seed) = rng_seed {
        scenario.rng_seed = seed;
        // the blob layout depends on the seed
        scenario.validate().map_err(|e| Failure::new(EXIT_SCENARIO, format!("{arg}: {e}")))?;
    }
    Ok(scenario)
}

fn read_command_log(path: &Path) -> Result<Vec<LoggedCommand>, Failure> {
    let file = File::open(path).map_err(|e| Failure::new(EXIT_IO, format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: LoggedCommand = serde_json::from_str(&line)
            .map_err(|e| Failure::new(EXIT_SCENARIO, format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(c);
    }
    Ok(out)
}

fn run_failure(e: RunError) -> Failure {
    match e {
        RunError::Io(e) => Failure::new(EXIT_IO, format!("writing trace: {e}")),
        RunError::Scenario(e) => Failure::new(EXIT_SCENARIO, e.to_string()),
        other => Failure::new(EXIT_SCENARIO, other.to_string()),
    }
}
