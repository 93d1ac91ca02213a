//! Headless runs: a scenario, a tick budget and a scripted command log.

use std::io::{self, Write};

use thiserror::Error;

use crate::engine::{CommandError, EngineError, LoggedCommand, Snapshot, World};
use crate::metrics::{Activity, Summary};
use crate::scenario::{Scenario, ScenarioError};
use crate::trace::{TraceWriter, DEFAULT_SNAPSHOT_EVERY};

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides the scenario's tick budget.
    pub ticks: Option<u64>,
    /// World commands, each enqueued just before step `tick` runs.
    pub commands: Vec<LoggedCommand>,
    pub snapshot_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { ticks: None, commands: Vec::new(), snapshot_every: DEFAULT_SNAPSHOT_EVERY }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("command at tick {tick} rejected: {source}")]
    Command { tick: u64, source: CommandError },
    #[error("command log is not in tick order at tick {0}")]
    UnorderedLog(u64),
    #[error("writing the trace failed: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub activity: Activity,
    pub final_snapshot: Snapshot,
}

/// Runs `scenario` to its budget, streaming a trace to `sink` if given.
pub fn run(scenario: &Scenario, options: &RunOptions, sink: Option<&mut dyn Write>) -> Result<RunOutcome, RunError> {
    let world = scenario.build()?;
    run_world(scenario, world, options, sink)
}

/// Like [`run`], starting from an already built world.
pub fn run_world(
    scenario: &Scenario,
    mut world: World,
    options: &RunOptions,
    sink: Option<&mut dyn Write>,
) -> Result<RunOutcome, RunError> {
    let ticks = options.ticks.unwrap_or(scenario.ticks);
    let mut writer = match sink {
        Some(out) => Some(TraceWriter::new(out, scenario, options.snapshot_every, world.state())?),
        None => None,
    };
    let mut activity = Activity::starting_from(&world.snapshot());
    let mut pending = options.commands.iter().peekable();
    for t in 0..ticks {
        while let Some(c) = pending.next_if(|c| c.tick <= t) {
            if c.tick < t {
                return Err(RunError::UnorderedLog(c.tick));
            }
            world.enqueue_command(c.command.clone()).map_err(|source| RunError::Command { tick: c.tick, source })?;
        }
        let report = world.tick()?;
        activity.observe(&report, world.state().params());
        if let Some(w) = writer.as_mut() {
            w.tick(&report, world.state())?;
        }
    }
    if let Some(w) = writer {
        w.finish(world.state())?;
    }
    let final_snapshot = world.snapshot();
    let summary = Summary::compute(scenario.behavior, &activity, &final_snapshot);
    Ok(RunOutcome { summary, activity, final_snapshot })
}
