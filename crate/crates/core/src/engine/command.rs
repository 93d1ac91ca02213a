//! External steering: commands, their validation, and run control.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EngineError, ModuleId, TickReport, World};
use crate::lattice::CellCoord;

/// A steering command. World commands (weights, object, parameters) are
/// applied atomically at the start of the next tick; pause/resume/step only
/// gate the run loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    #[serde(alias = "set_region_weight")]
    SetWeight {
        region: usize,
        weight: f64,
    },
    #[serde(alias = "translate_object")]
    MoveObject {
        offset: [i32; 3],
    },
    Pause,
    Resume,
    Step {
        #[serde(default = "one")]
        n: u64,
    },
    SetParam {
        name: String,
        value: f64,
    },
}

fn one() -> u64 {
    1
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::SetWeight { .. } => "set_weight",
            Command::MoveObject { .. } => "move_object",
            Command::Pause => "pause",
            Command::Resume => "resume",
            Command::Step { .. } => "step",
            Command::SetParam { .. } => "set_param",
        }
    }

    /// Changes world state (and is therefore part of the replay log).
    pub fn is_world_command(&self) -> bool {
        matches!(self, Command::SetWeight { .. } | Command::MoveObject { .. } | Command::SetParam { .. })
    }
}

/// Acceptance of a command: the tick at whose start it takes effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub apply_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommandError {
    #[error("unknown region {0}")]
    UnknownRegion(usize),
    #[error("weight {0} must be finite and non-negative")]
    InvalidWeight(f64),
    #[error("weight {weight} exceeds the conserved total {total}")]
    ExceedsTotal { weight: f64, total: f64 },
    #[error("offset {0:?} leaves the lattice (coordinate sum must be even)")]
    OffLattice([i32; 3]),
    #[error("object would overlap module {module} at {cell}")]
    ObjectOverlap { cell: CellCoord, module: ModuleId },
    #[error("object would sink below the ground at {0}")]
    ObjectBelowGround(CellCoord),
    #[error("{0}")]
    Param(String),
    #[error("step count must be at least 1")]
    ZeroStep,
    #[error("'{0}' does not change the world")]
    NotAWorldCommand(&'static str),
}

/// A world command together with the tick at which it was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    pub tick: u64,
    pub command: Command,
}

/// A world plus run control (pause, counted stepping) and a log of the
/// world commands accepted so far.
#[derive(Debug, Clone)]
pub struct Simulation {
    world: World,
    paused: bool,
    steps_remaining: u64,
    log: Vec<LoggedCommand>,
}

impl Simulation {
    pub fn new(world: World) -> Self {
        Self { world, paused: false, steps_remaining: 0, log: Vec::new() }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn into_world(self) -> World {
        self.world
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn command_log(&self) -> &[LoggedCommand] {
        &self.log
    }

    pub fn enqueue_command(&mut self, cmd: Command) -> Result<Ack, CommandError> {
        let ack = Ack { apply_tick: self.world.tick_count() };
        match cmd {
            Command::Pause => {
                self.paused = true;
                self.steps_remaining = 0;
            }
            Command::Resume => {
                self.paused = false;
                self.steps_remaining = 0;
            }
            Command::Step { n: 0 } => return Err(CommandError::ZeroStep),
            Command::Step { n } => {
                if self.paused {
                    self.steps_remaining += n;
                }
            }
            world_cmd => {
                let ack = self.world.enqueue_command(world_cmd.clone())?;
                self.log.push(LoggedCommand { tick: ack.apply_tick, command: world_cmd });
                return Ok(ack);
            }
        }
        Ok(ack)
    }

    /// Whether [`advance`](Self::advance) would run a tick.
    pub fn can_advance(&self) -> bool {
        !self.paused || self.steps_remaining > 0
    }

    /// Runs one tick unless paused with no steps pending.
    pub fn advance(&mut self) -> Result<Option<TickReport>, EngineError> {
        if !self.can_advance() {
            return Ok(None);
        }
        if self.paused {
            self.steps_remaining -= 1;
        }
        self.world.tick().map(Some)
    }
}
