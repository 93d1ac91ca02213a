//! Discrete-time simulator for a self-reconfiguring robot built from
//! rhombic-dodecahedral modules.
//!
//! Modules live on the FCC lattice ([`lattice`]), talk to their face
//! neighbours through hop-count scent fields ([`scent`]), and follow small
//! finite-state machines ([`behaviors`]) that together grow chains, branching
//! trees, load-following table legs, and grasping fingers. The [`engine`]
//! runs those machines tick by tick under a seeded random order;
//! [`scenario`], [`trace`] and [`metrics`] handle input files, replayable
//! output, and the measurements taken from it.

pub mod behaviors;
pub mod engine;
pub mod lattice;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod scent;
pub mod trace;

pub use behaviors::{BehaviorKind, BehaviorParams, Mode};
pub use engine::{
    Ack, Command, CommandError, Denial, EngineError, Flags, LoggedCommand, ModuleId, ModuleRecord, Simulation,
    Snapshot, TickReport, World,
};
pub use lattice::{CellCoord, MoveCandidate, Offset};
pub use metrics::Summary;
pub use runner::{run, RunError, RunOptions, RunOutcome};
pub use scenario::{parse_scenario, Scenario, ScenarioError};
pub use scent::{Channel, NO_SCENT};
pub use trace::{Trace, TraceError, TraceRecord, TraceWriter};
