//! World state and the per-tick simulation loop.
//!
//! One tick:
//! 1. queued commands and scheduled weight changes are applied;
//! 2. every scent channel is updated once from the previous tick's values;
//! 3. modules run their behavior step once each, in a fresh random order,
//!    with mode and memory writes taking effect immediately;
//! 4. recorded move requests are applied in a second, independent random
//!    order, each re-validated against the occupancy of that moment. A
//!    request is withdrawn if the module's mode was changed by a neighbour
//!    after it was made.
//!
//! All randomness comes from the world's seeded generator, drawn in exactly
//! that order, so a run is a pure function of its setup and command log.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviors::{self, Action, BehaviorKind, BehaviorParams, LocalView, Mode};
use crate::lattice::{self, CellCoord, MoveBlock, MoveCandidate, Occupancy, Offset};
use crate::scent::{self, Adjacency, Channel, Role, ScentValue, ScentValues, CHANNEL_COUNT};

mod command;
pub mod connectivity;

pub use command::{Ack, Command, CommandError, LoggedCommand, Simulation};

/// Seeded generator behind every stochastic choice.
pub type SimRng = ChaCha8Rng;

/// Stable module identifier; also the module's index in the world table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(pub u32);

impl ModuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ModuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

fn is_zero_u8(v: &u8) -> bool {
    *v == 0
}

fn is_zero_u16(v: &u16) -> bool {
    *v == 0
}

/// The small per-module store behaviors may read and write.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Memory {
    /// Direction in which a seed extends its chain or branch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<Offset>,
    /// Seeds spawned so far by a node.
    #[serde(default, skip_serializing_if = "is_zero_u8")]
    pub spawned: u8,
    /// Bit `i` set once a node has spawned towards `OFFSETS[i]`.
    #[serde(default, skip_serializing_if = "is_zero_u16")]
    pub used_dirs: u16,
    /// Board region of a root module.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<u16>,
}

impl Memory {
    pub fn is_empty(&self) -> bool {
        *self == Memory::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub id: ModuleId,
    pub cell: CellCoord,
    pub mode: Mode,
    pub scent: ScentValues,
    #[serde(default, skip_serializing_if = "Memory::is_empty")]
    pub memory: Memory,
}

/// A part of the board whose active roots share one weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub weight: f64,
}

/// Scenario switches that change engine semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// Deny moves that would split the structure.
    pub connectivity: bool,
    /// Searchers only read scent from modules on the outer surface.
    pub surface_scent: bool,
    /// Recompute exact scent distances every tick instead of one hop per tick.
    pub instantaneous_scent: bool,
    /// Forbid cells below `z = 0`.
    pub ground: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Self { connectivity: true, surface_scent: false, instantaneous_scent: false, ground: false }
    }
}

/// One scheduled change of a region's weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightChange {
    pub tick: u64,
    pub region: usize,
    pub weight: f64,
}

/// A module as placed at tick 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialModule {
    pub cell: CellCoord,
    pub mode: Mode,
    pub memory: Memory,
}

/// Everything needed to construct a [`World`].
#[derive(Debug, Clone)]
pub struct WorldSetup {
    pub behavior: BehaviorKind,
    pub params: BehaviorParams,
    pub flags: Flags,
    pub scent_cap: ScentValue,
    pub modules: Vec<InitialModule>,
    pub objects: BTreeSet<CellCoord>,
    pub regions: Vec<Region>,
    pub weight_schedule: Vec<WeightChange>,
    pub conserve_total: Option<f64>,
}

/// Why a requested move was not carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denial {
    DestinationOccupied,
    PivotVacated,
    TransitBlocked,
    WouldDisconnect,
    GroundViolation,
}

impl std::fmt::Display for Denial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Denial::DestinationOccupied => "destination occupied",
            Denial::PivotVacated => "pivot vacated",
            Denial::TransitBlocked => "transit blocked",
            Denial::WouldDisconnect => "would disconnect",
            Denial::GroundViolation => "ground violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("world invariant violated: {0}")]
    Invariant(String),
    #[error("unknown module {0}")]
    UnknownModule(ModuleId),
    #[error("move {mv:?} does not start at the current cell of {id}")]
    StaleMove { id: ModuleId, mv: MoveCandidate },
    #[error("{0:?} is not a 120-degree roll")]
    NotARoll(MoveCandidate),
    #[error("{by} wrote into {target}, which is not a face-neighbour")]
    NonLocalWrite { by: ModuleId, target: ModuleId },
    #[error("invalid world setup: {0}")]
    Setup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedMove {
    pub id: ModuleId,
    #[serde(rename = "move")]
    pub mv: MoveCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeniedMove {
    pub id: ModuleId,
    #[serde(rename = "move")]
    pub mv: MoveCandidate,
    pub reason: Denial,
}

/// A mode change, with the module whose step caused it and the target's
/// scent values at that moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: ModuleId,
    pub from: Mode,
    pub to: Mode,
    pub by: ModuleId,
    pub scent: ScentValues,
}

/// What happened during one tick. `tick` is the index of the step (the
/// world's tick counter before it was incremented).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TickReport {
    pub tick: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commands: Vec<Command>,
    #[serde(default)]
    pub applied_moves: Vec<AppliedMove>,
    #[serde(default)]
    pub denied_moves: Vec<DeniedMove>,
    #[serde(default)]
    pub mode_transitions: Vec<Transition>,
}

impl TickReport {
    /// No module moved and no module changed mode.
    pub fn is_quiet(&self) -> bool {
        self.applied_moves.is_empty() && self.mode_transitions.is_empty()
    }
}

/// Region status as published in snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionState {
    pub name: String,
    pub weight: f64,
    pub roots: usize,
    pub active_roots: usize,
}

/// Between-tick copy of the whole world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Completed ticks.
    pub tick: u64,
    pub behavior: BehaviorKind,
    pub modules: Vec<ModuleRecord>,
    #[serde(default)]
    pub objects: Vec<CellCoord>,
    #[serde(default)]
    pub regions: Vec<RegionState>,
    pub params: BehaviorParams,
}

/// World contents readable by behaviors through [`LocalView`].
#[derive(Debug, Clone)]
pub struct WorldState {
    pub(crate) behavior: BehaviorKind,
    pub(crate) params: BehaviorParams,
    pub(crate) flags: Flags,
    pub(crate) cap: ScentValue,
    pub(crate) modules: Vec<ModuleRecord>,
    pub(crate) occupancy: HashMap<CellCoord, ModuleId>,
    pub(crate) objects: BTreeSet<CellCoord>,
    pub(crate) regions: Vec<Region>,
    pub(crate) roots: Vec<ModuleId>,
    pub(crate) tick: u64,
}

impl Occupancy for WorldState {
    fn has_module(&self, cell: CellCoord) -> bool {
        self.occupancy.contains_key(&cell)
    }
    fn has_object(&self, cell: CellCoord) -> bool {
        self.objects.contains(&cell)
    }
    fn ground_enabled(&self) -> bool {
        self.flags.ground
    }
}

impl WorldState {
    pub fn behavior(&self) -> BehaviorKind {
        self.behavior
    }

    pub fn params(&self) -> &BehaviorParams {
        &self.params
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn scent_cap(&self) -> ScentValue {
        self.cap
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn modules(&self) -> &[ModuleRecord] {
        &self.modules
    }

    pub fn module(&self, id: ModuleId) -> Option<&ModuleRecord> {
        self.modules.get(id.index())
    }

    pub fn module_at(&self, cell: CellCoord) -> Option<ModuleId> {
        self.occupancy.get(&cell).copied()
    }

    pub fn objects(&self) -> &BTreeSet<CellCoord> {
        &self.objects
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn roots(&self) -> &[ModuleId] {
        &self.roots
    }

    /// Roots of `region` currently in ROOT or AROOT mode.
    pub fn active_roots(&self, region: usize) -> usize {
        self.roots
            .iter()
            .map(|r| &self.modules[r.index()])
            .filter(|m| m.memory.region == Some(region as u16) && m.mode.is_active_root())
            .count()
    }

    /// Weight per active root in `region`; infinite when a loaded region has
    /// no active roots, zero when it carries no weight.
    pub fn region_load(&self, region: usize) -> Option<f64> {
        let w = self.regions.get(region)?.weight;
        if w == 0.0 {
            return Some(0.0);
        }
        let n = self.active_roots(region);
        Some(if n == 0 { f64::INFINITY } else { w / n as f64 })
    }

    /// Would removing `id` split the module graph?
    pub fn is_articulation(&self, id: ModuleId) -> bool {
        match self.module(id) {
            Some(m) => connectivity::is_cut_cell(&self.occupancy, m.cell),
            None => false,
        }
    }

    /// Checks whether `id` may perform `mv` right now.
    pub fn validate_move(&self, id: ModuleId, mv: &MoveCandidate) -> Result<Result<(), Denial>, EngineError> {
        let m = self.module(id).ok_or(EngineError::UnknownModule(id))?;
        if m.cell != mv.src {
            return Err(EngineError::StaleMove { id, mv: *mv });
        }
        let geometric = match lattice::check_roll(self, mv) {
            Ok(()) => Ok(()),
            Err(MoveBlock::NotARoll) => return Err(EngineError::NotARoll(*mv)),
            Err(MoveBlock::PivotVacated) => Err(Denial::PivotVacated),
            Err(MoveBlock::DestinationOccupied) => Err(Denial::DestinationOccupied),
            Err(MoveBlock::GroundViolation) => Err(Denial::GroundViolation),
            Err(MoveBlock::TransitBlocked) => Err(Denial::TransitBlocked),
        };
        if geometric.is_err() {
            return Ok(geometric);
        }
        if self.flags.connectivity && self.is_articulation(id) {
            return Ok(Err(Denial::WouldDisconnect));
        }
        Ok(Ok(()))
    }

    /// Surface flag for every module, by id.
    pub fn surface_mask(&self) -> Vec<bool> {
        let cells: Vec<CellCoord> = self.modules.iter().map(|m| m.cell).collect();
        scent::surface_mask(self, &cells)
    }

    pub fn adjacency(&self) -> Adjacency {
        let lists: Vec<Vec<usize>> = self
            .modules
            .iter()
            .map(|m| m.cell.neighbors().iter().filter_map(|c| self.occupancy.get(c).map(|id| id.index())).collect())
            .collect();
        Adjacency::from_lists(&lists)
    }

    pub fn is_connected(&self) -> bool {
        connectivity::is_connected(self.occupancy.keys())
    }

    /// Occupancy bijection, parity and object disjointness.
    pub fn check_invariants(&self) -> Result<(), EngineError> {
        if self.occupancy.len() != self.modules.len() {
            return Err(EngineError::Invariant(format!(
                "{} occupied cells for {} modules",
                self.occupancy.len(),
                self.modules.len()
            )));
        }
        for (i, m) in self.modules.iter().enumerate() {
            if m.id.index() != i {
                return Err(EngineError::Invariant(format!("module at slot {i} has id {}", m.id)));
            }
            if self.occupancy.get(&m.cell) != Some(&m.id) {
                return Err(EngineError::Invariant(format!("occupancy disagrees with {} at {}", m.id, m.cell)));
            }
            if !m.cell.is_valid() {
                return Err(EngineError::Invariant(format!("{} sits off-lattice at {}", m.id, m.cell)));
            }
            if self.flags.ground && m.cell.z < 0 {
                return Err(EngineError::Invariant(format!("{} is below ground at {}", m.id, m.cell)));
            }
            if self.objects.contains(&m.cell) {
                return Err(EngineError::Invariant(format!("{} overlaps an object at {}", m.id, m.cell)));
            }
        }
        Ok(())
    }

    pub fn region_states(&self) -> Vec<RegionState> {
        self.regions
            .iter()
            .enumerate()
            .map(|(i, r)| RegionState {
                name: r.name.clone(),
                weight: r.weight,
                roots: self.roots.iter().filter(|id| self.modules[id.index()].memory.region == Some(i as u16)).count(),
                active_roots: self.active_roots(i),
            })
            .collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            tick: self.tick,
            behavior: self.behavior,
            modules: self.modules.clone(),
            objects: self.objects.iter().copied().collect(),
            regions: self.region_states(),
            params: self.params.clone(),
        }
    }

    fn set_mode(&mut self, target: ModuleId, to: Mode, by: ModuleId, report: &mut TickReport) {
        let m = &mut self.modules[target.index()];
        if m.mode != to {
            report.mode_transitions.push(Transition { id: target, from: m.mode, to, by, scent: m.scent });
            m.mode = to;
        }
    }

    fn relocate(&mut self, id: ModuleId, dst: CellCoord) {
        let m = &mut self.modules[id.index()];
        self.occupancy.remove(&m.cell);
        m.cell = dst;
        self.occupancy.insert(dst, id);
    }
}

/// The simulated robot: state, pending commands and the random stream.
#[derive(Debug, Clone)]
pub struct World {
    state: WorldState,
    rng: SimRng,
    schedule: Vec<WeightChange>,
    schedule_cursor: usize,
    pending: Vec<Command>,
    conserve_total: Option<f64>,
}

impl World {
    /// Builds a world; `rng` continues from whatever the layout generator drew.
    pub fn new(setup: WorldSetup, rng: SimRng) -> Result<World, EngineError> {
        let mut occupancy = HashMap::with_capacity(setup.modules.len());
        let mut modules = Vec::with_capacity(setup.modules.len());
        let mut roots = Vec::new();
        for (i, m) in setup.modules.iter().enumerate() {
            let id = ModuleId(i as u32);
            if occupancy.insert(m.cell, id).is_some() {
                return Err(EngineError::Setup(format!("two modules at {}", m.cell)));
            }
            if matches!(m.mode, Mode::Root | Mode::Iroot | Mode::Aroot) {
                match m.memory.region {
                    Some(r) if (r as usize) < setup.regions.len() => roots.push(id),
                    _ => return Err(EngineError::Setup(format!("root {id} has no valid region"))),
                }
            }
            modules.push(ModuleRecord {
                id,
                cell: m.cell,
                mode: m.mode,
                scent: ScentValues::uniform(setup.scent_cap),
                memory: m.memory,
            });
        }
        let mut schedule = setup.weight_schedule.clone();
        schedule.sort_by_key(|w| w.tick);
        let state = WorldState {
            behavior: setup.behavior,
            params: setup.params,
            flags: setup.flags,
            cap: setup.scent_cap,
            modules,
            occupancy,
            objects: setup.objects,
            regions: setup.regions,
            roots,
            tick: 0,
        };
        state.check_invariants()?;
        Ok(World {
            state,
            rng,
            schedule,
            schedule_cursor: 0,
            pending: Vec::new(),
            conserve_total: setup.conserve_total,
        })
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn tick_count(&self) -> u64 {
        self.state.tick
    }

    pub fn snapshot(&self) -> Snapshot {
        self.state.snapshot()
    }

    pub fn region_load(&self, region: usize) -> Option<f64> {
        self.state.region_load(region)
    }

    pub fn is_articulation(&self, id: ModuleId) -> bool {
        self.state.is_articulation(id)
    }

    pub fn validate_move(&self, id: ModuleId, mv: &MoveCandidate) -> Result<Result<(), Denial>, EngineError> {
        self.state.validate_move(id, mv)
    }

    pub fn conserve_total(&self) -> Option<f64> {
        self.conserve_total
    }

    /// Commands accepted but not yet applied.
    pub fn pending_commands(&self) -> &[Command] {
        &self.pending
    }

    /// Runs one tick.
    pub fn tick(&mut self) -> Result<TickReport, EngineError> {
        self.state.check_invariants()?;
        let mut report = TickReport { tick: self.state.tick, ..TickReport::default() };

        self.apply_commands(&mut report);
        self.update_scent();

        let kind = self.state.behavior;
        let mut order: Vec<ModuleId> = self.state.modules.iter().map(|m| m.id).collect();
        order.shuffle(&mut self.rng);
        let mut requests: Vec<(ModuleId, MoveCandidate, Mode)> = Vec::new();
        for id in order {
            let action = {
                let view = LocalView::new(&self.state, id);
                behaviors::step(kind, &view, &self.state.params, &mut self.rng)
            };
            if let Some(mv) = self.apply_action(id, action, &mut report)? {
                requests.push((id, mv, self.state.modules[id.index()].mode));
            }
        }

        requests.shuffle(&mut self.rng);
        for (id, mv, mode) in requests {
            // A neighbour changed this module's mode after it asked to move;
            // the request belonged to the old mode and is withdrawn.
            if self.state.modules[id.index()].mode != mode {
                continue;
            }
            match self.state.validate_move(id, &mv)? {
                Ok(()) => {
                    self.state.relocate(id, mv.dst);
                    report.applied_moves.push(AppliedMove { id, mv });
                }
                Err(reason) => report.denied_moves.push(DeniedMove { id, mv, reason }),
            }
        }

        self.state.tick += 1;
        Ok(report)
    }

    fn apply_action(
        &mut self,
        id: ModuleId,
        action: Action,
        report: &mut TickReport,
    ) -> Result<Option<MoveCandidate>, EngineError> {
        let cell = self.state.modules[id.index()].cell;
        for w in &action.neighbor_writes {
            let target = self.state.module(w.target).ok_or(EngineError::UnknownModule(w.target))?;
            if !cell.is_neighbor(target.cell) {
                return Err(EngineError::NonLocalWrite { by: id, target: w.target });
            }
            if let Some(g) = w.growth {
                self.state.modules[w.target.index()].memory.growth = Some(g);
            }
            self.state.set_mode(w.target, w.mode, id, report);
        }
        if let Some(mem) = action.memory {
            self.state.modules[id.index()].memory = mem;
        }
        if let Some(mode) = action.mode {
            self.state.set_mode(id, mode, id, report);
        }
        if let Some(mv) = action.movement {
            if mv.src != cell {
                return Err(EngineError::StaleMove { id, mv });
            }
        }
        Ok(action.movement)
    }

    fn update_scent(&mut self) {
        let st = &mut self.state;
        if st.modules.is_empty() {
            return;
        }
        let graph = st.adjacency();
        for ch in Channel::ALL {
            if !st.behavior.uses_channel(ch) {
                continue;
            }
            let roles: Vec<Role> = st.modules.iter().map(|m| behaviors::scent_role(st.behavior, m.mode, ch)).collect();
            let prev: Vec<ScentValue> = st.modules.iter().map(|m| m.scent.get(ch)).collect();
            let next = if st.flags.instantaneous_scent {
                scent::instantaneous_channel(&prev, &roles, &graph, st.cap)
            } else {
                scent::step_channel(&prev, &roles, &graph, st.cap)
            };
            for (m, v) in st.modules.iter_mut().zip(next) {
                m.scent.set(ch, v);
            }
        }
        debug_assert!(CHANNEL_COUNT == Channel::ALL.len());
    }

    fn apply_commands(&mut self, report: &mut TickReport) {
        let now = self.state.tick;
        while let Some(change) = self.schedule.get(self.schedule_cursor).copied() {
            if change.tick > now {
                break;
            }
            self.schedule_cursor += 1;
            let cmd = Command::SetWeight { region: change.region, weight: change.weight };
            // Schedules are validated at load; a bad entry is skipped, not fatal.
            if self.apply_world_command(&cmd).is_ok() {
                report.commands.push(cmd);
            }
        }
        for cmd in std::mem::take(&mut self.pending) {
            if self.apply_world_command(&cmd).is_ok() {
                report.commands.push(cmd);
            }
        }
    }

    /// Validates a world-changing command and queues it for the next tick.
    pub fn enqueue_command(&mut self, cmd: Command) -> Result<Ack, CommandError> {
        if !cmd.is_world_command() {
            return Err(CommandError::NotAWorldCommand(cmd.kind()));
        }
        let mut probe = CommandTarget::of(&self.state);
        for queued in &self.pending {
            probe.apply(queued, &self.state, self.conserve_total)?;
        }
        probe.apply(&cmd, &self.state, self.conserve_total)?;
        self.pending.push(cmd);
        Ok(Ack { apply_tick: self.state.tick })
    }

    fn apply_world_command(&mut self, cmd: &Command) -> Result<(), CommandError> {
        let mut target = CommandTarget::of(&self.state);
        target.apply(cmd, &self.state, self.conserve_total)?;
        self.state.regions = target.regions;
        self.state.objects = target.objects;
        self.state.params = target.params;
        Ok(())
    }
}

/// The parts of a world that commands may change.
#[derive(Debug, Clone)]
struct CommandTarget {
    regions: Vec<Region>,
    objects: BTreeSet<CellCoord>,
    params: BehaviorParams,
}

impl CommandTarget {
    fn of(state: &WorldState) -> Self {
        Self { regions: state.regions.clone(), objects: state.objects.clone(), params: state.params.clone() }
    }

    fn apply(&mut self, cmd: &Command, state: &WorldState, conserve_total: Option<f64>) -> Result<(), CommandError> {
        match cmd {
            Command::SetWeight { region, weight } => {
                let (region, weight) = (*region, *weight);
                if region >= self.regions.len() {
                    return Err(CommandError::UnknownRegion(region));
                }
                if !weight.is_finite() || weight < 0.0 {
                    return Err(CommandError::InvalidWeight(weight));
                }
                match conserve_total {
                    Some(total) => {
                        if weight > total + 1e-9 {
                            return Err(CommandError::ExceedsTotal { weight, total });
                        }
                        let rest = total - weight;
                        let others: f64 =
                            self.regions.iter().enumerate().filter(|(i, _)| *i != region).map(|(_, r)| r.weight).sum();
                        let n_others = self.regions.len() - 1;
                        for (i, r) in self.regions.iter_mut().enumerate() {
                            if i == region {
                                r.weight = weight;
                            } else if others > 0.0 {
                                r.weight = rest * r.weight / others;
                            } else if n_others > 0 {
                                r.weight = rest / n_others as f64;
                            }
                        }
                    }
                    None => self.regions[region].weight = weight,
                }
            }
            Command::MoveObject { offset } => {
                let d = CellCoord::from(*offset);
                if !d.is_valid() {
                    return Err(CommandError::OffLattice(*offset));
                }
                let moved: BTreeSet<CellCoord> = self.objects.iter().map(|&c| c + d).collect();
                for &c in &moved {
                    if let Some(id) = state.module_at(c) {
                        return Err(CommandError::ObjectOverlap { cell: c, module: id });
                    }
                    if state.flags.ground && c.z < 0 {
                        return Err(CommandError::ObjectBelowGround(c));
                    }
                }
                self.objects = moved;
            }
            Command::SetParam { name, value } => {
                self.params.set(name, *value).map_err(CommandError::Param)?;
            }
            Command::Pause | Command::Resume | Command::Step { .. } => {
                return Err(CommandError::NotAWorldCommand(cmd.kind()));
            }
        }
        Ok(())
    }
}
