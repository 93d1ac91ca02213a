use crate::engine::{Memory, ModuleId, WorldState};
use crate::lattice::{self, CellCoord, MoveCandidate, Occupancy, Offset, OFFSETS};
use crate::scent::{self, Channel, ScentValue};

use super::Mode;

/// What one module can sense: itself, its occupied face-neighbours, the
/// cells around it, and a few sensors (ground and object contact, region
/// load for roots).
#[derive(Clone, Copy)]
pub struct LocalView<'a> {
    state: &'a WorldState,
    id: ModuleId,
}

/// An occupied face-neighbour as seen from the viewing module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub id: ModuleId,
    pub offset: Offset,
    pub cell: CellCoord,
    pub mode: Mode,
    pub scent: crate::scent::ScentValues,
}

impl Neighbor {
    pub fn value(&self, ch: Channel) -> ScentValue {
        self.scent.get(ch)
    }
}

impl<'a> LocalView<'a> {
    pub fn new(state: &'a WorldState, id: ModuleId) -> Self {
        Self { state, id }
    }

    fn record(&self) -> &'a crate::engine::ModuleRecord {
        &self.state.modules[self.id.index()]
    }

    pub fn id(&self) -> ModuleId {
        self.id
    }

    pub fn cell(&self) -> CellCoord {
        self.record().cell
    }

    pub fn mode(&self) -> Mode {
        self.record().mode
    }

    pub fn memory(&self) -> Memory {
        self.record().memory
    }

    pub fn scent(&self, ch: Channel) -> ScentValue {
        self.record().scent.get(ch)
    }

    pub fn cap(&self) -> ScentValue {
        self.state.cap
    }

    pub fn neighbor_at(&self, offset: Offset) -> Option<Neighbor> {
        let cell = self.cell() + offset;
        let id = self.state.module_at(cell)?;
        let m = &self.state.modules[id.index()];
        Some(Neighbor { id, offset, cell, mode: m.mode, scent: m.scent })
    }

    /// Occupied face-neighbours in offset order.
    pub fn neighbors(&self) -> impl Iterator<Item = Neighbor> + '_ {
        OFFSETS.into_iter().filter_map(move |o| self.neighbor_at(o))
    }

    /// No module, object or ground in `cell`.
    pub fn is_free(&self, cell: CellCoord) -> bool {
        self.state.is_free(cell)
    }

    /// Directions whose cell could take a module right now.
    pub fn free_directions(&self) -> Vec<Offset> {
        let here = self.cell();
        OFFSETS.into_iter().filter(|&o| self.state.is_free(here + o)).collect()
    }

    /// Some neighbour (or the module itself) carries scent on `ch`.
    pub fn scent_detected(&self, ch: Channel) -> bool {
        let cap = self.cap();
        self.scent(ch) < cap || self.neighbors().any(|n| n.value(ch) < cap)
    }

    pub fn legal_moves(&self) -> Vec<MoveCandidate> {
        lattice::enumerate_moves(self.state, self.cell()).unwrap_or_default()
    }

    pub fn touching_ground(&self) -> bool {
        self.state.flags.ground && self.cell().z == 0
    }

    /// Contact sensor: some face-neighbour cell belongs to the object.
    pub fn touching_object(&self) -> bool {
        let here = self.cell();
        OFFSETS.iter().any(|&o| self.state.objects.contains(&(here + o)))
    }

    /// Weight per active root in this root's region.
    pub fn region_load(&self) -> Option<f64> {
        let r = self.memory().region?;
        self.state.region_load(r as usize)
    }

    /// Strongest scent among the modules that would surround this module
    /// after moving to `dst` (its own current cell excluded).
    pub fn destination_score(&self, dst: CellCoord, ch: Channel) -> ScentValue {
        let here = self.cell();
        let surface_only = self.state.flags.surface_scent;
        dst.neighbors()
            .into_iter()
            .filter(|&c| c != here)
            .filter_map(|c| self.state.module_at(c).map(|id| (c, id)))
            .filter(|&(c, _)| !surface_only || scent::is_surface(self.state, c))
            .map(|(_, id)| self.state.modules[id.index()].scent.get(ch))
            .min()
            .unwrap_or(self.cap())
    }
}
