//! Scenario files: what to simulate and how it starts.
//!
//! A scenario is a JSON document (`schema_version` 1). Initial modules come
//! from any mix of an explicit list, a random connected blob grown from the
//! run seed, and a table board with roots and a reservoir of free modules
//! hanging underneath it.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviors::{BehaviorKind, BehaviorParams, Mode};
use crate::engine::connectivity;
use crate::engine::{Flags, InitialModule, Memory, Region, SimRng, WeightChange, World, WorldSetup};
use crate::lattice::{CellCoord, Offset, OFFSETS};
use crate::scent::{ScentValue, NO_SCENT};

mod builtin;

pub use builtin::{builtin, builtin_names};

pub const SCHEMA_VERSION: u32 = 1;

fn default_cap() -> ScentValue {
    NO_SCENT
}

fn sleep() -> Mode {
    Mode::Sleep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub behavior: BehaviorKind,
    #[serde(default)]
    pub params: BehaviorParams,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default = "default_cap")]
    pub scent_cap: ScentValue,
    pub rng_seed: u64,
    /// Tick budget.
    pub ticks: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modules: Vec<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blob: Option<BlobSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board: Option<BoardSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<CellCoord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<RegionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight_schedule: Vec<WeightChange>,
    /// Keep the sum of region weights at this value when weights are steered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conserve_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub cell: CellCoord,
    #[serde(default = "sleep")]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<Offset>,
}

/// A random connected cluster grown by uniform attachment from `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub count: usize,
    #[serde(default = "origin")]
    pub origin: CellCoord,
    /// Modes for particular blob members; index 0 is the origin, the rest
    /// follow attachment order. Unlisted members sleep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assign: Vec<BlobAssign>,
}

fn origin() -> CellCoord {
    CellCoord::ORIGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobAssign {
    pub index: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<Offset>,
}

/// A flat table top of FIXED modules with uniformly spaced roots.
///
/// Board position `(i, j)` sits at cell `(i + j, i - j + height mod 2, height)`,
/// so grid neighbours are face neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardSpec {
    pub size: [u32; 2],
    pub height: i32,
    pub root_spacing: u32,
    /// Grid index of the first root along each axis; defaults to half the spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_offset: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<ReservoirSpec>,
}

/// Sleeping modules hung under the board around underside position `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub count: usize,
    pub center: [i32; 2],
}

/// Inclusive rectangle of board positions whose roots share a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    pub min: [i32; 2],
    pub max: [i32; 2],
    #[serde(default)]
    pub weight: f64,
}

impl RegionSpec {
    fn contains(&self, i: i32, j: i32) -> bool {
        (self.min[0]..=self.max[0]).contains(&i) && (self.min[1]..=self.max[1]).contains(&j)
    }
}

impl BoardSpec {
    pub fn cell(&self, i: i32, j: i32) -> CellCoord {
        CellCoord::new(i + j, i - j + self.height.rem_euclid(2), self.height)
    }

    /// Underside position `(i, j)` touches board positions `(i..=i+1, j..=j+1)`.
    pub fn underside_cell(&self, i: i32, j: i32) -> CellCoord {
        self.cell(i, j) + Offset { dx: 1, dy: 0, dz: -1 }
    }

    pub fn is_root(&self, i: i32, j: i32) -> bool {
        let s = self.root_spacing.max(1) as i32;
        let off = self.root_offset.unwrap_or(self.root_spacing / 2) as i32;
        i >= off && j >= off && (i - off) % s == 0 && (j - off) % s == 0
    }

    /// The two halves of the board split across the first axis.
    pub fn default_regions(&self) -> Vec<RegionSpec> {
        let [w, h] = [self.size[0] as i32, self.size[1] as i32];
        vec![
            RegionSpec { name: "first-half".into(), min: [0, 0], max: [w / 2 - 1, h - 1], weight: 0.0 },
            RegionSpec { name: "second-half".into(), min: [w / 2, 0], max: [w - 1, h - 1], weight: 0.0 },
        ]
    }

    fn reservoir_cells(&self) -> Vec<CellCoord> {
        let Some(r) = &self.reservoir else {
            return Vec::new();
        };
        let [w, h] = [self.size[0] as i32 - 1, self.size[1] as i32 - 1];
        let mut spots: Vec<(i32, i32)> = (0..w).flat_map(|i| (0..h).map(move |j| (i, j))).collect();
        spots.sort_by_key(|&(i, j)| ((i - r.center[0]).abs() + (j - r.center[1]).abs(), i, j));
        spots.into_iter().take(r.count).map(|(i, j)| self.underside_cell(i, j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Modules, objects and regions as they stand at tick 0.
#[derive(Debug, Clone)]
pub struct Layout {
    pub modules: Vec<InitialModule>,
    pub objects: BTreeSet<CellCoord>,
    pub regions: Vec<Region>,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Soft problems that do not stop a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.board.is_some() && self.params.f_min > 1.0 {
            out.push(format!(
                "f_min = {} exceeds one weight unit; a lone leg carrying a unit load may be disbanded",
                self.params.f_min
            ));
        }
        out
    }

    /// Full validation, including the generated layout.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut rng = SimRng::seed_from_u64(self.rng_seed);
        self.layout(&mut rng).map(|_| ())
    }

    fn region_specs(&self) -> Vec<RegionSpec> {
        match (&self.board, self.regions.is_empty()) {
            (Some(b), true) => b.default_regions(),
            _ => self.regions.clone(),
        }
    }

    /// Materializes the initial configuration, drawing blob randomness from `rng`.
    pub fn layout(&self, rng: &mut SimRng) -> Result<Layout, ScenarioError> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        problems.extend(self.params.problems());
        if self.scent_cap == 0 {
            problems.push("scent_cap must be positive".into());
        }

        let objects: BTreeSet<CellCoord> = self.objects.iter().copied().collect();
        for o in &objects {
            if !o.is_valid() {
                problems.push(format!("object cell {o} is off the lattice"));
            }
            if self.flags.ground && o.z < 0 {
                problems.push(format!("object cell {o} is below the ground"));
            }
        }

        let region_specs = self.region_specs();
        let mut modules: Vec<InitialModule> = Vec::new();
        for m in &self.modules {
            modules.push(InitialModule {
                cell: m.cell,
                mode: m.mode,
                memory: Memory { growth: m.growth, ..Memory::default() },
            });
        }

        if let Some(blob) = &self.blob {
            let taken: HashSet<CellCoord> = modules.iter().map(|m| m.cell).collect();
            match grow_blob(blob, &taken, &objects, self.flags.ground, rng) {
                Ok(cells) => {
                    let mut blob_modules: Vec<InitialModule> = cells
                        .into_iter()
                        .map(|cell| InitialModule { cell, mode: Mode::Sleep, memory: Memory::default() })
                        .collect();
                    for a in &blob.assign {
                        match blob_modules.get_mut(a.index) {
                            Some(m) => {
                                m.mode = a.mode;
                                m.memory.growth = a.growth;
                            }
                            None => problems.push(format!("blob assignment index {} >= count {}", a.index, blob.count)),
                        }
                    }
                    modules.extend(blob_modules);
                }
                Err(e) => problems.push(e),
            }
        }

        if let Some(board) = &self.board {
            if board.size[0] == 0 || board.size[1] == 0 {
                problems.push("board size must be positive".into());
            }
            for i in 0..board.size[0] as i32 {
                for j in 0..board.size[1] as i32 {
                    let cell = board.cell(i, j);
                    if board.is_root(i, j) {
                        match region_specs.iter().position(|r| r.contains(i, j)) {
                            Some(r) => modules.push(InitialModule {
                                cell,
                                mode: Mode::Iroot,
                                memory: Memory { region: Some(r as u16), ..Memory::default() },
                            }),
                            None => problems.push(format!("root at board position ({i}, {j}) lies in no region")),
                        }
                    } else {
                        modules.push(InitialModule { cell, mode: Mode::Fixed, memory: Memory::default() });
                    }
                }
            }
            for cell in board.reservoir_cells() {
                modules.push(InitialModule { cell, mode: Mode::Sleep, memory: Memory::default() });
            }
            if let Some(r) = &board.reservoir {
                let room = (board.size[0].saturating_sub(1) * board.size[1].saturating_sub(1)) as usize;
                if r.count > room {
                    problems.push(format!("reservoir of {} does not fit under the board ({room} spots)", r.count));
                }
            }
        } else if !self.regions.is_empty() {
            problems.push("regions need a board".into());
        }

        if modules.is_empty() {
            problems.push("no modules".into());
        }

        let mut seen = HashSet::new();
        for m in &modules {
            if !m.cell.is_valid() {
                problems.push(format!("module cell {} is off the lattice", m.cell));
            }
            if self.flags.ground && m.cell.z < 0 {
                problems.push(format!("module cell {} is below the ground", m.cell));
            }
            if !seen.insert(m.cell) {
                problems.push(format!("two modules overlap at {}", m.cell));
            }
            if objects.contains(&m.cell) {
                problems.push(format!("module at {} overlaps an object", m.cell));
            }
            if !self.behavior.modes().contains(&m.mode) {
                problems.push(format!("mode {} is not used by the {} behavior", m.mode, self.behavior));
            }
            if matches!(m.mode, Mode::Root | Mode::Iroot | Mode::Aroot) && m.memory.region.is_none() {
                problems.push(format!("root mode at {} outside the board", m.cell));
            }
        }
        if !modules.is_empty() && !connectivity::is_connected(modules.iter().map(|m| &m.cell)) {
            problems.push("initial configuration is not connected".into());
        }

        let mut last = 0;
        for w in &self.weight_schedule {
            if w.tick < last {
                problems.push(format!("weight schedule goes back in time at tick {}", w.tick));
            }
            last = w.tick;
            if w.region >= region_specs.len() {
                problems.push(format!("weight schedule names unknown region {}", w.region));
            }
            if !w.weight.is_finite() || w.weight < 0.0 {
                problems.push(format!("weight {} must be finite and non-negative", w.weight));
            }
        }
        if let Some(t) = self.conserve_total {
            let sum: f64 = region_specs.iter().map(|r| r.weight).sum();
            if !t.is_finite() || t < 0.0 {
                problems.push(format!("conserve_total {t} must be finite and non-negative"));
            } else if !region_specs.is_empty() && (sum - t).abs() > 1e-9 {
                problems.push(format!("initial region weights sum to {sum}, not the conserved total {t}"));
            }
        }

        if !problems.is_empty() {
            return Err(ScenarioError::Invalid(problems));
        }
        let regions = region_specs.into_iter().map(|r| Region { name: r.name, weight: r.weight }).collect();
        Ok(Layout { modules, objects, regions })
    }

    /// Builds the world for this scenario.
    pub fn build(&self) -> Result<World, ScenarioError> {
        let mut rng = SimRng::seed_from_u64(self.rng_seed);
        let layout = self.layout(&mut rng)?;
        let setup = WorldSetup {
            behavior: self.behavior,
            params: self.params.clone(),
            flags: self.flags,
            scent_cap: self.scent_cap,
            modules: layout.modules,
            objects: layout.objects,
            regions: layout.regions,
            weight_schedule: self.weight_schedule.clone(),
            conserve_total: self.conserve_total,
        };
        World::new(setup, rng).map_err(|e| ScenarioError::Invalid(vec![e.to_string()]))
    }
}

/// Grows `spec.count` connected cells from `spec.origin`: each step picks a
/// member and a face uniformly and attaches there if the cell is free.
pub fn grow_blob(
    spec: &BlobSpec,
    taken: &HashSet<CellCoord>,
    objects: &BTreeSet<CellCoord>,
    ground: bool,
    rng: &mut impl Rng,
) -> Result<Vec<CellCoord>, String> {
    if spec.count == 0 {
        return Ok(Vec::new());
    }
    let free = |c: &CellCoord| !taken.contains(c) && !objects.contains(c) && !(ground && c.z < 0);
    if !spec.origin.is_valid() || !free(&spec.origin) {
        return Err(format!("blob origin {} is not a free lattice cell", spec.origin));
    }
    let mut cells = vec![spec.origin];
    let mut members: HashSet<CellCoord> = HashSet::from([spec.origin]);
    let mut attempts = 0usize;
    while cells.len() < spec.count {
        attempts += 1;
        if attempts > spec.count * 10_000 {
            return Err(format!("could not grow a blob of {} modules", spec.count));
        }
        let base = *cells.choose(rng).expect("non-empty");
        let cand = base + OFFSETS[rng.gen_range(0..OFFSETS.len())];
        if free(&cand) && members.insert(cand) {
            cells.push(cand);
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(body: &str) -> String {
        format!(r#"{{"schema_version":1,"name":"t","behavior":"chain","rng_seed":1,"ticks":10{body}}}"#)
    }

    #[test]
    fn empty_module_list_is_rejected() {
        let err = parse_scenario(&minimal("")).unwrap_err();
        assert_eq!(err, ScenarioError::Invalid(vec!["no modules".into()]));
    }

    #[test]
    fn overlap_is_rejected() {
        let err = parse_scenario(&minimal(r#","modules":[{"cell":[0,0,0]},{"cell":[0,0,0]}]"#)).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn parity_and_connectivity_are_checked() {
        let err = parse_scenario(&minimal(r#","modules":[{"cell":[1,0,0]}]"#)).unwrap_err();
        assert!(err.to_string().contains("off the lattice"));
        let err = parse_scenario(&minimal(r#","modules":[{"cell":[0,0,0]},{"cell":[4,0,0]}]"#)).unwrap_err();
        assert!(err.to_string().contains("not connected"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_scenario("{\n  \"schema_version\": 1,\n  oops\n}").unwrap_err();
        match err {
            ScenarioError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn foreign_modes_are_rejected() {
        let err = parse_scenario(&minimal(r#","modules":[{"cell":[0,0,0],"mode":"TOUCH"}]"#)).unwrap_err();
        assert!(err.to_string().contains("not used by the chain behavior"));
    }

    #[test]
    fn blob_is_connected_and_reproducible() {
        let spec = BlobSpec { count: 40, origin: CellCoord::ORIGIN, assign: vec![] };
        let mut a = SimRng::seed_from_u64(3);
        let mut b = SimRng::seed_from_u64(3);
        let x = grow_blob(&spec, &HashSet::new(), &BTreeSet::new(), false, &mut a).unwrap();
        let y = grow_blob(&spec, &HashSet::new(), &BTreeSet::new(), false, &mut b).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.len(), 40);
        assert!(connectivity::is_connected(&x));
        assert_eq!(x.iter().collect::<HashSet<_>>().len(), 40);
    }

    #[test]
    fn board_geometry() {
        let b = BoardSpec { size: [6, 6], height: 3, root_spacing: 3, root_offset: None, reservoir: None };
        assert!(b.cell(2, 5).is_valid());
        assert!(b.cell(0, 0).is_neighbor(b.cell(1, 0)));
        assert!(b.cell(0, 0).is_neighbor(b.cell(0, 1)));
        let u = b.underside_cell(2, 2);
        for (i, j) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
            assert!(u.is_neighbor(b.cell(i, j)));
        }
        assert!(b.is_root(1, 1) && b.is_root(4, 1) && !b.is_root(2, 1));
    }
}
