//! Measurements taken from snapshots and tick reports.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::behaviors::{BehaviorKind, BehaviorParams, Mode};
use crate::engine::connectivity;
use crate::engine::{Command, ModuleId, Snapshot, TickReport};
use crate::lattice::CellCoord;
use crate::scent::Channel;
use crate::trace::Trace;

pub const DEFAULT_QUIET_WINDOW: u64 = 25;

fn degrees(cells: &HashSet<CellCoord>) -> impl Iterator<Item = usize> + '_ {
    cells.iter().map(move |c| c.neighbors().iter().filter(|n| cells.contains(n)).count())
}

/// The modules form one path: connected, no vertex of degree above two, and
/// exactly two ends (or a single module).
pub fn is_single_chain(snapshot: &Snapshot) -> bool {
    let cells: HashSet<CellCoord> = snapshot.modules.iter().map(|m| m.cell).collect();
    match cells.len() {
        0 => false,
        1 => true,
        _ => {
            let mut ends = 0;
            for d in degrees(&cells) {
                match d {
                    1 => ends += 1,
                    2 => {}
                    _ => return false,
                }
            }
            ends == 2 && connectivity::is_connected(&cells)
        }
    }
}

/// A grown leg: a connected group of settled leg modules that touches an
/// active root and reaches the ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub region: Option<u16>,
    pub modules: usize,
}

/// Legs under the board. Only FINAL and SEED modules count as leg material,
/// so idle searchers next to two legs do not merge them.
pub fn legs(snapshot: &Snapshot) -> Vec<Leg> {
    let by_cell: HashMap<CellCoord, usize> = snapshot.modules.iter().enumerate().map(|(i, m)| (m.cell, i)).collect();
    let material: Vec<CellCoord> =
        snapshot.modules.iter().filter(|m| matches!(m.mode, Mode::Final | Mode::Seed)).map(|m| m.cell).collect();
    let mut out = Vec::new();
    for comp in connectivity::components(&material) {
        if !comp.iter().any(|c| c.z == 0) {
            continue;
        }
        let root = comp
            .iter()
            .flat_map(|c| c.neighbors())
            .filter_map(|n| by_cell.get(&n).map(|&i| &snapshot.modules[i]))
            .filter(|m| m.mode.is_active_root())
            .min_by_key(|m| m.id);
        if let Some(r) = root {
            out.push(Leg { region: r.memory.region, modules: comp.len() });
        }
    }
    out
}

pub fn count_legs(snapshot: &Snapshot) -> usize {
    legs(snapshot).len()
}

/// Leg count per region, indexed like `snapshot.regions`.
pub fn legs_by_region(snapshot: &Snapshot) -> Vec<usize> {
    let mut out = vec![0; snapshot.regions.len()];
    for leg in legs(snapshot) {
        if let Some(slot) = leg.region.and_then(|r| out.get_mut(r as usize)) {
            *slot += 1;
        }
    }
    out
}

/// TOUCH/TOUCHSEED modules beside the object, and the (object cell, face)
/// pairs they cover.
pub fn grasp_contacts(snapshot: &Snapshot, object: &BTreeSet<CellCoord>) -> (usize, usize) {
    let mut modules = 0;
    let mut faces = 0;
    for m in &snapshot.modules {
        if !matches!(m.mode, Mode::Touch | Mode::Touchseed) {
            continue;
        }
        let touching = m.cell.neighbors().iter().filter(|n| object.contains(n)).count();
        if touching > 0 {
            modules += 1;
            faces += touching;
        }
    }
    (modules, faces)
}

/// Smallest `t >= from_tick` with ticks `[t, t + window)` all quiet, where
/// `quiet[t]` describes step `t`. The window must lie inside the record.
pub fn stabilization_time(quiet: &[bool], from_tick: u64, window: u64) -> Option<u64> {
    let window = window as usize;
    let mut run = 0;
    for (t, &q) in quiet.iter().enumerate().skip(from_tick as usize) {
        if q {
            run += 1;
            if run >= window {
                return Some((t + 1 - window) as u64);
            }
        } else {
            run = 0;
        }
    }
    if window == 0 && from_tick as usize <= quiet.len() {
        return Some(from_tick);
    }
    None
}

/// Root activations (IROOT to AROOT) and deactivations (ROOT to IROOT).
fn is_root_switch(from: Mode, to: Mode) -> bool {
    matches!((from, to), (Mode::Iroot, Mode::Aroot) | (Mode::Root, Mode::Iroot))
}

/// Per-tick facts gathered while a run progresses or a trace is read back.
#[derive(Debug, Clone, Default)]
pub struct Activity {
    /// `quiet[t]`: step `t` moved nothing and changed no mode.
    pub quiet: Vec<bool>,
    /// Steps at whose start a world command was applied.
    pub command_ticks: Vec<u64>,
    /// Steps with a root activation or deactivation, once per switch.
    pub root_switch_ticks: Vec<u64>,
    pub applied_moves: u64,
    pub denied_moves: u64,
    pub transitions: u64,
    pub branching: BranchAudit,
}

/// Checks on the branching rules, taken from mode transitions.
#[derive(Debug, Clone, Default)]
pub struct BranchAudit {
    spawned: HashMap<ModuleId, u32>,
    /// FINAL to NODE transitions seen.
    pub nodes: u64,
    /// NODE to INODE transitions seen.
    pub retired: u64,
    /// Nodes that became NODE at a node-scent value not above the threshold.
    pub threshold_violations: u64,
    /// Nodes that retired after a seed count other than the branch count.
    pub spawn_mismatches: u64,
}

impl BranchAudit {
    fn observe(&mut self, report: &TickReport, params: &BehaviorParams) {
        for t in &report.mode_transitions {
            if t.to == Mode::Seed && t.by != t.id {
                if let Some(n) = self.spawned.get_mut(&t.by) {
                    *n += 1;
                }
            }
            if t.to == Mode::Node {
                self.nodes += 1;
                if t.scent.get(Channel::Node) <= params.node_threshold {
                    self.threshold_violations += 1;
                }
                self.spawned.insert(t.id, 0);
            }
            if t.from == Mode::Node && t.to == Mode::Inode {
                self.retired += 1;
                if self.spawned.remove(&t.id) != Some(params.branch_count as u32) {
                    self.spawn_mismatches += 1;
                }
            }
        }
    }
}

impl Activity {
    /// Starts tracking from the world as it stands in `initial`.
    pub fn starting_from(initial: &Snapshot) -> Activity {
        let mut activity = Activity::default();
        for m in &initial.modules {
            if m.mode == Mode::Node {
                activity.branching.spawned.insert(m.id, m.memory.spawned as u32);
            }
        }
        activity
    }

    /// Folds in the report of the next step; `params` are those in force
    /// during it.
    pub fn observe(&mut self, report: &TickReport, params: &BehaviorParams) {
        debug_assert_eq!(report.tick, self.quiet.len() as u64);
        self.quiet.push(report.is_quiet());
        if !report.commands.is_empty() {
            self.command_ticks.push(report.tick);
        }
        for t in &report.mode_transitions {
            if is_root_switch(t.from, t.to) {
                self.root_switch_ticks.push(report.tick);
            }
        }
        self.applied_moves += report.applied_moves.len() as u64;
        self.denied_moves += report.denied_moves.len() as u64;
        self.transitions += report.mode_transitions.len() as u64;
        self.branching.observe(report, params);
    }

    /// Replays the tick records of a trace, tracking parameter changes.
    pub fn from_trace(trace: &Trace) -> Activity {
        let mut params = trace.meta.scenario.params.clone();
        let mut activity = Activity::starting_from(&trace.snapshots[0]);
        for report in &trace.ticks {
            for c in &report.commands {
                if let Command::SetParam { name, value } = c {
                    // accepted once already, so this cannot fail
                    let _ = params.set(name, *value);
                }
            }
            activity.observe(report, &params);
        }
        activity
    }

    pub fn ticks(&self) -> u64 {
        self.quiet.len() as u64
    }

    /// Root switches during steps `[from, to)`.
    pub fn root_switches(&self, from: u64, to: u64) -> usize {
        self.root_switch_ticks.iter().filter(|&&t| t >= from && t < to).count()
    }

    /// Largest number of root switches in any `window`-step span of `[from, end)`.
    pub fn max_root_switches(&self, from: u64, window: u64) -> usize {
        let end = self.ticks();
        if end < from + window {
            return self.root_switches(from, end);
        }
        (from..=end - window).map(|s| self.root_switches(s, s + window)).max().unwrap_or(0)
    }
}

/// Behavior-appropriate key=value results of a run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Computes the summary of a finished run.
    pub fn compute(behavior: BehaviorKind, activity: &Activity, last: &Snapshot) -> Summary {
        let mut s = Summary::default();
        s.push("behavior", behavior);
        s.push("ticks", activity.ticks());
        s.push("modules", last.modules.len());
        s.push("applied_moves", activity.applied_moves);
        s.push("denied_moves", activity.denied_moves);
        s.push("mode_transitions", activity.transitions);
        let cells: Vec<CellCoord> = last.modules.iter().map(|m| m.cell).collect();
        s.push("connected", connectivity::is_connected(&cells));
        match behavior {
            BehaviorKind::Chain => {
                s.push("single_chain", is_single_chain(last));
            }
            BehaviorKind::Branch => {
                let b = &activity.branching;
                s.push("nodes", b.nodes);
                s.push("retired_nodes", b.retired);
                s.push("node_threshold_violations", b.threshold_violations);
                s.push("branch_count_mismatches", b.spawn_mismatches);
            }
            BehaviorKind::Adaptive => {
                s.push("legs", count_legs(last));
                for (r, n) in last.regions.iter().zip(legs_by_region(last)) {
                    s.push(format!("legs.{}", r.name), n);
                }
                for r in &last.regions {
                    s.push(format!("active_roots.{}", r.name), r.active_roots);
                }
                let shift = activity.command_ticks.last().copied().unwrap_or(0);
                s.push("shift_tick", shift);
                match stabilization_time(&activity.quiet, shift, DEFAULT_QUIET_WINDOW) {
                    Some(t) => {
                        s.push("stable_at", t);
                        s.push("stabilization_time", t - shift);
                        s.push("root_switches_after_stable", activity.root_switches(t, activity.ticks()));
                    }
                    None => {
                        s.push("stable_at", "none");
                        s.push("stabilization_time", "none");
                    }
                }
            }
            BehaviorKind::Grasp => {
                let object: BTreeSet<CellCoord> = last.objects.iter().copied().collect();
                let (m, f) = grasp_contacts(last, &object);
                s.push("touch_modules", m);
                s.push("touched_faces", f);
            }
        }
        s
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
