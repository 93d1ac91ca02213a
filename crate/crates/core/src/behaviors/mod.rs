//! Per-module finite-state machines.
//!
//! Every behavior is a step function from a [`LocalView`] (the module, its
//! face-neighbours and its sensors) to an [`Action`]. The engine calls one
//! step per module per tick in a random order and applies mode and memory
//! writes immediately; move requests are applied after the pass.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Memory, ModuleId};
use crate::lattice::{MoveCandidate, Offset};
use crate::scent::{Channel, Role};

mod adaptive;
mod branch;
mod chain;
mod grasp;
mod movement;
mod view;

#[cfg(test)]
mod examples;

pub use adaptive::adaptive_step;
pub use branch::branch_step;
pub use chain::chain_step;
pub use grasp::grasp_step;
pub use movement::{gradient_move, random_move};
pub use view::{LocalView, Neighbor};

/// A module's current FSM state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Sleep,
    Search,
    Seed,
    Final,
    Node,
    Inode,
    Fixed,
    Root,
    Iroot,
    Aroot,
    Disband,
    Touch,
    Touchseed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sleep => "SLEEP",
            Mode::Search => "SEARCH",
            Mode::Seed => "SEED",
            Mode::Final => "FINAL",
            Mode::Node => "NODE",
            Mode::Inode => "INODE",
            Mode::Fixed => "FIXED",
            Mode::Root => "ROOT",
            Mode::Iroot => "IROOT",
            Mode::Aroot => "AROOT",
            Mode::Disband => "DISBAND",
            Mode::Touch => "TOUCH",
            Mode::Touchseed => "TOUCHSEED",
        }
    }

    /// Board roots that currently share their region's weight.
    pub fn is_active_root(self) -> bool {
        matches!(self, Mode::Root | Mode::Aroot)
    }

    /// Part of the fixed table top in the adaptive behavior.
    pub fn is_board(self) -> bool {
        matches!(self, Mode::Fixed | Mode::Root | Mode::Iroot | Mode::Aroot)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BehaviorKind {
    Chain,
    Branch,
    Adaptive,
    Grasp,
}

impl BehaviorKind {
    pub fn name(self) -> &'static str {
        match self {
            BehaviorKind::Chain => "chain",
            BehaviorKind::Branch => "branch",
            BehaviorKind::Adaptive => "adaptive",
            BehaviorKind::Grasp => "grasp",
        }
    }

    /// Modes this behavior may put a module in.
    pub fn modes(self) -> &'static [Mode] {
        use Mode::*;
        match self {
            BehaviorKind::Chain => &[Sleep, Search, Seed, Final],
            BehaviorKind::Branch => &[Sleep, Search, Seed, Final, Node, Inode],
            BehaviorKind::Adaptive => &[Fixed, Iroot, Aroot, Root, Sleep, Search, Seed, Final, Disband],
            BehaviorKind::Grasp => &[Sleep, Search, Seed, Final, Touch, Touchseed],
        }
    }

    pub fn uses_channel(self, ch: Channel) -> bool {
        match ch {
            Channel::Regular => true,
            Channel::Node => self == BehaviorKind::Branch,
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scent role of a module in a given mode, per channel.
pub fn scent_role(kind: BehaviorKind, mode: Mode, ch: Channel) -> Role {
    use Mode::*;
    use Role::*;
    match (kind, ch) {
        (BehaviorKind::Chain, Channel::Regular) => match mode {
            Seed => Emit,
            Search | Final => Propagate,
            _ => Inert,
        },
        (BehaviorKind::Branch, Channel::Regular) => match mode {
            Seed | Node => Emit,
            Search | Final | Inode => Propagate,
            _ => Inert,
        },
        (BehaviorKind::Branch, Channel::Node) => match mode {
            Node | Inode => Emit,
            Search | Seed | Final => Propagate,
            _ => Inert,
        },
        (BehaviorKind::Adaptive, Channel::Regular) => match mode {
            Aroot | Seed => Emit,
            Search | Final | Fixed | Root | Iroot | Disband => Propagate,
            _ => Inert,
        },
        (BehaviorKind::Grasp, Channel::Regular) => match mode {
            Seed | Touchseed => Emit,
            Search | Final | Touch => Propagate,
            _ => Inert,
        },
        _ => Inert,
    }
}

/// Tunable behavior parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorParams {
    /// Node-scent distance beyond which a FINAL module becomes a node.
    pub node_threshold: u16,
    /// Seeds a node spawns before going inactive.
    pub branch_count: u8,
    /// Chance per tick that an overloaded inactive root starts a leg.
    pub p_max: f64,
    /// Chance per tick that an underloaded root disbands its leg.
    pub p_min: f64,
    /// Load above which inactive roots may activate.
    pub f_max: f64,
    /// Load below which active roots may disband.
    pub f_min: f64,
    /// Rough direction of the grasp target, or preferred chain growth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<[f64; 3]>,
    /// Chance per tick that a sleeping module turns itself into a seed.
    pub seed_wake_probability: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            node_threshold: 12,
            branch_count: 6,
            p_max: 0.05,
            p_min: 0.05,
            f_max: 2.0,
            f_min: 1.0,
            bias: None,
            seed_wake_probability: 0.0,
        }
    }
}

impl BehaviorParams {
    /// Hard errors that make the parameter set unusable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, p) in
            [("p_max", self.p_max), ("p_min", self.p_min), ("seed_wake_probability", self.seed_wake_probability)]
        {
            if !(0.0..=1.0).contains(&p) {
                out.push(format!("{name} = {p} is not a probability"));
            }
        }
        for (name, f) in [("f_max", self.f_max), ("f_min", self.f_min)] {
            if !f.is_finite() || f < 0.0 {
                out.push(format!("{name} = {f} must be a finite non-negative weight"));
            }
        }
        if self.f_min > self.f_max {
            out.push(format!("f_min = {} exceeds f_max = {}", self.f_min, self.f_max));
        }
        if self.branch_count as usize > 12 {
            out.push(format!("branch_count = {} exceeds the 12 faces of a module", self.branch_count));
        }
        if let Some(b) = self.bias {
            if !b.iter().all(|c| c.is_finite()) || b.iter().all(|c| *c == 0.0) {
                out.push(format!("bias {b:?} must be a finite nonzero vector"));
            }
        }
        out
    }

    /// Sets one named parameter.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        let mut next = self.clone();
        let int = |v: f64, max: f64| -> Result<f64, String> {
            if v.fract() != 0.0 || v < 0.0 || v > max {
                Err(format!("{name} needs an integer in 0..={max}, got {v}"))
            } else {
                Ok(v)
            }
        };
        match name {
            "node_threshold" => next.node_threshold = int(value, u16::MAX as f64 - 1.0)? as u16,
            "branch_count" => next.branch_count = int(value, 12.0)? as u8,
            "p_max" => next.p_max = value,
            "p_min" => next.p_min = value,
            "f_max" => next.f_max = value,
            "f_min" => next.f_min = value,
            "seed_wake_probability" => next.seed_wake_probability = value,
            "bias_x" | "bias_y" | "bias_z" => {
                let mut b = next.bias.unwrap_or([0.0; 3]);
                b[match name {
                    "bias_x" => 0,
                    "bias_y" => 1,
                    _ => 2,
                }] = value;
                next.bias = Some(b);
            }
            _ => return Err(format!("unknown parameter '{name}'")),
        }
        if let Some(p) = next.problems().into_iter().next() {
            return Err(p);
        }
        *self = next;
        Ok(())
    }
}

/// Mode (and optionally growth direction) written into a face-neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborWrite {
    pub target: ModuleId,
    pub mode: Mode,
    pub growth: Option<Offset>,
}

/// Everything one behavior step asks for.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Action {
    pub movement: Option<MoveCandidate>,
    pub mode: Option<Mode>,
    pub memory: Option<Memory>,
    pub neighbor_writes: Vec<NeighborWrite>,
}

impl Action {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn become_(mode: Mode) -> Self {
        Self { mode: Some(mode), ..Self::default() }
    }

    pub fn moving(m: Option<MoveCandidate>) -> Self {
        Self { movement: m, ..Self::default() }
    }

    pub fn write(mut self, target: ModuleId, mode: Mode) -> Self {
        self.neighbor_writes.push(NeighborWrite { target, mode, growth: None });
        self
    }

    pub fn is_noop(&self) -> bool {
        self.movement.is_none() && self.mode.is_none() && self.memory.is_none() && self.neighbor_writes.is_empty()
    }
}

/// Runs one step of `kind` for the module behind `view`.
pub fn step<R: Rng + ?Sized>(kind: BehaviorKind, view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    match kind {
        BehaviorKind::Chain => chain_step(view, params, rng),
        BehaviorKind::Branch => branch_step(view, params, rng),
        BehaviorKind::Adaptive => adaptive_step(view, params, rng),
        BehaviorKind::Grasp => grasp_step(view, params, rng),
    }
}

/// Bernoulli draw that consumes randomness only for non-trivial probabilities.
pub(crate) fn chance<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.gen_bool(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip_through_json() {
        for m in [Mode::Sleep, Mode::Inode, Mode::Aroot, Mode::Touchseed] {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(s, format!("\"{}\"", m.name()));
            assert_eq!(serde_json::from_str::<Mode>(&s).unwrap(), m);
        }
    }

    #[test]
    fn every_emitter_mode_is_declared() {
        for kind in [BehaviorKind::Chain, BehaviorKind::Branch, BehaviorKind::Adaptive, BehaviorKind::Grasp] {
            for ch in Channel::ALL {
                for m in [
                    Mode::Sleep,
                    Mode::Search,
                    Mode::Seed,
                    Mode::Final,
                    Mode::Node,
                    Mode::Inode,
                    Mode::Fixed,
                    Mode::Root,
                    Mode::Iroot,
                    Mode::Aroot,
                    Mode::Disband,
                    Mode::Touch,
                    Mode::Touchseed,
                ] {
                    if scent_role(kind, m, ch) != Role::Inert {
                        assert!(kind.modes().contains(&m), "{kind} {m}");
                        assert!(kind.uses_channel(ch));
                    }
                }
            }
        }
    }

    #[test]
    fn sleep_is_inert_everywhere() {
        for kind in [BehaviorKind::Chain, BehaviorKind::Branch, BehaviorKind::Adaptive, BehaviorKind::Grasp] {
            for ch in Channel::ALL {
                assert_eq!(scent_role(kind, Mode::Sleep, ch), Role::Inert);
            }
        }
    }

    #[test]
    fn params_defaults_and_setters() {
        let mut p = BehaviorParams::default();
        assert!(p.problems().is_empty());
        p.set("p_max", 0.2).unwrap();
        assert_eq!(p.p_max, 0.2);
        assert!(p.set("p_min", 1.5).is_err());
        assert!(p.set("f_min", 3.0).is_err());
        assert!(p.set("branch_count", 2.5).is_err());
        assert!(p.set("nope", 1.0).is_err());
        p.set("bias_z", 1.0).unwrap();
        assert_eq!(p.bias, Some([0.0, 0.0, 1.0]));
        assert_eq!(p.p_min, 0.05);
    }

    #[test]
    fn chance_extremes_draw_nothing() {
        use rand::SeedableRng;
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut b = a.clone();
        assert!(!chance(&mut a, 0.0));
        assert!(chance(&mut a, 1.0));
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }
}
