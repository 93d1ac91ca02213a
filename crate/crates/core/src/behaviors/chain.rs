//! Growing a single one-module-thick chain.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::Offset;
use crate::scent::Channel;

use super::{chance, gradient_move, Action, BehaviorParams, LocalView, Mode, NeighborWrite};

pub fn chain_step<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    match view.mode() {
        Mode::Sleep => wake(view, params, rng),
        Mode::Search => search(view, rng),
        Mode::Seed => extend_seed(view, params, rng, |m| m != Mode::Final),
        _ => Action::none(),
    }
}

/// Sleeping modules wake on scent, or occasionally become a seed themselves.
pub(super) fn wake<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    if view.scent_detected(Channel::Regular) {
        Action::become_(Mode::Search)
    } else if chance(rng, params.seed_wake_probability) {
        Action::become_(Mode::Seed)
    } else {
        Action::none()
    }
}

/// Follow the regular scent while there is one to follow.
pub(super) fn search<R: Rng + ?Sized>(view: &LocalView<'_>, rng: &mut R) -> Action {
    if !view.scent_detected(Channel::Regular) {
        return Action::none();
    }
    Action::moving(gradient_move(view, Channel::Regular, rng))
}

/// Picks a growth direction among the free neighbour cells, preferring
/// those along `bias` when one is given.
pub(super) fn pick_growth<R: Rng + ?Sized>(
    view: &LocalView<'_>,
    bias: Option<[f64; 3]>,
    rng: &mut R,
) -> Option<Offset> {
    let free = view.free_directions();
    if let Some(b) = bias {
        let along: Vec<Offset> = free.iter().copied().filter(|o| o.dot_f64(b) > 0.0).collect();
        if let Some(o) = along.choose(rng) {
            return Some(*o);
        }
    }
    free.choose(rng).copied()
}

/// A seed emits scent; when a module shows up in its growth cell, seedhood
/// (and the growth direction) passes to it and the seed settles.
pub(super) fn extend_seed<R: Rng + ?Sized>(
    view: &LocalView<'_>,
    params: &BehaviorParams,
    rng: &mut R,
    joins: impl Fn(Mode) -> bool,
) -> Action {
    let mut memory = view.memory();
    let mut action = Action::none();
    let growth = match memory.growth {
        Some(g) => g,
        None => match pick_growth(view, params.bias, rng) {
            Some(g) => {
                memory.growth = Some(g);
                action.memory = Some(memory);
                g
            }
            None => return action,
        },
    };
    if let Some(n) = view.neighbor_at(growth) {
        if joins(n.mode) {
            action.neighbor_writes.push(NeighborWrite { target: n.id, mode: Mode::Seed, growth: Some(growth) });
            action.mode = Some(Mode::Final);
        }
    }
    action
}
