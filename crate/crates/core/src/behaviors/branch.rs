//! Recursive branching: chains that sprout nodes, nodes that sprout chains.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::OFFSETS;
use crate::scent::Channel;

use super::chain::{extend_seed, search, wake};
use super::{Action, BehaviorParams, LocalView, Mode, Neighbor, NeighborWrite};

pub fn branch_step<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    match view.mode() {
        Mode::Sleep => wake(view, params, rng),
        Mode::Search => search(view, rng),
        Mode::Seed => extend_seed(view, params, rng, |m| matches!(m, Mode::Sleep | Mode::Search)),
        Mode::Final => {
            // A value at the cap carries no information yet, so only a
            // detected-but-weak node scent starts a new node.
            let v = view.scent(Channel::Node);
            if v > params.node_threshold && v < view.cap() {
                let mut memory = view.memory();
                memory.spawned = 0;
                memory.used_dirs = 0;
                Action { mode: Some(Mode::Node), memory: Some(memory), ..Action::none() }
            } else {
                Action::none()
            }
        }
        Mode::Node => spawn(view, params, rng),
        _ => Action::none(),
    }
}

/// Turns one adjacent searcher, in a direction not used before, into the seed
/// of a new branch growing away from the node. Goes inactive after
/// `branch_count` spawns.
fn spawn<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    let mut memory = view.memory();
    if memory.spawned >= params.branch_count {
        return Action::become_(Mode::Inode);
    }
    let candidates: Vec<Neighbor> = view
        .neighbors()
        .filter(|n| n.mode == Mode::Search && memory.used_dirs & (1 << n.offset.index()) == 0)
        .collect();
    let Some(pick) = candidates.choose(rng) else {
        return Action::none();
    };
    debug_assert!(OFFSETS.contains(&pick.offset));
    memory.used_dirs |= 1 << pick.offset.index();
    memory.spawned += 1;
    let mut action = Action { memory: Some(memory), ..Action::none() };
    action.neighbor_writes.push(NeighborWrite { target: pick.id, mode: Mode::Seed, growth: Some(pick.offset) });
    if memory.spawned >= params.branch_count {
        action.mode = Some(Mode::Inode);
    }
    action
}
