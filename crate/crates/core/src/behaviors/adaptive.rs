//! Legs under a table top that follow the load.
//!
//! Board modules never move. Roots watch the weight per active root in their
//! region: an overloaded inactive root may start a leg, an underloaded active
//! root may disband its leg. Free modules grow legs downwards from attracting
//! roots, one module per step, until a seed touches the ground.

use rand::seq::SliceRandom;
use rand::Rng;

use super::chain::{search, wake};
use super::{chance, Action, BehaviorParams, LocalView, Mode, Neighbor};

pub fn adaptive_step<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    match view.mode() {
        Mode::Iroot => {
            let load = view.region_load().unwrap_or(0.0);
            if load > params.f_max && chance(rng, params.p_max) {
                Action::become_(Mode::Aroot)
            } else {
                Action::none()
            }
        }
        Mode::Root => {
            let load = view.region_load().unwrap_or(0.0);
            if load < params.f_min && chance(rng, params.p_min) {
                disband_neighbors(view, Action::become_(Mode::Iroot))
            } else {
                Action::none()
            }
        }
        Mode::Sleep => wake(view, params, rng),
        Mode::Search => {
            let here = view.cell();
            let hosts: Vec<Neighbor> =
                view.neighbors().filter(|n| matches!(n.mode, Mode::Seed | Mode::Aroot) && here.z < n.cell.z).collect();
            match hosts.choose(rng) {
                Some(host) => {
                    let promoted = if host.mode == Mode::Seed { Mode::Final } else { Mode::Root };
                    Action::become_(Mode::Seed).write(host.id, promoted)
                }
                None => search(view, rng),
            }
        }
        Mode::Seed if view.touching_ground() => Action::become_(Mode::Final),
        Mode::Disband => disband_neighbors(view, Action::become_(Mode::Search)),
        _ => Action::none(),
    }
}

fn disband_neighbors(view: &LocalView<'_>, mut action: Action) -> Action {
    for n in view.neighbors() {
        if matches!(n.mode, Mode::Final | Mode::Seed) {
            action = action.write(n.id, Mode::Disband);
        }
    }
    action
}
