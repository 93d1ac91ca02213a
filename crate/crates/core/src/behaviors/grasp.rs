//! Fingers that grow towards an object and then wrap around it.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::MoveCandidate;

use super::chain::{search, wake};
use super::{random_move, Action, BehaviorParams, LocalView, Mode, Neighbor};

pub fn grasp_step<R: Rng + ?Sized>(view: &LocalView<'_>, params: &BehaviorParams, rng: &mut R) -> Action {
    match view.mode() {
        Mode::Sleep => wake(view, params, rng),
        Mode::Search => {
            let seeds: Vec<Neighbor> =
                view.neighbors().filter(|n| matches!(n.mode, Mode::Seed | Mode::Touchseed)).collect();
            match seeds.choose(rng) {
                Some(seed) => found_seed(view, seed, params.bias, rng),
                None => search(view, rng),
            }
        }
        _ => Action::none(),
    }
}

fn found_seed<R: Rng + ?Sized>(view: &LocalView<'_>, seed: &Neighbor, bias: Option<[f64; 3]>, rng: &mut R) -> Action {
    if view.touching_object() {
        return Action::become_(Mode::Touchseed).write(seed.id, Mode::Touch);
    }
    if seed.mode == Mode::Seed {
        if let Some(b) = bias {
            if (view.cell() - seed.cell).dot_f64(b) > 0.0 {
                return Action::become_(Mode::Seed).write(seed.id, Mode::Final);
            }
            // roll to a spot beside the seed on the object side
            let ahead: Vec<MoveCandidate> = view
                .legal_moves()
                .into_iter()
                .filter(|m| m.dst.is_neighbor(seed.cell) && (m.dst - seed.cell).dot_f64(b) > 0.0)
                .collect();
            if let Some(m) = ahead.choose(rng) {
                return Action::moving(Some(*m));
            }
        }
    }
    Action::moving(random_move(view, rng))
}
