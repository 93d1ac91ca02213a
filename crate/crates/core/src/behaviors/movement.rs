use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::MoveCandidate;
use crate::scent::Channel;

use super::LocalView;

/// Moves down the scent gradient on `ch`.
///
/// Each legal roll is scored by the strongest scent next to its destination.
/// If the best score beats the module's own value, one of the best rolls is
/// picked uniformly; otherwise the module explores with a uniform random roll.
pub fn gradient_move<R: Rng + ?Sized>(view: &LocalView<'_>, ch: Channel, rng: &mut R) -> Option<MoveCandidate> {
    let moves = view.legal_moves();
    if moves.is_empty() {
        return None;
    }
    let scores: Vec<_> = moves.iter().map(|m| view.destination_score(m.dst, ch)).collect();
    let best = *scores.iter().min()?;
    if best < view.scent(ch) {
        let ties: Vec<MoveCandidate> =
            moves.iter().zip(&scores).filter(|(_, s)| **s == best).map(|(m, _)| *m).collect();
        ties.choose(rng).copied()
    } else {
        moves.choose(rng).copied()
    }
}

/// A uniformly random legal roll.
pub fn random_move<R: Rng + ?Sized>(view: &LocalView<'_>, rng: &mut R) -> Option<MoveCandidate> {
    view.legal_moves().choose(rng).copied()
}
