//! Hop-count gradient fields carried module to module.
//!
//! Emitters hold 0; propagating modules take one more than the smallest value
//! among their face-neighbours; the cap value means "no scent detected".
//! Updates read only the previous tick's values, so a field advances one hop
//! per tick. [`instantaneous_channel`] computes the converged field directly.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::lattice::{CellCoord, Occupancy};

pub type ScentValue = u16;

/// Default "no scent" sentinel.
pub const NO_SCENT: ScentValue = u16::MAX;

/// Number of scent channels tracked per module.
pub const CHANNEL_COUNT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Attracts searching modules towards seeds.
    Regular,
    /// Distance to the nearest branching node.
    Node,
}

impl Channel {
    pub const ALL: [Channel; CHANNEL_COUNT] = [Channel::Regular, Channel::Node];

    pub fn index(self) -> usize {
        match self {
            Channel::Regular => 0,
            Channel::Node => 1,
        }
    }
}

/// What a module does with one channel this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Emit,
    Propagate,
    Inert,
}

/// Per-module scent values, one per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScentValues(pub [ScentValue; CHANNEL_COUNT]);

impl ScentValues {
    pub fn uniform(v: ScentValue) -> Self {
        Self([v; CHANNEL_COUNT])
    }

    pub fn get(&self, ch: Channel) -> ScentValue {
        self.0[ch.index()]
    }

    pub fn set(&mut self, ch: Channel, v: ScentValue) {
        self.0[ch.index()] = v;
    }
}

impl Default for ScentValues {
    fn default() -> Self {
        Self::uniform(NO_SCENT)
    }
}

/// Undirected graph over dense module indices, stored as adjacency lists.
#[derive(Debug, Clone, Default)]
pub struct Adjacency {
    starts: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        let mut starts = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        starts.push(0);
        for l in lists {
            targets.extend_from_slice(l);
            starts.push(targets.len());
        }
        Self { starts, targets }
    }

    /// Builds from an edge list; both directions are inserted.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut lists = vec![Vec::new(); n];
        for &(a, b) in edges {
            lists[a].push(b);
            lists[b].push(a);
        }
        Self::from_lists(&lists)
    }

    pub fn len(&self) -> usize {
        self.starts.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.starts[i]..self.starts[i + 1]]
    }
}

/// One synchronous update of a channel from the previous tick's values.
/// Emitters count as 0 from the tick they start emitting.
pub fn step_channel(prev: &[ScentValue], roles: &[Role], graph: &Adjacency, cap: ScentValue) -> Vec<ScentValue> {
    debug_assert_eq!(prev.len(), graph.len());
    debug_assert_eq!(roles.len(), graph.len());
    (0..graph.len())
        .map(|i| match roles[i] {
            Role::Emit => 0,
            Role::Inert => prev[i],
            Role::Propagate => graph
                .neighbors(i)
                .iter()
                .map(|&j| if roles[j] == Role::Emit { 0 } else { prev[j] })
                .min()
                .map_or(prev[i], |m| m.saturating_add(1).min(cap)),
        })
        .collect()
}

/// Converged field for the current roles: exact hop distance from the
/// emitters through propagating modules. Inert modules keep their value.
pub fn instantaneous_channel(
    prev: &[ScentValue],
    roles: &[Role],
    graph: &Adjacency,
    cap: ScentValue,
) -> Vec<ScentValue> {
    let mut out: Vec<ScentValue> = roles
        .iter()
        .zip(prev)
        .map(|(r, &p)| match r {
            Role::Emit => 0,
            Role::Propagate => cap,
            Role::Inert => p,
        })
        .collect();
    let mut queue: VecDeque<usize> = (0..roles.len()).filter(|&i| roles[i] == Role::Emit).collect();
    while let Some(i) = queue.pop_front() {
        let next = out[i].saturating_add(1).min(cap);
        for &j in graph.neighbors(i) {
            if roles[j] == Role::Propagate && out[j] > next {
                out[j] = next;
                queue.push_back(j);
            }
        }
    }
    out
}

/// Exact breadth-first hop distances to the nearest emitter; `cap` if unreachable.
pub fn distance_oracle(graph: &Adjacency, emitters: &[usize], cap: ScentValue) -> Vec<ScentValue> {
    let mut dist = vec![cap; graph.len()];
    let mut queue = VecDeque::new();
    for &e in emitters {
        if dist[e] != 0 {
            dist[e] = 0;
            queue.push_back(e);
        }
    }
    while let Some(i) = queue.pop_front() {
        let next = dist[i].saturating_add(1).min(cap);
        for &j in graph.neighbors(i) {
            if dist[j] > next {
                dist[j] = next;
                queue.push_back(j);
            }
        }
    }
    dist
}

/// A module is on the outer surface when at least one face-neighbour cell is free.
pub fn is_surface<O: Occupancy + ?Sized>(space: &O, cell: CellCoord) -> bool {
    cell.neighbors().into_iter().any(|n| space.is_free(n))
}

/// Surface flags for a list of module cells.
pub fn surface_mask<O: Occupancy + ?Sized>(space: &O, cells: &[CellCoord]) -> Vec<bool> {
    cells.iter().map(|&c| is_surface(space, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Adjacency {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Adjacency::from_edges(n, &edges)
    }

    fn roles_with_emitters(n: usize, emitters: &[usize]) -> Vec<Role> {
        (0..n).map(|i| if emitters.contains(&i) { Role::Emit } else { Role::Propagate }).collect()
    }

    #[test]
    fn four_chain_settles_to_distances() {
        let g = path(4);
        let roles = roles_with_emitters(4, &[0]);
        let mut v = vec![NO_SCENT; 4];
        for _ in 0..3 {
            v = step_channel(&v, &roles, &g, NO_SCENT);
        }
        assert_eq!(v, vec![0, 1, 2, 3]);
    }

    #[test]
    fn one_hop_per_tick() {
        let g = path(4);
        let roles = roles_with_emitters(4, &[0]);
        let v1 = step_channel(&[NO_SCENT; 4], &roles, &g, NO_SCENT);
        assert_eq!(v1, vec![0, 1, NO_SCENT, NO_SCENT]);
        let v2 = step_channel(&v1, &roles, &g, NO_SCENT);
        assert_eq!(v2, vec![0, 1, 2, NO_SCENT]);
    }

    #[test]
    fn no_emitters_stays_capped() {
        let g = path(5);
        let roles = roles_with_emitters(5, &[]);
        let v = step_channel(&[NO_SCENT; 5], &roles, &g, NO_SCENT);
        assert!(v.iter().all(|&x| x == NO_SCENT));
    }

    #[test]
    fn inert_modules_hold_and_block() {
        let g = path(3);
        let roles = vec![Role::Emit, Role::Inert, Role::Propagate];
        let mut v = vec![NO_SCENT; 3];
        for _ in 0..5 {
            v = step_channel(&v, &roles, &g, NO_SCENT);
        }
        assert_eq!(v, vec![0, NO_SCENT, NO_SCENT]);
        assert_eq!(instantaneous_channel(&v, &roles, &g, NO_SCENT), v);
    }

    #[test]
    fn isolated_propagator_keeps_value() {
        let g = Adjacency::from_edges(1, &[]);
        let v = step_channel(&[7], &[Role::Propagate], &g, NO_SCENT);
        assert_eq!(v, vec![7]);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(distance_oracle(&path(5), &[0], NO_SCENT), vec![0, 1, 2, 3, 4]);
        assert_eq!(distance_oracle(&path(4), &[0, 1, 2, 3], NO_SCENT), vec![0; 4]);
        assert_eq!(distance_oracle(&path(7), &[0, 6], NO_SCENT), vec![0, 1, 2, 3, 2, 1, 0]);
        let disconnected = Adjacency::from_edges(3, &[(0, 1)]);
        assert_eq!(distance_oracle(&disconnected, &[0], 99), vec![0, 1, 99]);
    }

    #[test]
    fn surface_examples() {
        use std::collections::HashSet;
        let single: HashSet<_> = [CellCoord::ORIGIN].into_iter().collect();
        assert_eq!(surface_mask(&single, &[CellCoord::ORIGIN]), vec![true]);

        // origin plus two shells of neighbours: the centre is buried
        let mut ball: HashSet<CellCoord> = HashSet::new();
        ball.insert(CellCoord::ORIGIN);
        for n in CellCoord::ORIGIN.neighbors() {
            ball.insert(n);
            ball.extend(n.neighbors());
        }
        assert!(!is_surface(&ball, CellCoord::ORIGIN));
        assert!(CellCoord::ORIGIN.neighbors().iter().all(|n| !is_surface(&ball, *n)));

        let chain: Vec<_> = (0..5).map(|i| CellCoord::new(i, i, 0)).collect();
        let set: HashSet<_> = chain.iter().copied().collect();
        assert!(surface_mask(&set, &chain).into_iter().all(|s| s));
    }

    #[test]
    fn small_cap_saturates() {
        let g = path(6);
        let roles = roles_with_emitters(6, &[0]);
        let mut v = vec![3; 6];
        for _ in 0..6 {
            v = step_channel(&v, &roles, &g, 3);
        }
        assert_eq!(v, vec![0, 1, 2, 3, 3, 3]);
        assert_eq!(instantaneous_channel(&[3; 6], &roles, &g, 3), v);
    }
}
