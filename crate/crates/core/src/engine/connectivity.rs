//! Connectivity of the module adjacency graph.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::lattice::CellCoord;

/// Would removing the module at `cell` split the structure?
///
/// Tries a local test first: if the occupied face-neighbours of `cell` are
/// connected to each other through cells of that same neighbourhood, the
/// removal cannot disconnect anything. Otherwise falls back to a breadth-first
/// search that stops once every neighbour has been reached.
pub fn is_cut_cell<V>(occupancy: &HashMap<CellCoord, V>, cell: CellCoord) -> bool {
    let nbrs: Vec<CellCoord> = cell.neighbors().into_iter().filter(|n| occupancy.contains_key(n)).collect();
    if nbrs.len() <= 1 {
        return false;
    }
    if ring_connected(&nbrs) {
        return false;
    }

    let targets: HashSet<CellCoord> = nbrs.iter().copied().collect();
    let mut seen: HashSet<CellCoord> = HashSet::with_capacity(64);
    seen.insert(cell);
    seen.insert(nbrs[0]);
    let mut queue = VecDeque::from([nbrs[0]]);
    let mut found = 1;
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if occupancy.contains_key(&n) && seen.insert(n) {
                if targets.contains(&n) {
                    found += 1;
                    if found == targets.len() {
                        return false;
                    }
                }
                queue.push_back(n);
            }
        }
    }
    true
}

/// Neighbours connected among themselves without leaving the neighbourhood.
fn ring_connected(nbrs: &[CellCoord]) -> bool {
    let mut reached = vec![false; nbrs.len()];
    reached[0] = true;
    let mut stack = vec![0usize];
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..nbrs.len() {
            if !reached[j] && nbrs[i].is_neighbor(nbrs[j]) {
                reached[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == nbrs.len()
}

/// Is the set of cells one face-connected component? Empty sets count as connected.
pub fn is_connected<'a>(cells: impl IntoIterator<Item = &'a CellCoord>) -> bool {
    let set: HashSet<CellCoord> = cells.into_iter().copied().collect();
    let Some(&start) = set.iter().next() else {
        return true;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Face-connected components, each sorted, ordered by their smallest cell.
pub fn components<'a>(cells: impl IntoIterator<Item = &'a CellCoord>) -> Vec<Vec<CellCoord>> {
    let set: HashSet<CellCoord> = cells.into_iter().copied().collect();
    let mut sorted: Vec<CellCoord> = set.iter().copied().collect();
    sorted.sort();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for start in sorted {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors() {
                if set.contains(&n) && seen.insert(n) {
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}
