//! Random configurations and brute-force oracles shared by the test targets.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rdsim_core::lattice::{CellCoord, MoveCandidate, Occupancy};
use rdsim_core::scenario::{grow_blob, BlobSpec};
use rdsim_core::scent::Adjacency;

pub fn c(x: i32, y: i32, z: i32) -> CellCoord {
    CellCoord::new(x, y, z)
}

/// Up to `max` distinct lattice cells drawn from the cube `[-r, r]^3`.
pub fn scattered_cells(rng: &mut ChaCha8Rng, max: usize, r: i32) -> BTreeSet<CellCoord> {
    let n = rng.gen_range(1..=max);
    let mut out = BTreeSet::new();
    while out.len() < n {
        let cell = c(rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if cell.is_valid() {
            out.insert(cell);
        }
    }
    out
}

/// A random connected cluster of `n` cells around the origin.
pub fn blob(rng: &mut ChaCha8Rng, n: usize) -> Vec<CellCoord> {
    let spec = BlobSpec { count: n, origin: CellCoord::ORIGIN, assign: Vec::new() };
    grow_blob(&spec, &HashSet::new(), &BTreeSet::new(), false, rng).expect("free space")
}

/// Face-adjacency graph over `cells` in list order.
pub fn adjacency(cells: &[CellCoord]) -> Adjacency {
    let index: HashMap<CellCoord, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let lists: Vec<Vec<usize>> =
        cells.iter().map(|c| c.neighbors().iter().filter_map(|n| index.get(n).copied()).collect()).collect();
    Adjacency::from_lists(&lists)
}

fn norm2(d: CellCoord) -> i64 {
    d.dot(d)
}

/// Every roll of the module at `src`, found by trying all (pivot, dst) pairs
/// in the surrounding box against the geometric definition.
pub fn brute_force_moves<O: Occupancy>(space: &O, src: CellCoord) -> Vec<MoveCandidate> {
    let mut out = Vec::new();
    let near = |centre: CellCoord, r: i32| {
        let mut cells = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let p = centre + c(x, y, z);
                    if p.is_valid() && p != centre {
                        cells.push(p);
                    }
                }
            }
        }
        cells
    };
    for pivot in near(src, 1) {
        let u = src - pivot;
        if norm2(u) != 2 || !space.has_module(pivot) {
            continue;
        }
        for dst in near(src, 2) {
            let v = dst - pivot;
            if norm2(v) != 2 || u.dot(v) != 1 {
                continue;
            }
            let corner = src + dst - pivot;
            let blocked =
                |cell: CellCoord| space.has_module(cell) || space.has_object(cell) || space.below_ground(cell);
            if !blocked(dst) && !blocked(corner) {
                out.push(MoveCandidate { src, pivot, dst });
            }
        }
    }
    out.sort_by_key(|m| (m.pivot, m.dst));
    out
}
