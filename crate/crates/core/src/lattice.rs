//! Geometry of the rhombic-dodecahedral packing.
//!
//! Module centres sit on the face-centred cubic lattice: integer triples
//! `(x, y, z)` with `x + y + z` even. Each of the twelve rhombic faces of a
//! module points at one of the twelve offsets `(±1, ±1, 0)` (and
//! permutations), so face adjacency and rolling are exact integer arithmetic.
//!
//! A roll carries a module from one face of a stationary pivot to an
//! edge-adjacent face of the same pivot (a 120° rotation about the shared
//! edge). Two pivot faces `u`, `v` share an edge iff `u · v = 1`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer FCC coordinate of one module-sized cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 3]", into = "[i32; 3]")]
pub struct CellCoord {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl CellCoord {
    pub const ORIGIN: CellCoord = CellCoord::new(0, 0, 0);

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    /// `true` when the coordinate lies on the FCC lattice.
    pub fn is_valid(self) -> bool {
        (self.x + self.y + self.z).rem_euclid(2) == 0
    }

    pub fn neighbor(self, offset: Offset) -> CellCoord {
        self + offset
    }

    /// The twelve face-neighbours, in offset order.
    pub fn neighbors(self) -> [CellCoord; 12] {
        OFFSETS.map(|o| self + o)
    }

    pub fn dot(self, other: CellCoord) -> i64 {
        self.x as i64 * other.x as i64 + self.y as i64 * other.y as i64 + self.z as i64 * other.z as i64
    }

    pub fn dot_f64(self, v: [f64; 3]) -> f64 {
        self.x as f64 * v[0] + self.y as f64 * v[1] + self.z as f64 * v[2]
    }

    /// Offset from `self` to `other` when they are face-neighbours.
    pub fn offset_to(self, other: CellCoord) -> Option<Offset> {
        Offset::from_delta(other - self)
    }

    pub fn is_neighbor(self, other: CellCoord) -> bool {
        self.offset_to(other).is_some()
    }
}

impl From<[i32; 3]> for CellCoord {
    fn from([x, y, z]: [i32; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<CellCoord> for [i32; 3] {
    fn from(c: CellCoord) -> Self {
        [c.x, c.y, c.z]
    }
}

impl Ord for CellCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.x, self.y, self.z).cmp(&(other.x, other.y, other.z))
    }
}

impl PartialOrd for CellCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<Offset> for CellCoord {
    type Output = CellCoord;
    fn add(self, o: Offset) -> CellCoord {
        CellCoord::new(self.x + o.dx as i32, self.y + o.dy as i32, self.z + o.dz as i32)
    }
}

impl Add for CellCoord {
    type Output = CellCoord;
    fn add(self, o: CellCoord) -> CellCoord {
        CellCoord::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for CellCoord {
    type Output = CellCoord;
    fn sub(self, o: CellCoord) -> CellCoord {
        CellCoord::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// One of the twelve face directions: a permutation of `(±1, ±1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i32; 3]", into = "[i32; 3]")]
pub struct Offset {
    pub dx: i8,
    pub dy: i8,
    pub dz: i8,
}

const fn off(dx: i8, dy: i8, dz: i8) -> Offset {
    Offset { dx, dy, dz }
}

/// All face offsets in lexicographic order.
pub const OFFSETS: [Offset; 12] = [
    off(-1, -1, 0),
    off(-1, 0, -1),
    off(-1, 0, 1),
    off(-1, 1, 0),
    off(0, -1, -1),
    off(0, -1, 1),
    off(0, 1, -1),
    off(0, 1, 1),
    off(1, -1, 0),
    off(1, 0, -1),
    off(1, 0, 1),
    off(1, 1, 0),
];

impl Offset {
    pub fn from_delta(d: CellCoord) -> Option<Offset> {
        let o = Offset::try_from([d.x, d.y, d.z]).ok()?;
        Some(o)
    }

    /// Position of this offset in [`OFFSETS`].
    pub fn index(self) -> usize {
        OFFSETS.iter().position(|&o| o == self).expect("offsets are closed")
    }

    pub fn from_index(i: usize) -> Option<Offset> {
        OFFSETS.get(i).copied()
    }

    pub fn as_cell(self) -> CellCoord {
        CellCoord::new(self.dx as i32, self.dy as i32, self.dz as i32)
    }

    pub fn dot(self, other: Offset) -> i32 {
        self.dx as i32 * other.dx as i32 + self.dy as i32 * other.dy as i32 + self.dz as i32 * other.dz as i32
    }

    pub fn dot_f64(self, v: [f64; 3]) -> f64 {
        self.as_cell().dot_f64(v)
    }
}

impl Neg for Offset {
    type Output = Offset;

    fn neg(self) -> Offset {
        off(-self.dx, -self.dy, -self.dz)
    }
}

impl TryFrom<[i32; 3]> for Offset {
    type Error = String;
    fn try_from(v: [i32; 3]) -> Result<Self, Self::Error> {
        let zeros = v.iter().filter(|c| **c == 0).count();
        let units = v.iter().filter(|c| c.abs() == 1).count();
        if zeros == 1 && units == 2 {
            Ok(off(v[0] as i8, v[1] as i8, v[2] as i8))
        } else {
            Err(format!("{v:?} is not a face offset (need a permutation of (±1, ±1, 0))"))
        }
    }
}

impl From<Offset> for [i32; 3] {
    fn from(o: Offset) -> Self {
        [o.dx as i32, o.dy as i32, o.dz as i32]
    }
}

/// Two faces of one module share an edge.
pub fn face_adjacent(u: Offset, v: Offset) -> bool {
    u.dot(v) == 1
}

/// The twelve face-neighbours of `cell`.
pub fn neighbors(cell: CellCoord) -> [CellCoord; 12] {
    cell.neighbors()
}

/// One legal 120° roll of the module at `src` about the module at `pivot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveCandidate {
    pub src: CellCoord,
    pub pivot: CellCoord,
    pub dst: CellCoord,
}

impl MoveCandidate {
    pub fn displacement(&self) -> CellCoord {
        self.dst - self.src
    }

    /// The cell swept past during the roll; it must be empty.
    pub fn transit_corner(&self) -> CellCoord {
        self.pivot + (self.src - self.pivot) + (self.dst - self.pivot)
    }

    /// Checks the geometric shape of the roll, independent of occupancy.
    pub fn is_roll(&self) -> bool {
        match (self.pivot.offset_to(self.src), self.pivot.offset_to(self.dst)) {
            (Some(u), Some(v)) => face_adjacent(u, v),
            _ => false,
        }
    }
}

/// Read access to what sits in each cell.
pub trait Occupancy {
    fn has_module(&self, cell: CellCoord) -> bool;

    fn has_object(&self, _cell: CellCoord) -> bool {
        false
    }

    /// Whether cells with `z < 0` are forbidden.
    fn ground_enabled(&self) -> bool {
        false
    }

    fn below_ground(&self, cell: CellCoord) -> bool {
        self.ground_enabled() && cell.z < 0
    }

    /// Cell can receive a module: no module, no object, not under ground.
    fn is_free(&self, cell: CellCoord) -> bool {
        !self.has_module(cell) && !self.has_object(cell) && !self.below_ground(cell)
    }
}

impl Occupancy for HashSet<CellCoord> {
    fn has_module(&self, cell: CellCoord) -> bool {
        self.contains(&cell)
    }
}

impl Occupancy for BTreeSet<CellCoord> {
    fn has_module(&self, cell: CellCoord) -> bool {
        self.contains(&cell)
    }
}

/// Module set plus obstacle cells and an optional ground plane.
#[derive(Debug, Clone, Copy)]
pub struct Terrain<'a, M: ?Sized> {
    pub modules: &'a M,
    pub objects: &'a BTreeSet<CellCoord>,
    pub ground: bool,
}

impl<M: Occupancy + ?Sized> Occupancy for Terrain<'_, M> {
    fn has_module(&self, cell: CellCoord) -> bool {
        self.modules.has_module(cell)
    }
    fn has_object(&self, cell: CellCoord) -> bool {
        self.objects.contains(&cell)
    }
    fn ground_enabled(&self) -> bool {
        self.ground
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("no module at source cell {0}")]
    EmptySource(CellCoord),
}

/// Why a roll cannot happen under a given occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveBlock {
    NotARoll,
    PivotVacated,
    DestinationOccupied,
    GroundViolation,
    TransitBlocked,
}

/// Occupancy rules (pivot present, destination free, corner clear) for one roll.
pub fn check_roll<O: Occupancy + ?Sized>(space: &O, m: &MoveCandidate) -> Result<(), MoveBlock> {
    if !m.is_roll() {
        return Err(MoveBlock::NotARoll);
    }
    if !space.has_module(m.pivot) {
        return Err(MoveBlock::PivotVacated);
    }
    if space.has_module(m.dst) || space.has_object(m.dst) {
        return Err(MoveBlock::DestinationOccupied);
    }
    if space.below_ground(m.dst) {
        return Err(MoveBlock::GroundViolation);
    }
    let corner = m.transit_corner();
    if space.has_module(corner) || space.has_object(corner) || space.below_ground(corner) {
        return Err(MoveBlock::TransitBlocked);
    }
    Ok(())
}

/// Every legal roll of the module at `src`, sorted by pivot then destination.
pub fn enumerate_moves<O: Occupancy + ?Sized>(space: &O, src: CellCoord) -> Result<Vec<MoveCandidate>, LatticeError> {
    if !space.has_module(src) {
        return Err(LatticeError::EmptySource(src));
    }
    let mut out = Vec::new();
    // OFFSETS is sorted, so pivots come out sorted; destinations per pivot too.
    for a in OFFSETS {
        let pivot = src + a;
        if !space.has_module(pivot) {
            continue;
        }
        let u = -a;
        for v in OFFSETS {
            if !face_adjacent(u, v) {
                continue;
            }
            let m = MoveCandidate { src, pivot, dst: pivot + v };
            if check_roll(space, &m).is_ok() {
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// Keeps the moves whose displacement has a positive dot product with `bias`.
pub fn filter_directed(moves: &[MoveCandidate], bias: [f64; 3]) -> Vec<MoveCandidate> {
    moves.iter().filter(|m| m.displacement().dot_f64(bias) > 0.0).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(cells: &[[i32; 3]]) -> HashSet<CellCoord> {
        cells.iter().map(|&c| CellCoord::from(c)).collect()
    }

    #[test]
    fn offsets_are_the_twelve_permutations() {
        let uniq: HashSet<_> = OFFSETS.iter().collect();
        assert_eq!(uniq.len(), 12);
        for o in OFFSETS {
            let c = o.as_cell();
            assert_eq!(c.x.abs() + c.y.abs() + c.z.abs(), 2);
            assert!(c.is_valid());
        }
        let mut sorted = OFFSETS;
        sorted.sort();
        assert_eq!(sorted, OFFSETS);
    }

    #[test]
    fn neighbors_of_origin() {
        let n: HashSet<_> = neighbors(CellCoord::ORIGIN).into_iter().collect();
        let expected: HashSet<_> = OFFSETS.iter().map(|o| o.as_cell()).collect();
        assert_eq!(n, expected);
    }

    #[test]
    fn neighbors_translate() {
        let n = neighbors(CellCoord::new(2, 0, 0));
        assert!(n.contains(&CellCoord::new(3, 1, 0)));
        assert!(n.contains(&CellCoord::new(1, -1, 0)));
        assert!(n.iter().all(|c| c.is_valid()));
    }

    #[test]
    fn face_neighbors_share_four_neighbors() {
        for o in OFFSETS {
            let a: HashSet<_> = neighbors(CellCoord::ORIGIN).into_iter().collect();
            let b: HashSet<_> = neighbors(o.as_cell()).into_iter().collect();
            assert_eq!(a.intersection(&b).count(), 4);
        }
    }

    #[test]
    fn face_adjacency_examples() {
        let u = Offset::try_from([1, 1, 0]).unwrap();
        assert!(face_adjacent(u, Offset::try_from([1, 0, 1]).unwrap()));
        assert!(!face_adjacent(u, Offset::try_from([-1, -1, 0]).unwrap()));
        for u in OFFSETS {
            assert_eq!(OFFSETS.iter().filter(|&&v| face_adjacent(u, v)).count(), 4);
        }
    }

    #[test]
    fn offset_rejects_non_faces() {
        assert!(Offset::try_from([1, 1, 1]).is_err());
        assert!(Offset::try_from([2, 0, 0]).is_err());
        assert!(Offset::try_from([0, 0, 0]).is_err());
    }

    #[test]
    fn two_module_roll_options() {
        let occ = set(&[[0, 0, 0], [1, 1, 0]]);
        let moves = enumerate_moves(&occ, CellCoord::new(1, 1, 0)).unwrap();
        let dsts: Vec<_> = moves.iter().map(|m| <[i32; 3]>::from(m.dst)).collect();
        assert_eq!(dsts, vec![[0, 1, -1], [0, 1, 1], [1, 0, -1], [1, 0, 1]]);
        assert!(moves.iter().all(|m| m.pivot == CellCoord::ORIGIN));
    }

    #[test]
    fn ground_removes_sub_plane_destinations() {
        let occ = set(&[[0, 0, 0], [1, 1, 0]]);
        let objects = BTreeSet::new();
        let t = Terrain { modules: &occ, objects: &objects, ground: true };
        let moves = enumerate_moves(&t, CellCoord::new(1, 1, 0)).unwrap();
        let dsts: Vec<_> = moves.iter().map(|m| <[i32; 3]>::from(m.dst)).collect();
        assert_eq!(dsts, vec![[0, 1, 1], [1, 0, 1]]);
    }

    #[test]
    fn isolated_module_cannot_roll() {
        let occ = set(&[[0, 0, 0]]);
        assert!(enumerate_moves(&occ, CellCoord::ORIGIN).unwrap().is_empty());
    }

    #[test]
    fn empty_source_is_an_error() {
        let occ = set(&[[0, 0, 0]]);
        assert_eq!(
            enumerate_moves(&occ, CellCoord::new(1, 1, 0)),
            Err(LatticeError::EmptySource(CellCoord::new(1, 1, 0)))
        );
    }

    #[test]
    fn end_of_chain_rolls_only_over_its_neighbor() {
        // seed + three searchers in a straight line; only the far end is free
        let occ = set(&[[0, 0, 0], [1, 1, 0], [2, 2, 0], [3, 3, 0]]);
        let moves = enumerate_moves(&occ, CellCoord::new(3, 3, 0)).unwrap();
        assert!(!moves.is_empty());
        assert!(moves.iter().all(|m| m.pivot == CellCoord::new(2, 2, 0)));
    }

    #[test]
    fn occupied_corner_blocks_the_roll() {
        let src = CellCoord::new(1, 1, 0);
        let dst = CellCoord::new(1, 0, 1);
        let m = MoveCandidate { src, pivot: CellCoord::ORIGIN, dst };
        assert_eq!(m.transit_corner(), CellCoord::new(2, 1, 1));
        let occ = set(&[[0, 0, 0], [1, 1, 0], [2, 1, 1]]);
        assert_eq!(check_roll(&occ, &m), Err(MoveBlock::TransitBlocked));
        let moves = enumerate_moves(&occ, src).unwrap();
        assert!(!moves.iter().any(|c| c.dst == dst && c.pivot == CellCoord::ORIGIN));
    }

    #[test]
    fn directed_filter() {
        let occ = set(&[[0, 0, 0], [1, 1, 0]]);
        let moves = enumerate_moves(&occ, CellCoord::new(1, 1, 0)).unwrap();
        let up = filter_directed(&moves, [0.0, 0.0, 1.0]);
        let dsts: Vec<_> = up.iter().map(|m| <[i32; 3]>::from(m.dst)).collect();
        assert_eq!(dsts, vec![[0, 1, 1], [1, 0, 1]]);

        // every displacement points away from (1,1,0)
        let flat = filter_directed(&moves, [1.0, 1.0, 0.0]);
        assert!(flat.is_empty());

        let d = moves[2].displacement();
        let own = filter_directed(&moves, [d.x as f64, d.y as f64, d.z as f64]);
        assert!(own.contains(&moves[2]));
    }
}
