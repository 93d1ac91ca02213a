use std::collections::BTreeSet;

use rand::SeedableRng;

use super::*;
use crate::engine::{Flags, InitialModule, Region, SimRng, World, WorldSetup, WorldState};
use crate::lattice::CellCoord;
use crate::scent::NO_SCENT;

fn c(x: i32, y: i32, z: i32) -> CellCoord {
    CellCoord::new(x, y, z)
}

fn dir(x: i32, y: i32, z: i32) -> Offset {
    Offset::from_delta(c(x, y, z)).unwrap()
}

struct Case {
    setup: WorldSetup,
}

impl Case {
    fn new(behavior: BehaviorKind) -> Self {
        Case {
            setup: WorldSetup {
                behavior,
                params: BehaviorParams::default(),
                flags: Flags { connectivity: false, ..Flags::default() },
                scent_cap: NO_SCENT,
                modules: Vec::new(),
                objects: BTreeSet::new(),
                regions: Vec::new(),
                weight_schedule: Vec::new(),
                conserve_total: None,
            },
        }
    }

    fn module(mut self, cell: CellCoord, mode: Mode) -> Self {
        self.setup.modules.push(InitialModule { cell, mode, memory: Memory::default() });
        self
    }

    fn with_memory(mut self, memory: Memory) -> Self {
        self.setup.modules.last_mut().unwrap().memory = memory;
        self
    }

    fn region(mut self, weight: f64) -> Self {
        self.setup.regions.push(Region { name: format!("r{}", self.setup.regions.len()), weight });
        self
    }

    /// Builds the state and overrides scent values as `(module, channel, value)`.
    fn state(self, scents: &[(usize, Channel, u16)]) -> WorldState {
        let world = World::new(self.setup, SimRng::seed_from_u64(0)).unwrap();
        let mut state = world.state().clone();
        for &(i, ch, v) in scents {
            state.modules[i].scent.set(ch, v);
        }
        state
    }
}

fn root_memory() -> Memory {
    Memory { region: Some(0), ..Memory::default() }
}

fn act(kind: BehaviorKind, state: &WorldState, id: u32, seed: u64) -> Action {
    let mut rng = SimRng::seed_from_u64(seed);
    step(kind, &LocalView::new(state, ModuleId(id)), state.params(), &mut rng)
}

#[test]
fn sleep_wakes_on_neighbour_scent() {
    let s = Case::new(BehaviorKind::Chain).module(c(0, 0, 0), Mode::Sleep).module(c(1, 1, 0), Mode::Final).state(&[(
        1,
        Channel::Regular,
        3,
    )]);
    assert_eq!(act(BehaviorKind::Chain, &s, 0, 1), Action::become_(Mode::Search));
}

#[test]
fn sleep_without_scent_keeps_sleeping() {
    let s = Case::new(BehaviorKind::Chain).module(c(0, 0, 0), Mode::Sleep).module(c(1, 1, 0), Mode::Final).state(&[]);
    for seed in 0..50 {
        assert!(act(BehaviorKind::Chain, &s, 0, seed).is_noop());
    }
}

#[test]
fn seed_hands_off_along_its_growth_direction() {
    let g = dir(1, 1, 0);
    let s = Case::new(BehaviorKind::Chain)
        .module(c(0, 0, 0), Mode::Seed)
        .with_memory(Memory { growth: Some(g), ..Memory::default() })
        .module(c(1, 1, 0), Mode::Search)
        .state(&[(0, Channel::Regular, 0)]);
    let a = act(BehaviorKind::Chain, &s, 0, 1);
    assert_eq!(a.mode, Some(Mode::Final));
    assert_eq!(a.neighbor_writes, vec![NeighborWrite { target: ModuleId(1), mode: Mode::Seed, growth: Some(g) }]);
}

#[test]
fn seed_ignores_a_final_module_in_its_growth_cell() {
    let s = Case::new(BehaviorKind::Chain)
        .module(c(0, 0, 0), Mode::Seed)
        .with_memory(Memory { growth: Some(dir(1, 1, 0)), ..Memory::default() })
        .module(c(1, 1, 0), Mode::Final)
        .state(&[]);
    assert!(act(BehaviorKind::Chain, &s, 0, 1).is_noop());
}

#[test]
fn fresh_seed_picks_a_free_growth_direction() {
    let s = Case::new(BehaviorKind::Chain).module(c(0, 0, 0), Mode::Seed).module(c(1, 1, 0), Mode::Final).state(&[]);
    for seed in 0..50 {
        let a = act(BehaviorKind::Chain, &s, 0, seed);
        let g = a.memory.and_then(|m| m.growth).unwrap();
        assert_ne!(g, dir(1, 1, 0));
        assert!(a.neighbor_writes.is_empty() && a.mode.is_none());
    }
}

#[test]
fn final_never_requests_a_move() {
    let s = Case::new(BehaviorKind::Chain)
        .module(c(0, 0, 0), Mode::Final)
        .module(c(1, 1, 0), Mode::Seed)
        .state(&[(0, Channel::Regular, 9), (1, Channel::Regular, 0)]);
    for seed in 0..200 {
        assert!(act(BehaviorKind::Chain, &s, 0, seed).is_noop());
    }
}

/// Mover at the origin rolling around a pivot; two mirror-image destinations
/// touch a value-1 module each, the other two only see the pivot.
fn two_way_tie() -> WorldState {
    Case::new(BehaviorKind::Chain)
        .module(c(0, 0, 0), Mode::Search)
        .module(c(1, 1, 0), Mode::Final)
        .module(c(2, 0, 2), Mode::Final)
        .module(c(0, 2, 2), Mode::Final)
        .state(&[
            (0, Channel::Regular, 10),
            (1, Channel::Regular, 5),
            (2, Channel::Regular, 1),
            (3, Channel::Regular, 1),
        ])
}

#[test]
fn gradient_prefers_the_lower_neighbour() {
    let mut s = two_way_tie();
    s.modules[3].scent.set(Channel::Regular, 2);
    for seed in 0..100 {
        let mut rng = SimRng::seed_from_u64(seed);
        let m = gradient_move(&LocalView::new(&s, ModuleId(0)), Channel::Regular, &mut rng).unwrap();
        assert_eq!(m.dst, c(1, 0, 1));
    }
}

#[test]
fn flat_gradient_falls_back_to_any_legal_move() {
    let s = Case::new(BehaviorKind::Chain).module(c(0, 0, 0), Mode::Search).module(c(1, 1, 0), Mode::Final).state(&[]);
    let view = LocalView::new(&s, ModuleId(0));
    let legal = view.legal_moves();
    assert_eq!(legal.len(), 4);
    let mut seen = BTreeSet::new();
    for seed in 0..200 {
        let m = gradient_move(&view, Channel::Regular, &mut SimRng::seed_from_u64(seed)).unwrap();
        assert!(legal.contains(&m));
        seen.insert(m.dst);
    }
    assert_eq!(seen.len(), 4);
}

#[test]
fn symmetric_tie_is_a_fair_coin() {
    let s = two_way_tie();
    let view = LocalView::new(&s, ModuleId(0));
    let n = 1000;
    let mut left = 0;
    for seed in 0..n {
        let m = gradient_move(&view, Channel::Regular, &mut SimRng::seed_from_u64(seed)).unwrap();
        match m.dst {
            d if d == c(1, 0, 1) => left += 1,
            d if d == c(0, 1, 1) => {}
            d => panic!("untied destination {d}"),
        }
    }
    let expected = n as f64 / 2.0;
    let chi2 = 2.0 * (left as f64 - expected).powi(2) / expected;
    // 1 degree of freedom, 5% critical value
    assert!(chi2 < 3.841, "chi2 = {chi2} ({left}/{n})");
}

#[test]
fn final_becomes_node_only_above_the_threshold() {
    let case = || Case::new(BehaviorKind::Branch).module(c(0, 0, 0), Mode::Final).module(c(1, 1, 0), Mode::Final);
    let s = case().state(&[(0, Channel::Node, 13)]);
    let a = act(BehaviorKind::Branch, &s, 0, 1);
    assert_eq!(a.mode, Some(Mode::Node));
    assert_eq!(a.memory.map(|m| m.spawned), Some(0));
    let s = case().state(&[(0, Channel::Node, 12)]);
    for seed in 0..50 {
        assert!(act(BehaviorKind::Branch, &s, 0, seed).is_noop());
    }
}

#[test]
fn node_with_spent_budget_goes_inactive() {
    let s = Case::new(BehaviorKind::Branch)
        .module(c(0, 0, 0), Mode::Node)
        .with_memory(Memory { spawned: 6, used_dirs: 0b111111, ..Memory::default() })
        .module(c(1, 1, 0), Mode::Search)
        .state(&[]);
    assert_eq!(act(BehaviorKind::Branch, &s, 0, 1), Action::become_(Mode::Inode));
}

#[test]
fn node_seeds_an_arriving_searcher_once_per_direction() {
    let case = |used: u16| {
        Case::new(BehaviorKind::Branch)
            .module(c(0, 0, 0), Mode::Node)
            .with_memory(Memory { spawned: 2, used_dirs: used, ..Memory::default() })
            .module(c(1, 1, 0), Mode::Search)
            .state(&[])
    };
    let g = dir(1, 1, 0);
    let a = act(BehaviorKind::Branch, &case(0), 0, 1);
    assert_eq!(a.neighbor_writes, vec![NeighborWrite { target: ModuleId(1), mode: Mode::Seed, growth: Some(g) }]);
    let m = a.memory.unwrap();
    assert_eq!((m.spawned, m.used_dirs), (3, 1 << g.index()));
    assert!(a.mode.is_none());
    assert!(act(BehaviorKind::Branch, &case(1 << g.index()), 0, 1).is_noop());
}

#[test]
fn last_spawn_retires_the_node() {
    let s = Case::new(BehaviorKind::Branch)
        .module(c(0, 0, 0), Mode::Node)
        .with_memory(Memory { spawned: 5, ..Memory::default() })
        .module(c(1, 1, 0), Mode::Search)
        .state(&[]);
    let a = act(BehaviorKind::Branch, &s, 0, 1);
    assert_eq!(a.mode, Some(Mode::Inode));
    assert_eq!(a.neighbor_writes.len(), 1);
}

#[test]
fn iroot_needs_load_strictly_above_f_max() {
    let case = |weight: f64| {
        let mut case = Case::new(BehaviorKind::Adaptive)
            .region(weight)
            .module(c(0, 0, 0), Mode::Iroot)
            .with_memory(root_memory())
            .module(c(2, 0, 0), Mode::Root)
            .with_memory(root_memory());
        case.setup.params.p_max = 1.0;
        case.state(&[])
    };
    let s = case(2.0);
    assert_eq!(s.region_load(0), Some(2.0));
    for seed in 0..100 {
        assert!(act(BehaviorKind::Adaptive, &s, 0, seed).is_noop());
    }
    assert_eq!(act(BehaviorKind::Adaptive, &case(2.5), 0, 1), Action::become_(Mode::Aroot));
}

#[test]
fn underloaded_root_disbands_at_p_min() {
    let s = Case::new(BehaviorKind::Adaptive)
        .region(0.5)
        .module(c(0, 0, 0), Mode::Root)
        .with_memory(root_memory())
        .module(c(1, 0, -1), Mode::Final)
        .module(c(-1, 0, -1), Mode::Fixed)
        .state(&[]);
    assert_eq!(s.region_load(0), Some(0.5));
    let view = LocalView::new(&s, ModuleId(0));
    let mut rng = SimRng::seed_from_u64(2024);
    let n = 10_000;
    let mut fired = 0;
    for _ in 0..n {
        let a = adaptive_step(&view, s.params(), &mut rng);
        if !a.is_noop() {
            fired += 1;
            assert_eq!(a.mode, Some(Mode::Iroot));
            assert_eq!(
                a.neighbor_writes,
                vec![NeighborWrite { target: ModuleId(1), mode: Mode::Disband, growth: None }]
            );
        }
    }
    let rate = fired as f64 / n as f64;
    assert!((rate - 0.05).abs() <= 0.01, "rate {rate}");
}

#[test]
fn searcher_below_an_attracting_root_starts_a_leg() {
    let s = Case::new(BehaviorKind::Adaptive)
        .region(3.0)
        .module(c(0, 0, 2), Mode::Aroot)
        .with_memory(root_memory())
        .module(c(1, 0, 1), Mode::Search)
        .state(&[(0, Channel::Regular, 0)]);
    let a = act(BehaviorKind::Adaptive, &s, 1, 1);
    assert_eq!(a.mode, Some(Mode::Seed));
    assert_eq!(a.neighbor_writes, vec![NeighborWrite { target: ModuleId(0), mode: Mode::Root, growth: None }]);
}

#[test]
fn searcher_level_with_a_seed_keeps_searching() {
    let s = Case::new(BehaviorKind::Adaptive)
        .module(c(0, 1, 1), Mode::Seed)
        .module(c(1, 2, 1), Mode::Search)
        .state(&[(0, Channel::Regular, 0), (1, Channel::Regular, 1)]);
    for seed in 0..50 {
        let a = act(BehaviorKind::Adaptive, &s, 1, seed);
        assert!(a.mode.is_none() && a.neighbor_writes.is_empty());
    }
}

#[test]
fn seed_on_the_ground_settles_and_disband_spreads() {
    let mut case = Case::new(BehaviorKind::Adaptive)
        .module(c(0, 0, 0), Mode::Seed)
        .module(c(1, 0, 1), Mode::Disband)
        .module(c(2, 0, 2), Mode::Final)
        .module(c(1, 1, 2), Mode::Search);
    case.setup.flags.ground = true;
    let s = case.state(&[]);
    assert_eq!(act(BehaviorKind::Adaptive, &s, 0, 1), Action::become_(Mode::Final));
    let a = act(BehaviorKind::Adaptive, &s, 1, 1);
    assert_eq!(a.mode, Some(Mode::Search));
    let targets: Vec<_> = a.neighbor_writes.iter().map(|w| (w.target, w.mode)).collect();
    assert_eq!(targets, vec![(ModuleId(0), Mode::Disband), (ModuleId(2), Mode::Disband)]);
}

#[test]
fn grasp_contact_turns_the_seed_into_touch() {
    let mut case = Case::new(BehaviorKind::Grasp).module(c(0, 0, 0), Mode::Seed).module(c(1, 1, 0), Mode::Search);
    case.setup.objects.insert(c(2, 2, 0));
    let s = case.state(&[(0, Channel::Regular, 0)]);
    let a = act(BehaviorKind::Grasp, &s, 1, 1);
    assert_eq!(a.mode, Some(Mode::Touchseed));
    assert_eq!(a.neighbor_writes, vec![NeighborWrite { target: ModuleId(0), mode: Mode::Touch, growth: None }]);
}

#[test]
fn grasp_searcher_ahead_of_the_seed_takes_over() {
    let mut case = Case::new(BehaviorKind::Grasp).module(c(0, 0, 0), Mode::Seed).module(c(1, 1, 0), Mode::Search);
    case.setup.params.bias = Some([1.0, 0.0, 0.0]);
    let s = case.state(&[(0, Channel::Regular, 0)]);
    let a = act(BehaviorKind::Grasp, &s, 1, 1);
    assert_eq!(a.mode, Some(Mode::Seed));
    assert_eq!(a.neighbor_writes, vec![NeighborWrite { target: ModuleId(0), mode: Mode::Final, growth: None }]);
}

#[test]
fn grasp_searcher_beside_the_seed_rolls_forward() {
    let mut case = Case::new(BehaviorKind::Grasp).module(c(0, 0, 0), Mode::Seed).module(c(0, 1, 1), Mode::Search);
    case.setup.params.bias = Some([1.0, 0.0, 0.0]);
    let s = case.state(&[(0, Channel::Regular, 0)]);
    for seed in 0..50 {
        let a = act(BehaviorKind::Grasp, &s, 1, seed);
        let m = a.movement.unwrap();
        assert!(m.dst.is_neighbor(c(0, 0, 0)) && m.dst.x > 0, "{m:?}");
    }
}

#[test]
fn grasp_searcher_alone_moves_at_random() {
    let s = Case::new(BehaviorKind::Grasp)
        .module(c(0, 0, 0), Mode::Final)
        .module(c(1, 1, 0), Mode::Search)
        .state(&[(0, Channel::Regular, 4), (1, Channel::Regular, 5)]);
    let legal = LocalView::new(&s, ModuleId(1)).legal_moves();
    for seed in 0..50 {
        let m = act(BehaviorKind::Grasp, &s, 1, seed).movement.unwrap();
        assert!(legal.contains(&m));
    }
}
