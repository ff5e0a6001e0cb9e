#![allow(dead_code)]

pub mod brute;
pub mod towers;

use std::collections::BTreeMap;

use stackplan_core::{
    BlockId, BlockSpec, Cell, GoalSpec, GripperId, HeldAssembly, PhysicsParams, Placement,
    ProblemInstance, Surface, WorldState,
};

/// A level-0 table and a raised shelf with a two-level pedestal.
pub fn surfaces() -> Vec<Surface> {
    vec![Surface::new("table", 0, 0, 6), Surface::new("shelf", 2, 9, 11)]
}

/// Drops blocks one at a time, each coming to rest on the highest support
/// under its span. Blocks with nothing under any unit are skipped.
pub fn drop_instance(drops: &[(u32, i32)], grippers: usize) -> ProblemInstance {
    let surfaces = surfaces();
    let mut top: BTreeMap<i32, i32> = BTreeMap::new();
    for s in &surfaces {
        for x in s.lo..=s.hi {
            top.insert(x, s.level);
        }
    }
    let mut blocks = Vec::new();
    let mut initial = Vec::new();
    for &(size, x) in drops {
        let level = (x..x + size as i32).filter_map(|c| top.get(&c).copied()).max();
        let Some(level) = level else { continue };
        let id = BlockId(blocks.len() as u16);
        blocks.push(BlockSpec::new(format!("b{}", id.0), size, 1.0));
        initial.push(Placement { block: id, cell: Cell::new(x, level) });
        for c in x..x + size as i32 {
            top.insert(c, level + 1);
        }
    }
    ProblemInstance {
        surfaces,
        blocks,
        grippers: (0..grippers).map(|i| format!("g{i}")).collect(),
        initial,
        initial_held: vec![],
        goal: GoalSpec::default(),
        makespan: 0,
        physics: PhysicsParams::default(),
        ordering: vec![],
    }
}

/// Moves the pickable set of `b` into gripper `g` without any stability
/// check. Returns false if `b` cannot be picked.
pub fn lift(inst: &ProblemInstance, state: &mut WorldState, g: GripperId, b: BlockId) -> bool {
    if state.held(g).is_some() {
        return false;
    }
    let Ok(set) = stackplan_core::planner::pickable_set(inst, state, b) else { return false };
    let root = state.anchor(b).expect("pickable blocks are anchored");
    let mut members = BTreeMap::new();
    for m in set {
        let c = state.remove_block(inst, m).expect("member is anchored");
        members.insert(m, stackplan_core::model::Offset { dx: c.x - root.x, dh: c.level - root.level });
    }
    state.set_held(g, HeldAssembly { root: b, members });
    true
}

/// Random grid state: dropped blocks, then up to `picks` attempted lifts.
pub fn random_state(drops: &[(u32, i32)], picks: &[usize]) -> (ProblemInstance, WorldState) {
    let inst = drop_instance(drops, picks.len());
    let mut state = inst.validate().expect("dropped blocks form a valid grid");
    for (g, &k) in picks.iter().enumerate() {
        let anchored: Vec<BlockId> = state.anchored().map(|(b, _)| b).collect();
        if anchored.is_empty() {
            break;
        }
        lift(&inst, &mut state, GripperId(g as u16), anchored[k % anchored.len()]);
    }
    (inst, state)
}
