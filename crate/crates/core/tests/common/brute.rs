use std::collections::{BTreeMap, BTreeSet};

use stackplan_core::model::Offset;
use stackplan_core::validator::{validate_plan, Category};
use stackplan_core::{
    Action, BlockId, BlockSpec, Cell, Edge, GoalAtom, GoalSpec, GripperId, Location, PhysicsParams,
    Placement, Plan, ProblemInstance, Surface, SurfaceId,
};

fn instance(
    surfaces: Vec<Surface>,
    blocks: Vec<(&str, u32, i32, i32)>,
    grippers: usize,
    goal: Vec<GoalAtom>,
    makespan: u32,
) -> ProblemInstance {
    ProblemInstance {
        surfaces,
        initial: blocks
            .iter()
            .enumerate()
            .map(|(i, &(_, _, x, h))| Placement { block: BlockId(i as u16), cell: Cell::new(x, h) })
            .collect(),
        blocks: blocks.iter().map(|&(id, size, _, _)| BlockSpec::new(id, size, 1.0)).collect(),
        grippers: (0..grippers).map(|i| format!("g{i}")).collect(),
        initial_held: vec![],
        goal: GoalSpec { atoms: goal },
        makespan,
        physics: PhysicsParams::default(),
        ordering: vec![],
    }
}

const B0: BlockId = BlockId(0);
const B1: BlockId = BlockId(1);
const B2: BlockId = BlockId(2);

pub fn tiny_instances() -> Vec<(&'static str, ProblemInstance)> {
    let table = |lo, hi| Surface::new("table", 0, lo, hi);
    vec![
        (
            "slide one cube",
            instance(vec![table(0, 2)], vec![("a", 1, 0, 0)], 1, vec![GoalAtom::ExactCell { block: B0, cell: Cell::new(2, 0) }], 2),
        ),
        (
            "stack two cubes with two grippers",
            instance(
                vec![table(0, 3)],
                vec![("a", 1, 0, 0), ("b", 1, 3, 0)],
                2,
                vec![GoalAtom::PlacedOn { block: B0, on: Location::Block(B1) }],
                3,
            ),
        ),
        (
            "bridge a gap from the store",
            instance(
                vec![Surface::new("left", 0, 0, 1), Surface::new("right", 0, 3, 4), Surface::new("store", 0, 8, 10)],
                vec![("plank", 3, 8, 0)],
                1,
                vec![GoalAtom::Bridge { left: vec![SurfaceId(0)], right: vec![SurfaceId(1)] }],
                2,
            ),
        ),
        (
            "carry a counterweighted plank",
            instance(
                vec![table(0, 1), Surface::new("store", 0, 4, 6)],
                vec![("m", 2, 4, 0), ("c", 1, 4, 1)],
                2,
                vec![GoalAtom::Overhang { surface: SurfaceId(0), edge: Edge::Right, min_units: 1 }],
                3,
            ),
        ),
        (
            "load both ends at once",
            instance(
                vec![Surface::new("post", 0, 2, 2), Surface::new("store", 0, 6, 7)],
                vec![("l", 3, 1, 0), ("s", 1, 6, 0), ("t", 1, 7, 0)],
                2,
                vec![
                    GoalAtom::PlacedOnAt { block: B1, on: Location::Block(B0), u: 1, v: 1 },
                    GoalAtom::PlacedOnAt { block: B2, on: Location::Block(B0), u: 3, v: 1 },
                ],
                2,
            ),
        ),
        (
            "move a tower in one piece",
            instance(
                vec![table(0, 3)],
                vec![("b", 1, 0, 0), ("a", 1, 0, 1)],
                1,
                vec![GoalAtom::ExactCell { block: B0, cell: Cell::new(3, 0) }],
                2,
            ),
        ),
        (
            "one gripper two moves",
            instance(
                vec![table(0, 3)],
                vec![("a", 1, 0, 0), ("b", 1, 1, 0)],
                1,
                vec![
                    GoalAtom::ExactCell { block: B0, cell: Cell::new(2, 0) },
                    GoalAtom::ExactCell { block: B1, cell: Cell::new(3, 0) },
                ],
                2,
            ),
        ),
    ]
}

/// Minimal replay used only to give each action a representation that does
/// not depend on which unit pair a placement names.
#[derive(Clone, Default)]
struct Positions {
    anchors: BTreeMap<BlockId, Cell>,
    held: BTreeMap<GripperId, (BlockId, BTreeMap<BlockId, Offset>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Move {
    Pick(BlockId),
    Put(BlockId, Cell),
}

impl Positions {
    fn new(inst: &ProblemInstance) -> Self {
        Positions { anchors: inst.initial.iter().map(|p| (p.block, p.cell)).collect(), ..Default::default() }
    }

    fn occupied(&self, inst: &ProblemInstance) -> BTreeMap<Cell, BlockId> {
        let mut occ = BTreeMap::new();
        for (&b, &c) in &self.anchors {
            for k in 0..inst.size(b) as i32 {
                occ.insert(Cell::new(c.x + k, c.level), b);
            }
        }
        occ
    }

    /// `b` and everything resting on it, transitively.
    fn load(&self, inst: &ProblemInstance, b: BlockId) -> BTreeSet<BlockId> {
        let occ = self.occupied(inst);
        let mut set = BTreeSet::from([b]);
        loop {
            let mut grew = false;
            for (c, &m) in &occ {
                if let Some(&under) = occ.get(&c.below()) {
                    if set.contains(&under) && set.insert(m) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    }

    fn step(&mut self, inst: &ProblemInstance, actions: &[Action]) -> BTreeSet<(GripperId, Move)> {
        let mut moves = BTreeSet::new();
        let before = self.clone();
        for a in actions {
            match *a {
                Action::Pick { gripper, block } => {
                    let root = before.anchors[&block];
                    let members = before
                        .load(inst, block)
                        .into_iter()
                        .map(|m| {
                            let c = before.anchors[&m];
                            (m, Offset { dx: c.x - root.x, dh: c.level - root.level })
                        })
                        .collect();
                    moves.insert((gripper, Move::Pick(block)));
                    self.held.insert(gripper, (block, members));
                }
                Action::PlaceOn { gripper, target, u, v } => {
                    let (root, _) = &before.held[&gripper];
                    let cell = match target {
                        Location::Surface(s) => {
                            let s = inst.surface(s);
                            Cell::new(s.lo + u as i32 - 1 - (v as i32 - 1), s.level)
                        }
                        Location::Block(l) => {
                            let c = before.anchors[&l];
                            Cell::new(c.x + u as i32 - 1 - (v as i32 - 1), c.level + 1)
                        }
                    };
                    moves.insert((gripper, Move::Put(*root, cell)));
                }
            }
        }
        for a in actions {
            if let Action::Pick { gripper, .. } = a {
                for m in self.held[gripper].1.keys() {
                    self.anchors.remove(m);
                }
            }
        }
        for (g, m) in &moves {
            if let Move::Put(_, cell) = m {
                let (_, members) = before.held[g].clone();
                for (b, off) in members {
                    self.anchors.insert(b, Cell::new(cell.x + off.dx, cell.level + off.dh));
                }
                self.held.remove(g);
            }
        }
        moves
    }
}

pub type Canonical = Vec<BTreeSet<(GripperId, Move)>>;

pub fn canonical(inst: &ProblemInstance, plan: &Plan) -> Canonical {
    let mut pos = Positions::new(inst);
    plan.steps.iter().map(|s| pos.step(inst, s)).collect()
}

/// Every per-gripper action that could possibly apply, without consulting
/// the planner: picks of any anchored block, placements of the carried root
/// on any unit pair of any surface or anchored block.
fn raw_actions(inst: &ProblemInstance, pos: &Positions, g: GripperId) -> Vec<Action> {
    match pos.held.get(&g) {
        None => pos.anchors.keys().map(|&b| Action::Pick { gripper: g, block: b }).collect(),
        Some((root, _)) => {
            let mut targets: Vec<Location> = inst.surface_ids().map(Location::Surface).collect();
            targets.extend(pos.anchors.keys().map(|&b| Location::Block(b)));
            let mut out = Vec::new();
            for t in targets {
                for u in 1..=inst.location_size(t) {
                    for v in 1..=inst.size(*root) {
                        out.push(Action::PlaceOn { gripper: g, target: t, u, v });
                    }
                }
            }
            out
        }
    }
}

fn joint(per: &[Vec<Action>]) -> Vec<Vec<Action>> {
    let mut out = vec![vec![]];
    for opts in per {
        let mut next = Vec::new();
        for partial in &out {
            next.push(partial.clone());
            for a in opts {
                let mut p = partial.clone();
                p.push(a.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.retain(|s| !s.is_empty());
    out
}

/// All plans up to the horizon that the validator accepts.
pub fn brute_force(inst: &ProblemInstance) -> BTreeSet<Canonical> {
    let mut found = BTreeSet::new();
    let mut frontier = vec![(Plan::default(), Positions::new(inst))];
    for _ in 0..inst.makespan {
        let mut next = Vec::new();
        for (plan, pos) in &frontier {
            let per: Vec<Vec<Action>> = inst.gripper_ids().map(|g| raw_actions(inst, pos, g)).collect();
            for step in joint(&per) {
                let mut p = plan.clone();
                p.steps.push(step.clone());
                let violations = validate_plan(inst, &p);
                if violations.iter().any(|v| v.category != Category::Goal) {
                    continue;
                }
                if violations.is_empty() {
                    found.insert(canonical(inst, &p));
                }
                let mut q = pos.clone();
                q.step(inst, &step);
                next.push((p, q));
            }
        }
        frontier = next;
    }
    found
}
