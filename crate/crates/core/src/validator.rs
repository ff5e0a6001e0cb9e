//! Independent plan checker.
//!
//! The replay keeps one `on` atom per block as its only positional record
//! and recovers everything else (cells, support, connectivity) by literal
//! rule iteration. It shares the physics model with the planner but none of
//! its grid bookkeeping, so disagreements between the two point at bugs.
//!
//! All violations are collected. A failed action is skipped and the replay
//! continues from whatever the remaining actions of the step produce.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::closure::{self, Above, On, OracleRelations, Seeds};
use crate::model::{
    Action, BlockId, Cell, Edge, GoalAtom, GripperId, HeldAssembly, Location, Offset, Plan,
    ProblemInstance, WorldState,
};
use crate::stability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Precondition,
    Concurrency,
    Circularity,
    Stability,
    HeldStability,
    Goal,
    Format,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Precondition => "precondition",
            Category::Concurrency => "concurrency",
            Category::Circularity => "circularity",
            Category::Stability => "stability",
            Category::HeldStability => "held-stability",
            Category::Goal => "goal",
            Category::Format => "format",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// 1-based step index; `0` for the initial state, `T + 1` for the goal.
    pub step: usize,
    pub category: Category,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}: {}", self.step, self.category, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
struct Replay {
    anchored: BTreeMap<BlockId, On>,
    /// Gripper -> (root, anchor atom of every other member).
    held: BTreeMap<GripperId, (BlockId, BTreeMap<BlockId, On>)>,
    frontier: Option<i32>,
}

impl Replay {
    fn seeds(&self) -> Seeds {
        Seeds {
            anchored: self.anchored.values().copied().collect(),
            held: self
                .held
                .iter()
                .map(|(&g, (root, m))| (g, *root, m.values().copied().collect()))
                .collect(),
        }
    }
}

/// What the rules say about the current replay state.
struct View {
    rel: OracleRelations,
    /// Left end of every anchored block.
    position: BTreeMap<BlockId, Cell>,
    /// Per gripper, offsets of members relative to the root.
    held_offsets: BTreeMap<GripperId, BTreeMap<BlockId, Offset>>,
}

impl View {
    fn grid(&self, inst: &ProblemInstance) -> BTreeMap<Cell, (BlockId, u32)> {
        let mut g = BTreeMap::new();
        for (&b, c) in &self.position {
            for v in 1..=inst.size(b) {
                g.insert(Cell::new(c.x + v as i32 - 1, c.level), (b, v));
            }
        }
        g
    }

    /// `onAux` restricted to anchored blocks.
    fn anchored_aux(&self) -> BTreeSet<(BlockId, Location)> {
        self.rel
            .on
            .iter()
            .filter(|o| self.position.contains_key(&o.block))
            .map(|o| (o.block, o.on))
            .collect()
    }
}

fn left_ends(inst: &ProblemInstance, above: &BTreeSet<Above>) -> Result<BTreeMap<BlockId, Cell>, String> {
    let mut pos: BTreeMap<BlockId, Cell> = BTreeMap::new();
    for a in above {
        let c = Cell::new(a.x - (a.v as i32 - 1), a.h - 1);
        if a.v > inst.size(a.block) {
            return Err(format!("unit {} of {} out of range", a.v, inst.block(a.block).id));
        }
        match pos.insert(a.block, c) {
            Some(prev) if prev != c => {
                return Err(format!("block {:?} derived at two positions", inst.block(a.block).id));
            }
            _ => {}
        }
    }
    Ok(pos)
}

fn view(inst: &ProblemInstance, replay: &Replay) -> Result<View, String> {
    let rel = closure::fixpoint_from_seeds(inst, &replay.seeds()).map_err(|e| format!("{e}"))?;
    let position = left_ends(inst, &rel.above)?;
    for &b in replay.anchored.keys() {
        if !position.contains_key(&b) {
            return Err(format!("block {:?} has no derivable position", inst.block(b).id));
        }
    }
    let mut held_offsets = BTreeMap::new();
    for (g, above) in &rel.held_above {
        let lefts = left_ends(inst, above)?;
        let offs = lefts
            .into_iter()
            .map(|(b, c)| (b, Offset { dx: c.x, dh: c.level }))
            .collect();
        held_offsets.insert(*g, offs);
    }
    let v = View { rel, position, held_offsets };
    // Every anchored atom must agree with the grid: no two blocks share a cell.
    let mut count = 0usize;
    for &b in v.position.keys() {
        count += inst.size(b) as usize;
    }
    if v.grid(inst).len() != count {
        return Err("two blocks occupy the same cell".into());
    }
    Ok(v)
}

/// A `WorldState` with the rule-derived positions, for the stability model.
fn as_world(inst: &ProblemInstance, replay: &Replay, v: &View) -> Result<WorldState, String> {
    let mut w = WorldState::new();
    for (&b, &c) in &v.position {
        w.insert_block(inst, b, c).map_err(|e| format!("{e}"))?;
    }
    for (&g, (root, _)) in &replay.held {
        let mut asm = HeldAssembly::single(*root);
        if let Some(offs) = v.held_offsets.get(&g) {
            for (&b, &o) in offs {
                asm.members.insert(b, o);
            }
        }
        w.set_held(g, asm);
    }
    w.set_frontier(replay.frontier);
    Ok(w)
}

/// Fixpoint of `connected` over anchored support pairs: symmetric and
/// transitive.
fn connected_pairs(aux: &BTreeSet<(BlockId, Location)>) -> BTreeSet<(Location, Location)> {
    let mut conn: BTreeSet<(Location, Location)> = BTreeSet::new();
    for &(b, l) in aux {
        conn.insert((Location::Block(b), l));
        conn.insert((l, Location::Block(b)));
    }
    loop {
        let mut new = Vec::new();
        for &(a, b) in &conn {
            for &(_, d) in conn.iter().filter(|(c, _)| *c == b) {
                if a != d && !conn.contains(&(a, d)) {
                    new.push((a, d));
                }
            }
        }
        if new.is_empty() {
            return conn;
        }
        conn.extend(new);
    }
}

fn goal_holds(inst: &ProblemInstance, replay: &Replay, v: &View, atom: &GoalAtom) -> bool {
    let aux = v.anchored_aux();
    match atom {
        GoalAtom::Bridge { left, right } => {
            let conn = connected_pairs(&aux);
            let is_left = |n: Location| left.iter().any(|&s| conn.contains(&(n, Location::Surface(s))));
            let is_right = |n: Location| right.iter().any(|&s| conn.contains(&(n, Location::Surface(s))));
            v.position
                .keys()
                .any(|&b| is_left(Location::Block(b)) && is_right(Location::Block(b)))
        }
        GoalAtom::Overhang { surface, edge, min_units } => {
            let conn = connected_pairs(&aux);
            let s = inst.surface(*surface);
            let mut covered = BTreeSet::new();
            for (&b, c) in &v.position {
                if conn.contains(&(Location::Block(b), Location::Surface(*surface))) {
                    for i in 0..inst.size(b) as i32 {
                        covered.insert(c.x + i);
                    }
                }
            }
            let (start, dir) = match edge {
                Edge::Right => (s.hi + 1, 1),
                Edge::Left => (s.lo - 1, -1),
            };
            (0..*min_units as i32).all(|k| covered.contains(&(start + dir * k)))
        }
        GoalAtom::PlacedOn { block, on } => {
            replay.anchored.contains_key(block) && aux.contains(&(*block, *on))
        }
        GoalAtom::PlacedOnAt { block, on, u, v: unit } => {
            replay.anchored.contains_key(block)
                && v.rel.on.contains(&On { block: *block, on: *on, u: *u, v: *unit })
        }
        GoalAtom::ExactCell { block, cell } => v.position.get(block) == Some(cell),
    }
}

struct Checker<'i> {
    inst: &'i ProblemInstance,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn report(&mut self, step: usize, category: Category, detail: String) {
        self.out.push(Violation { step, category, detail });
    }

    fn name(&self, b: BlockId) -> &str {
        &self.inst.block(b).id
    }

    fn action_in_range(&self, a: &Action) -> bool {
        let inst = self.inst;
        let loc_ok = |l: Location| match l {
            Location::Block(b) => b.index() < inst.blocks.len(),
            Location::Surface(s) => s.index() < inst.surfaces.len(),
        };
        a.gripper().index() < inst.grippers.len()
            && match *a {
                Action::Pick { block, .. } => block.index() < inst.blocks.len(),
                Action::PlaceOn { target, .. } => loc_ok(target),
            }
    }
}

/// Replays `plan` from the initial state and returns every violation found.
/// An empty result means the plan is valid.
pub fn validate_plan(inst: &ProblemInstance, plan: &Plan) -> Vec<Violation> {
    let mut ck = Checker { inst, out: Vec::new() };
    let start = match inst.verify() {
        Ok(s) => s,
        Err(e) => {
            ck.report(0, Category::Format, format!("invalid instance: {e}"));
            return ck.out;
        }
    };
    if plan.steps.len() > inst.makespan as usize {
        ck.report(
            plan.steps.len(),
            Category::Format,
            format!("plan has {} steps, the horizon is {}", plan.steps.len(), inst.makespan),
        );
    }

    let mut replay = Replay { frontier: None, ..Replay::default() };
    let seeds = closure::anchor_seeds(inst, &start);
    for on in seeds.anchored {
        replay.anchored.insert(on.block, on);
    }
    for (g, root, members) in seeds.held {
        replay.held.insert(g, (root, members.into_iter().map(|o| (o.block, o)).collect()));
    }
    let mut current = match view(inst, &replay) {
        Ok(v) => v,
        Err(e) => {
            ck.report(0, Category::Circularity, e);
            return ck.out;
        }
    };

    for (k, actions) in plan.steps.iter().enumerate() {
        let step = k + 1;
        if let Some((next_replay, next_view)) = ck.step(step, &replay, &current, actions) {
            replay = next_replay;
            current = next_view;
        }
    }

    let end = plan.steps.len() + 1;
    if !replay.held.is_empty() {
        let names: Vec<&str> = replay.held.keys().map(|g| inst.grippers[g.index()].as_str()).collect();
        ck.report(end, Category::Goal, format!("grippers still holding blocks: {}", names.join(", ")));
    }
    for atom in &inst.goal.atoms {
        if !goal_holds(inst, &replay, &current, atom) {
            ck.report(end, Category::Goal, format!("goal not reached: {}", describe_atom(inst, atom)));
        }
    }
    ck.out
}

fn describe_atom(inst: &ProblemInstance, atom: &GoalAtom) -> String {
    let sname = |s: &crate::model::SurfaceId| inst.surface(*s).id.clone();
    match atom {
        GoalAtom::Bridge { left, right } => format!(
            "bridge [{}] to [{}]",
            left.iter().map(sname).collect::<Vec<_>>().join(", "),
            right.iter().map(sname).collect::<Vec<_>>().join(", ")
        ),
        GoalAtom::Overhang { surface, edge, min_units } => {
            let side = match edge {
                Edge::Left => "left",
                Edge::Right => "right",
            };
            format!("overhang of {} units past the {side} edge of {:?}", min_units, inst.surface(*surface).id)
        }
        GoalAtom::PlacedOn { block, on } => {
            format!("{:?} on {:?}", inst.block(*block).id, inst.location_name(*on))
        }
        GoalAtom::PlacedOnAt { block, on, u, v } => format!(
            "unit {} of {:?} on unit {} of {:?}",
            v,
            inst.block(*block).id,
            u,
            inst.location_name(*on)
        ),
        GoalAtom::ExactCell { block, cell } => {
            format!("{:?} at column {} level {}", inst.block(*block).id, cell.x, cell.level)
        }
    }
}

impl Checker<'_> {
    /// Applies one step. Returns the new replay state, or `None` when the
    /// result cannot be interpreted (the previous state is kept).
    fn step(
        &mut self,
        step: usize,
        replay: &Replay,
        cur: &View,
        actions: &[Action],
    ) -> Option<(Replay, View)> {
        let inst = self.inst;
        let aux = cur.anchored_aux();
        let grid = cur.grid(inst);
        let mut used: BTreeSet<GripperId> = BTreeSet::new();
        let mut lifted_all: BTreeSet<BlockId> = BTreeSet::new();
        let mut filled: BTreeSet<Cell> = BTreeSet::new();
        let mut picks: Vec<(GripperId, BlockId, BTreeSet<BlockId>)> = Vec::new();
        let mut places: Vec<(GripperId, On, Vec<Cell>)> = Vec::new();

        for a in actions {
            if !self.action_in_range(a) {
                self.report(step, Category::Format, "action refers to an unknown gripper, block or surface".into());
                continue;
            }
            let g = a.gripper();
            let gname = inst.grippers[g.index()].clone();
            if !used.insert(g) {
                self.report(step, Category::Concurrency, format!("gripper {gname:?} acts twice"));
                continue;
            }
            match *a {
                Action::Pick { block, .. } => {
                    if replay.held.contains_key(&g) {
                        self.report(step, Category::Precondition, format!("gripper {gname:?} is not empty"));
                        continue;
                    }
                    if !replay.anchored.contains_key(&block) {
                        self.report(step, Category::Precondition, format!("{:?} is not on the grid", self.name(block)));
                        continue;
                    }
                    let mut set: BTreeSet<BlockId> = cur
                        .rel
                        .supported
                        .iter()
                        .filter(|(_, l)| *l == Location::Block(block))
                        .map(|(b, _)| *b)
                        .collect();
                    set.insert(block);
                    let outside = aux.iter().find(|(m, l)| {
                        *m != block
                            && set.contains(m)
                            && !matches!(l, Location::Block(p) if set.contains(p))
                    });
                    if let Some((m, _)) = outside {
                        self.report(
                            step,
                            Category::Precondition,
                            format!("{:?} is not pickable: {:?} also rests elsewhere", self.name(block), self.name(*m)),
                        );
                        continue;
                    }
                    if let Some(b) = set.intersection(&lifted_all).next() {
                        self.report(step, Category::Concurrency, format!("{:?} is lifted twice", self.name(*b)));
                        continue;
                    }
                    lifted_all.extend(set.iter().copied());
                    picks.push((g, block, set));
                }
                Action::PlaceOn { target, u, v, .. } => {
                    let Some((root, _)) = replay.held.get(&g) else {
                        self.report(step, Category::Precondition, format!("gripper {gname:?} holds nothing"));
                        continue;
                    };
                    if v == 0 || v > inst.size(*root) || u == 0 || u > inst.location_size(target) {
                        self.report(step, Category::Precondition, "unit index out of range".into());
                        continue;
                    }
                    let under = match target {
                        Location::Surface(s) => {
                            let surf = inst.surface(s);
                            Cell::new(surf.lo + u as i32 - 1, surf.level)
                        }
                        Location::Block(l) => match cur.position.get(&l) {
                            Some(c) => Cell::new(c.x + u as i32 - 1, c.level + 1),
                            None => {
                                self.report(
                                    step,
                                    Category::Precondition,
                                    format!("target {:?} is not on the grid", self.name(l)),
                                );
                                continue;
                            }
                        },
                    };
                    let root_left = Cell::new(under.x - (v as i32 - 1), under.level);
                    let offsets = cur.held_offsets.get(&g).cloned().unwrap_or_default();
                    let mut cells = Vec::new();
                    let mut members: Vec<(BlockId, Offset)> = alloc::vec![(*root, Offset::default())];
                    members.extend(offsets.into_iter().filter(|(b, _)| b != root));
                    for (b, o) in members {
                        for i in 0..inst.size(b) as i32 {
                            cells.push(Cell::new(root_left.x + o.dx + i, root_left.level + o.dh));
                        }
                    }
                    if let Some(c) = cells.iter().find(|c| grid.contains_key(c) || !inst.occupiable(**c)) {
                        self.report(
                            step,
                            Category::Precondition,
                            format!("cell at column {} level {} is not free", c.x, c.level),
                        );
                        continue;
                    }
                    if let Some(c) = cells.iter().find(|c| filled.contains(c)) {
                        self.report(
                            step,
                            Category::Concurrency,
                            format!("two placements fill column {} level {}", c.x, c.level),
                        );
                        continue;
                    }
                    filled.extend(cells.iter().copied());
                    places.push((g, On { block: *root, on: target, u, v }, cells));
                }
            }
        }

        // A placement onto a block that is lifted in the same step.
        places.retain(|(_, on, _)| match on.on {
            Location::Block(l) if lifted_all.contains(&l) => {
                self.out.push(Violation {
                    step,
                    category: Category::Concurrency,
                    detail: format!("target {:?} is lifted in the same step", inst.block(l).id),
                });
                false
            }
            _ => true,
        });

        let mut next = replay.clone();
        let mut newly_held = Vec::new();
        for (g, root, set) in &picks {
            let mut members = BTreeMap::new();
            for m in set {
                let on = next.anchored.remove(m).expect("lifted blocks are anchored");
                if m != root {
                    members.insert(*m, on);
                }
            }
            next.held.insert(*g, (*root, members));
            newly_held.push(*g);
        }
        let mut lefts = Vec::new();
        for (g, on, cells) in &places {
            let (_, members) = next.held.remove(g).expect("placing gripper holds an assembly");
            next.anchored.insert(on.block, *on);
            next.anchored.extend(members);
            lefts.push(cells.iter().map(|c| c.x).min().unwrap_or(0));
        }

        if let Some(slack) = inst.left_to_right_slack() {
            if let Some(front) = replay.frontier {
                for &l in &lefts {
                    if l < front - slack {
                        self.report(
                            step,
                            Category::Precondition,
                            format!("placement at column {l} violates left-to-right order (frontier {front})"),
                        );
                    }
                }
            }
            next.frontier = match (replay.frontier, lefts.iter().copied().max()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }

        let nv = match view(inst, &next) {
            Ok(v) => v,
            Err(e) => {
                self.report(step, Category::Circularity, e);
                return None;
            }
        };
        let world = match as_world(inst, &next, &nv) {
            Ok(w) => w,
            Err(e) => {
                self.report(step, Category::Circularity, e);
                return None;
            }
        };
        for &b in nv.position.keys() {
            if !world.has_support(inst, b) {
                self.report(step, Category::Stability, format!("{:?} rests on nothing", self.name(b)));
            }
        }
        match stability::check_state(inst, &world) {
            Ok(v) if v.stable => {}
            Ok(v) => {
                let who = v.witness.map(|b| format!(" ({:?} cannot be balanced)", self.name(b))).unwrap_or_default();
                self.report(step, Category::Stability, format!("structure is unstable{who}"));
            }
            Err(e) => self.report(step, Category::Stability, format!("stability check failed: {e}")),
        }
        for g in newly_held {
            match stability::check_held_stability(inst, &world, g) {
                Ok(v) if v.stable => {}
                Ok(_) => self.report(
                    step,
                    Category::HeldStability,
                    format!("assembly held by {:?} is unstable", inst.grippers[g.index()]),
                ),
                Err(e) => self.report(step, Category::HeldStability, format!("stability check failed: {e}")),
            }
        }
        Some((next, nv))
    }
}
