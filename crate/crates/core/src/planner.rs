//! Joint actions, the successor function and bounded-horizon search.
//!
//! A step is a set of simultaneous actions, at most one per gripper. Picks
//! lift a block together with everything it transitively supports; places
//! put a carried assembly down so that its root rests on something. Only the
//! state after the whole step is checked for stability, which is what allows
//! placements that are infeasible in any serial order.
//!
//! Ordering of alternatives is fixed: grippers by declaration order; per
//! gripper picks (by block) before places (by target column, then level)
//! before idling. Searches are therefore deterministic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::closure;
use crate::model::{
    Action, BlockId, Cell, GoalAtom, GoalSpec, GripperId, HeldAssembly, Location, Offset, Plan,
    ProblemInstance, StateKey, ValidationError, WorldState,
};
use crate::stability;

/// Set of simultaneous actions, sorted by gripper.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointAction(pub Vec<Action>);

impl JointAction {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn placements(&self) -> usize {
        self.0.iter().filter(|a| a.is_place()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotPickable {
    NotAnchored,
    /// A block that would be carried along also rests on something outside
    /// the carried set.
    ExternallySupported(BlockId),
}

impl fmt::Display for NotPickable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotPickable::NotAnchored => f.write_str("block is not on the grid"),
            NotPickable::ExternallySupported(b) => {
                write!(f, "externally supported member (block {})", b.0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rejected {
    Precondition(&'static str),
    Conflict(&'static str),
    Invalid(ValidationError),
    Unstable(Option<BlockId>),
    HeldUnstable(GripperId),
    Ordering,
    Numerical,
}

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejected::Precondition(why) => write!(f, "precondition: {why}"),
            Rejected::Conflict(why) => write!(f, "conflict: {why}"),
            Rejected::Invalid(e) => write!(f, "invalid successor: {e}"),
            Rejected::Unstable(_) => f.write_str("unstable"),
            Rejected::HeldUnstable(_) => f.write_str("held unstable"),
            Rejected::Ordering => f.write_str("ordering"),
            Rejected::Numerical => f.write_str("stability LP did not converge"),
        }
    }
}

/// `S(b)`: `b` plus every block transitively supported by it, provided no
/// member other than `b` rests on anything outside the set.
pub fn pickable_set(
    inst: &ProblemInstance,
    state: &WorldState,
    b: BlockId,
) -> Result<BTreeSet<BlockId>, NotPickable> {
    let aux = anchored_aux(inst, state);
    let supported = closure::supported_closure(&aux).expect("grid states have no support cycles");
    pickable_from(&aux, &supported, state, b)
}

fn anchored_aux(inst: &ProblemInstance, state: &WorldState) -> BTreeSet<(BlockId, Location)> {
    closure::derive_on(inst, state)
        .into_iter()
        .filter(|a| state.anchor(a.block).is_some())
        .map(|a| (a.block, a.on))
        .collect()
}

fn pickable_from(
    aux: &BTreeSet<(BlockId, Location)>,
    supported: &BTreeSet<(BlockId, Location)>,
    state: &WorldState,
    b: BlockId,
) -> Result<BTreeSet<BlockId>, NotPickable> {
    if state.anchor(b).is_none() {
        return Err(NotPickable::NotAnchored);
    }
    let mut set: BTreeSet<BlockId> = supported
        .iter()
        .filter(|(_, l)| *l == Location::Block(b))
        .map(|(m, _)| *m)
        .collect();
    set.insert(b);
    for &(m, l) in aux {
        if m == b || !set.contains(&m) {
            continue;
        }
        let inside = matches!(l, Location::Block(p) if set.contains(&p));
        if !inside {
            return Err(NotPickable::ExternallySupported(m));
        }
    }
    Ok(set)
}

/// One gripper's contribution to a step, with everything needed to apply it.
#[derive(Clone, Debug)]
struct Candidate {
    action: Action,
    /// Blocks lifted by a pick.
    lifted: BTreeSet<BlockId>,
    /// Global cells filled by a place.
    cells: Vec<(Cell, BlockId, u32)>,
    target: Option<Location>,
    /// Root left end of a place.
    root: Cell,
}

impl Candidate {
    fn leftmost(&self) -> i32 {
        self.cells.iter().map(|(c, _, _)| c.x).min().unwrap_or(self.root.x)
    }
}

/// Cells of `asm` with its root's left end at `root`, if all are free and
/// occupiable.
fn placed_cells(
    inst: &ProblemInstance,
    state: &WorldState,
    asm: &HeldAssembly,
    root: Cell,
) -> Option<Vec<(Cell, BlockId, u32)>> {
    let mut out = Vec::new();
    for (rel, b, v) in asm.cells(inst) {
        let c = Cell::new(root.x + rel.x, root.level + rel.level);
        if !inst.occupiable(c) || !state.is_free(c) {
            return None;
        }
        out.push((c, b, v));
    }
    Some(out)
}

/// Canonical `(target, u, v)` for a root placed at `root`: the leftmost root
/// unit that has something directly below it.
fn canonical_anchor(
    inst: &ProblemInstance,
    state: &WorldState,
    root_block: BlockId,
    root: Cell,
) -> Option<(Location, u32, u32)> {
    (1..=inst.size(root_block)).find_map(|v| {
        let c = Cell::new(root.x + v as i32 - 1, root.level);
        if let Some((l, u)) = state.occupant(c.below()) {
            return Some((Location::Block(l), u, v));
        }
        inst.surface_under(c)
            .map(|s| (Location::Surface(s), (c.x - inst.surface(s).lo + 1) as u32, v))
    })
}

/// Where unit `u` of `target` is, as the cell a block resting on it occupies.
fn cell_on(inst: &ProblemInstance, state: &WorldState, target: Location, u: u32) -> Option<Cell> {
    if u == 0 || u > inst.location_size(target) {
        return None;
    }
    match target {
        Location::Surface(s) => {
            let surf = inst.surface(s);
            Some(Cell::new(surf.lo + u as i32 - 1, surf.level))
        }
        Location::Block(l) => {
            let a = state.anchor(l)?;
            Some(Cell::new(a.x + u as i32 - 1, a.level + 1))
        }
    }
}

fn place_candidates(
    inst: &ProblemInstance,
    state: &WorldState,
    g: GripperId,
    asm: &HeldAssembly,
) -> Vec<Candidate> {
    let mut spots: BTreeSet<Cell> = BTreeSet::new();
    for (c, _, _) in state.cells() {
        let up = Cell::new(c.x, c.level + 1);
        if state.is_free(up) && inst.occupiable(up) {
            spots.insert(up);
        }
    }
    for s in &inst.surfaces {
        for x in s.lo..=s.hi {
            let c = Cell::new(x, s.level);
            if state.is_free(c) && inst.occupiable(c) {
                spots.insert(c);
            }
        }
    }
    let size = inst.size(asm.root) as i32;
    let mut roots: BTreeSet<(i32, i32)> = BTreeSet::new();
    for c in &spots {
        for k in 0..size {
            roots.insert((c.x - k, c.level));
        }
    }
    let mut out = Vec::new();
    for (x, level) in roots {
        let root = Cell::new(x, level);
        let Some(cells) = placed_cells(inst, state, asm, root) else { continue };
        let Some((target, u, v)) = canonical_anchor(inst, state, asm.root, root) else { continue };
        out.push(Candidate {
            action: Action::PlaceOn { gripper: g, target, u, v },
            lifted: BTreeSet::new(),
            cells,
            target: Some(target),
            root,
        });
    }
    out
}

/// Per-state cache of everything joint-action enumeration needs.
struct Options {
    per_gripper: Vec<Vec<Candidate>>,
    may_idle: Vec<bool>,
}

/// With `last` set, only joint actions that can end in a goal state are
/// produced: nothing is picked and every loaded gripper places.
fn options(inst: &ProblemInstance, state: &WorldState, last: bool) -> Options {
    let aux = anchored_aux(inst, state);
    let supported = closure::supported_closure(&aux).expect("grid states have no support cycles");
    let mut per_gripper = Vec::new();
    let mut may_idle = Vec::new();
    for g in inst.gripper_ids() {
        let mut opts = Vec::new();
        match state.held(g) {
            None if last => {}
            None => {
                for (b, cell) in state.anchored() {
                    if let Ok(lifted) = pickable_from(&aux, &supported, state, b) {
                        opts.push(Candidate {
                            action: Action::Pick { gripper: g, block: b },
                            lifted,
                            cells: Vec::new(),
                            target: None,
                            root: cell,
                        });
                    }
                }
            }
            Some(asm) => opts = place_candidates(inst, state, g, asm),
        }
        may_idle.push(!(last && state.held(g).is_some()));
        per_gripper.push(opts);
    }
    Options { per_gripper, may_idle }
}

fn conflicts(a: &Candidate, b: &Candidate) -> bool {
    if a.lifted.intersection(&b.lifted).next().is_some() {
        return true;
    }
    let lifted_target = |p: &Candidate, q: &Candidate| match q.target {
        Some(Location::Block(l)) => p.lifted.contains(&l),
        _ => false,
    };
    if lifted_target(a, b) || lifted_target(b, a) {
        return true;
    }
    a.cells.iter().any(|(c, _, _)| b.cells.iter().any(|(d, _, _)| c == d))
}

fn joint_candidates(opts: &Options) -> Vec<Vec<&Candidate>> {
    fn go<'a>(
        opts: &'a Options,
        g: usize,
        chosen: &mut Vec<&'a Candidate>,
        out: &mut Vec<Vec<&'a Candidate>>,
    ) {
        if g == opts.per_gripper.len() {
            out.push(chosen.clone());
            return;
        }
        for c in &opts.per_gripper[g] {
            if chosen.iter().any(|o| conflicts(o, c)) {
                continue;
            }
            chosen.push(c);
            go(opts, g + 1, chosen, out);
            chosen.pop();
        }
        if opts.may_idle[g] {
            go(opts, g + 1, chosen, out);
        }
    }
    let mut out = Vec::new();
    go(opts, 0, &mut Vec::new(), &mut out);
    out
}

/// Every conflict-free combination of per-gripper actions, the empty joint
/// action included.
pub fn enumerate_joint_actions(inst: &ProblemInstance, state: &WorldState) -> Vec<JointAction> {
    let opts = options(inst, state, false);
    joint_candidates(&opts)
        .into_iter()
        .map(|cs| JointAction(cs.into_iter().map(|c| c.action.clone()).collect()))
        .collect()
}

/// Builds the candidate for an arbitrary action, checking preconditions.
fn candidate_for(
    inst: &ProblemInstance,
    state: &WorldState,
    action: &Action,
) -> Result<Candidate, Rejected> {
    match *action {
        Action::Pick { gripper, block } => {
            if gripper.index() >= inst.grippers.len() || block.index() >= inst.blocks.len() {
                return Err(Rejected::Precondition("unknown gripper or block"));
            }
            if state.held(gripper).is_some() {
                return Err(Rejected::Precondition("gripper is not empty"));
            }
            let lifted = pickable_set(inst, state, block)
                .map_err(|_| Rejected::Precondition("block is not pickable"))?;
            let root = state.anchor(block).expect("pickable blocks are anchored");
            Ok(Candidate { action: action.clone(), lifted, cells: Vec::new(), target: None, root })
        }
        Action::PlaceOn { gripper, target, u, v } => {
            if gripper.index() >= inst.grippers.len() {
                return Err(Rejected::Precondition("unknown gripper"));
            }
            let asm = state.held(gripper).ok_or(Rejected::Precondition("gripper holds nothing"))?;
            if v == 0 || v > inst.size(asm.root) {
                return Err(Rejected::Precondition("unit of the held block out of range"));
            }
            let valid_target = match target {
                Location::Block(l) => l.index() < inst.blocks.len() && state.anchor(l).is_some(),
                Location::Surface(s) => s.index() < inst.surfaces.len(),
            };
            if !valid_target {
                return Err(Rejected::Precondition("target is not on the grid"));
            }
            let under = cell_on(inst, state, target, u)
                .ok_or(Rejected::Precondition("unit of the target out of range"))?;
            let root = Cell::new(under.x - (v as i32 - 1), under.level);
            let cells = placed_cells(inst, state, asm, root)
                .ok_or(Rejected::Precondition("target cells are not free"))?;
            Ok(Candidate {
                action: action.clone(),
                lifted: BTreeSet::new(),
                cells,
                target: Some(target),
                root,
            })
        }
    }
}

type Verdict = Result<(bool, Option<BlockId>), stability::StabilityError>;

/// Stability verdict memo keyed by the full configuration.
#[derive(Default)]
struct StabilityCache {
    grounded: BTreeMap<Vec<(BlockId, Cell)>, Verdict>,
    held: BTreeMap<HeldAssembly, Result<bool, stability::StabilityError>>,
}

/// The successor function shared by `apply` and the searches.
struct Successor<'i> {
    inst: &'i ProblemInstance,
    cache: Option<StabilityCache>,
}

impl<'i> Successor<'i> {
    fn new(inst: &'i ProblemInstance, cached: bool) -> Self {
        Successor { inst, cache: cached.then(StabilityCache::default) }
    }

    fn grounded_stable(&mut self, state: &WorldState) -> Result<(bool, Option<BlockId>), Rejected> {
        let inst = self.inst;
        let compute = || {
            stability::check_state(inst, state).map(|v| (v.stable, v.witness))
        };
        let r = match &mut self.cache {
            Some(cache) => *cache
                .grounded
                .entry(state.anchored().collect())
                .or_insert_with(compute),
            None => compute(),
        };
        r.map_err(|_| Rejected::Numerical)
    }

    fn held_stable(&mut self, state: &WorldState, g: GripperId) -> Result<bool, Rejected> {
        let inst = self.inst;
        let compute = || stability::check_held_stability(inst, state, g).map(|v| v.stable);
        let r = match (&mut self.cache, state.held(g)) {
            (Some(cache), Some(asm)) => *cache.held.entry(asm.clone()).or_insert_with(compute),
            _ => compute(),
        };
        r.map_err(|_| Rejected::Numerical)
    }

    fn step(&mut self, state: &WorldState, chosen: &[&Candidate]) -> Result<WorldState, Rejected> {
        let inst = self.inst;
        let mut next = state.clone();
        next.t += 1;
        let mut picked_by: Vec<GripperId> = Vec::new();
        for c in chosen {
            if let Action::Pick { gripper, block } = c.action {
                let mut asm = HeldAssembly::single(block);
                for &m in &c.lifted {
                    let cell = next.remove_block(inst, m).expect("lifted blocks are anchored");
                    asm.members.insert(
                        m,
                        Offset { dx: cell.x - c.root.x, dh: cell.level - c.root.level },
                    );
                }
                next.set_held(gripper, asm);
                picked_by.push(gripper);
            }
        }
        let mut lefts = Vec::new();
        for c in chosen {
            if let Action::PlaceOn { gripper, .. } = c.action {
                let asm = next.take_held(gripper).expect("placing gripper holds an assembly");
                for &(cell, b, _) in &c.cells {
                    debug_assert!(asm.contains(b));
                    if next.anchor(b).is_none() {
                        let root_of_b = asm.members[&b];
                        let left = Cell::new(c.root.x + root_of_b.dx, c.root.level + root_of_b.dh);
                        next.insert_block(inst, b, left).map_err(Rejected::Invalid)?;
                    }
                    let _ = cell;
                }
                lefts.push(c.leftmost());
            }
        }
        next.check_invariants(inst).map_err(Rejected::Invalid)?;

        if let Some(slack) = inst.left_to_right_slack() {
            if let Some(front) = state.frontier() {
                if lefts.iter().any(|&l| l < front - slack) {
                    return Err(Rejected::Ordering);
                }
            }
            let newest = lefts.iter().copied().max();
            next.set_frontier(match (state.frontier(), newest) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            });
        }

        let (ok, witness) = self.grounded_stable(&next)?;
        if !ok {
            return Err(Rejected::Unstable(witness));
        }
        for g in picked_by {
            if next.held(g).map_or(0, |a| a.len()) >= 2 && !self.held_stable(&next, g)? {
                return Err(Rejected::HeldUnstable(g));
            }
        }
        Ok(next)
    }

    fn apply(&mut self, state: &WorldState, ja: &JointAction) -> Result<WorldState, Rejected> {
        let mut cands = Vec::new();
        for (i, a) in ja.0.iter().enumerate() {
            if ja.0[..i].iter().any(|b| b.gripper() == a.gripper()) {
                return Err(Rejected::Conflict("two actions for one gripper"));
            }
            cands.push(candidate_for(self.inst, state, a)?);
        }
        for (i, a) in cands.iter().enumerate() {
            if cands[..i].iter().any(|b| conflicts(a, b)) {
                return Err(Rejected::Conflict("actions touch the same blocks or cells"));
            }
        }
        let refs: Vec<&Candidate> = cands.iter().collect();
        self.step(state, &refs)
    }
}

/// Applies a joint action: picks lift their sets, places fill their cells,
/// then the grid invariants, the ordering constraint, grounded stability and
/// the stability of newly lifted assemblies are checked.
pub fn apply(
    inst: &ProblemInstance,
    state: &WorldState,
    ja: &JointAction,
) -> Result<WorldState, Rejected> {
    Successor::new(inst, false).apply(state, ja)
}

/// Goal test. Every gripper must be empty.
pub fn check_goal(inst: &ProblemInstance, state: &WorldState, goal: &GoalSpec) -> bool {
    if goal.atoms.is_empty() {
        return true;
    }
    if !state.all_grippers_empty() {
        return false;
    }
    // Cheap atoms first; connectivity is only computed if still needed.
    let rests_on = |b: BlockId, v: u32, on: Location, u: Option<u32>| {
        let Some(a) = state.anchor(b) else { return false };
        let c = Cell::new(a.x + v as i32 - 1, a.level);
        let below = match state.occupant(c.below()) {
            Some((l, lu)) => Some((Location::Block(l), lu)),
            None => inst
                .surface_under(c)
                .map(|s| (Location::Surface(s), (c.x - inst.surface(s).lo + 1) as u32)),
        };
        matches!(below, Some((l, lu)) if l == on && u.is_none_or(|u| u == lu))
    };
    let local = goal.atoms.iter().all(|atom| match *atom {
        GoalAtom::ExactCell { block, cell } => state.anchor(block) == Some(cell),
        GoalAtom::PlacedOn { block, on } => (1..=inst.size(block)).any(|v| rests_on(block, v, on, None)),
        GoalAtom::PlacedOnAt { block, on, u, v } => rests_on(block, v, on, Some(u)),
        GoalAtom::Bridge { .. } | GoalAtom::Overhang { .. } => true,
    });
    if !local {
        return false;
    }
    let mut conn = None;
    goal.atoms.iter().all(|atom| match atom {
        GoalAtom::Bridge { left, right } => conn
            .get_or_insert_with(|| closure::connected_components(inst, state))
            .bridges(left, right),
        GoalAtom::Overhang { surface, edge, min_units } => {
            closure::overhang_extent(inst, state, *surface, *edge) >= *min_units
        }
        _ => true,
    })
}

/// Admissible lower bound on the steps still needed from a non-goal state:
/// a loaded gripper needs a placement; with every gripper empty, changing
/// anything takes a pick and a place, as does moving a block that sits on
/// the grid away from its required cell.
fn steps_needed(state: &WorldState, goal: &GoalSpec) -> u32 {
    let relocate = goal.atoms.iter().any(|a| match *a {
        GoalAtom::ExactCell { block, cell } => matches!(state.anchor(block), Some(c) if c != cell),
        _ => false,
    });
    if relocate || state.all_grippers_empty() {
        2
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    Nodes,
    Time,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchError {
    ResourceLimit(Limit),
    Invalid(ValidationError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::ResourceLimit(Limit::Nodes) => f.write_str("node limit reached"),
            SearchError::ResourceLimit(Limit::Time) => f.write_str("time limit reached"),
            SearchError::Invalid(e) => write!(f, "invalid instance: {e}"),
        }
    }
}

#[derive(Clone, Copy, Default)]
pub struct SearchLimits<'a> {
    pub max_nodes: Option<u64>,
    /// Polled once per expanded node; returning `true` aborts the search.
    pub should_stop: Option<&'a dyn Fn() -> bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub successors: u64,
    pub pruned_unstable: u64,
    pub pruned_other: u64,
    pub duplicates: u64,
    /// Nodes cut because the goal is out of reach within the horizon.
    pub pruned_bound: u64,
    pub horizons: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Plan(Plan),
    Unsat(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

struct Search<'i, 'l> {
    inst: &'i ProblemInstance,
    succ: Successor<'i>,
    limits: SearchLimits<'l>,
    stats: SearchStats,
    seen: BTreeMap<StateKey, u32>,
    path: Vec<JointAction>,
    found: Vec<Plan>,
    collect_all: bool,
}

impl<'i, 'l> Search<'i, 'l> {
    fn new(inst: &'i ProblemInstance, limits: SearchLimits<'l>, collect_all: bool) -> Self {
        Search {
            inst,
            succ: Successor::new(inst, true),
            limits,
            stats: SearchStats::default(),
            seen: BTreeMap::new(),
            path: Vec::new(),
            found: Vec::new(),
            collect_all,
        }
    }

    fn tick(&mut self) -> Result<(), SearchError> {
        self.stats.nodes_expanded += 1;
        if let Some(cap) = self.limits.max_nodes {
            if self.stats.nodes_expanded > cap {
                return Err(SearchError::ResourceLimit(Limit::Nodes));
            }
        }
        if let Some(stop) = self.limits.should_stop {
            if stop() {
                return Err(SearchError::ResourceLimit(Limit::Time));
            }
        }
        Ok(())
    }

    fn current_plan(&self) -> Plan {
        Plan { steps: self.path.iter().map(|j| j.0.clone()).collect() }
    }

    /// Depth-first search to `horizon`; returns `true` once a plan is found
    /// (first-plan mode only).
    fn dfs(&mut self, state: &WorldState, depth: u32, horizon: u32) -> Result<bool, SearchError> {
        if check_goal(self.inst, state, &self.inst.goal) {
            self.found.push(self.current_plan());
            if !self.collect_all {
                return Ok(true);
            }
        } else if depth + steps_needed(state, &self.inst.goal) > horizon {
            self.stats.pruned_bound += 1;
            return Ok(false);
        }
        if depth == horizon {
            return Ok(false);
        }
        if !self.collect_all {
            match self.seen.get(&state.key()) {
                Some(&d) if d <= depth => {
                    self.stats.duplicates += 1;
                    return Ok(false);
                }
                _ => {
                    self.seen.insert(state.key(), depth);
                }
            }
        }
        self.tick()?;
        let opts = options(self.inst, state, depth + 1 == horizon);
        for chosen in joint_candidates(&opts) {
            if chosen.is_empty() {
                continue;
            }
            let next = match self.succ.step(state, &chosen) {
                Ok(n) => n,
                Err(Rejected::Unstable(_)) => {
                    self.stats.pruned_unstable += 1;
                    continue;
                }
                Err(Rejected::Numerical) => {
                    self.stats.pruned_other += 1;
                    continue;
                }
                Err(_) => {
                    self.stats.pruned_other += 1;
                    continue;
                }
            };
            self.stats.successors += 1;
            self.path.push(JointAction(chosen.iter().map(|c| c.action.clone()).collect()));
            let done = self.dfs(&next, depth + 1, horizon)?;
            self.path.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Iterative deepening over horizons `0..=T`. Returns a plan of minimal
/// makespan, or `Unsat(T)` once horizon `T` is exhausted.
pub fn plan(inst: &ProblemInstance) -> Result<SearchResult, SearchError> {
    plan_with(inst, SearchLimits::default())
}

pub fn plan_with(inst: &ProblemInstance, limits: SearchLimits<'_>) -> Result<SearchResult, SearchError> {
    let start = inst.verify().map_err(SearchError::Invalid)?;
    let mut search = Search::new(inst, limits, false);
    for horizon in 0..=inst.makespan {
        search.stats.horizons = horizon;
        search.seen.clear();
        if search.dfs(&start, 0, horizon)? {
            let plan = search.found.pop().expect("a plan was recorded");
            return Ok(SearchResult { outcome: Outcome::Plan(plan), stats: search.stats });
        }
    }
    Ok(SearchResult { outcome: Outcome::Unsat(inst.makespan), stats: search.stats })
}

/// All valid plans of makespan at most `T` (steps are never empty), in
/// search order. Intended for tiny instances; bound the work with
/// `limits.max_nodes`.
pub fn enumerate_plans(
    inst: &ProblemInstance,
    limits: SearchLimits<'_>,
) -> Result<Vec<Plan>, SearchError> {
    let start = inst.verify().map_err(SearchError::Invalid)?;
    let mut search = Search::new(inst, limits, true);
    search.dfs(&start, 0, inst.makespan)?;
    Ok(search.found)
}
