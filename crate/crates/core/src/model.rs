//! Domain types: blocks, surfaces, instances, world states and plans.
//!
//! The canonical state is a global occupancy grid. Columns are integers shared
//! by every surface; a surface at level `L` carries blocks whose bottom row is
//! grid level `L`, and the cells below it (levels `0..L`) are solid. All
//! relational views (`on`, `above`, `supported`, ...) are derived from the grid
//! in [`crate::closure`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::stability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurfaceId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GripperId(pub u16);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SurfaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GripperId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Something a block can rest on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Surface(SurfaceId),
    Block(BlockId),
}

/// A grid cell. `level` is the row index of a block's body; a block at level
/// `h` rests on whatever occupies level `h - 1` (or on a surface of level `h`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i32,
    pub level: i32,
}

impl Cell {
    pub const fn new(x: i32, level: i32) -> Self {
        Cell { x, level }
    }

    pub const fn below(self) -> Cell {
        Cell { x: self.x, level: self.level - 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub id: String,
    /// Width in unit spaces.
    pub size: u32,
    pub weight: f64,
    /// Distance of the centre of mass from the block's left end, in units.
    pub centroid_offset: f64,
}

impl BlockSpec {
    /// A block with uniform weight distribution.
    pub fn new(id: impl Into<String>, size: u32, weight: f64) -> Self {
        BlockSpec { id: id.into(), size, weight, centroid_offset: size as f64 / 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub id: String,
    pub level: i32,
    pub lo: i32,
    pub hi: i32,
}

impl Surface {
    pub fn new(id: impl Into<String>, level: i32, lo: i32, hi: i32) -> Self {
        Surface { id: id.into(), level, lo, hi }
    }

    pub fn width(&self) -> u32 {
        (self.hi - self.lo + 1) as u32
    }

    pub fn contains(&self, x: i32) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    /// Coulomb friction coefficient at every contact.
    pub mu: f64,
    /// Horizontal disturbance per body, as a fraction of its weight.
    pub epsilon: f64,
    /// Feasibility tolerance of the equilibrium LP.
    pub slack: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams { mu: 0.5, epsilon: 0.05, slack: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GoalAtom {
    /// Some block connected to a left-group surface is connected to some
    /// block connected to a right-group surface.
    Bridge { left: Vec<SurfaceId>, right: Vec<SurfaceId> },
    /// At least `min_units` contiguous columns past the surface edge are
    /// covered by blocks connected to the surface.
    Overhang { surface: SurfaceId, edge: Edge, min_units: u32 },
    PlacedOn { block: BlockId, on: Location },
    /// Unit `v` of `block` rests on unit `u` of `on`.
    PlacedOnAt { block: BlockId, on: Location, u: u32, v: u32 },
    /// The left end (unit 1) of `block` is at `cell`.
    ExactCell { block: BlockId, cell: Cell },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoalSpec {
    pub atoms: Vec<GoalAtom>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingConstraint {
    /// Every placement's leftmost column must be at least the rightmost
    /// leftmost-column of all earlier placements, minus `slack`.
    LeftToRight { slack: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub block: BlockId,
    pub cell: Cell,
}

/// Offset of a held member's left end relative to the root's left end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Offset {
    pub dx: i32,
    pub dh: i32,
}

/// A rigid group of blocks carried by one gripper through its root.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeldAssembly {
    pub root: BlockId,
    /// Includes the root at offset (0, 0).
    pub members: BTreeMap<BlockId, Offset>,
}

impl HeldAssembly {
    pub fn single(root: BlockId) -> Self {
        let mut members = BTreeMap::new();
        members.insert(root, Offset { dx: 0, dh: 0 });
        HeldAssembly { root, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, b: BlockId) -> bool {
        self.members.contains_key(&b)
    }

    /// Relative cells of all members as `(cell, block, unit)`, with the root's
    /// left end at (0, 0).
    pub fn cells(&self, inst: &ProblemInstance) -> Vec<(Cell, BlockId, u32)> {
        let mut out = Vec::new();
        for (&b, off) in &self.members {
            for v in 1..=inst.size(b) {
                out.push((Cell::new(off.dx + v as i32 - 1, off.dh), b, v));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub surfaces: Vec<Surface>,
    pub blocks: Vec<BlockSpec>,
    pub grippers: Vec<String>,
    pub initial: Vec<Placement>,
    pub initial_held: Vec<(GripperId, HeldAssembly)>,
    pub goal: GoalSpec,
    pub makespan: u32,
    pub physics: PhysicsParams,
    pub ordering: Vec<OrderingConstraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationError {
    DuplicateId(String),
    BadBlock(String),
    BadSurface(String),
    SurfacesOverlap(String, String),
    BadPhysics(&'static str),
    UnknownIndex(&'static str),
    Overlap { block: String, cell: Cell },
    OutOfBounds { block: String, cell: Cell },
    Floating(String),
    Misplaced(String),
    BadHeld(String),
    Unstable(Option<String>),
    HeldUnstable(String),
    Numerical(&'static str),
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationError::*;
        match self {
            DuplicateId(id) => write!(f, "duplicate id {id:?}"),
            BadBlock(id) => write!(f, "invalid block {id:?}: size must be positive, weight positive, centroid within the block"),
            BadSurface(id) => write!(f, "invalid surface {id:?}: span must be ordered and level nonnegative"),
            SurfacesOverlap(a, b) => write!(f, "surfaces {a:?} and {b:?} have overlapping spans"),
            BadPhysics(what) => write!(f, "invalid physics parameter: {what}"),
            UnknownIndex(what) => write!(f, "reference to unknown {what}"),
            Overlap { block, cell } => {
                write!(f, "overlap: block {block:?} at column {} level {} collides with another block", cell.x, cell.level)
            }
            OutOfBounds { block, cell } => {
                write!(f, "out of bounds: block {block:?} at column {} level {}", cell.x, cell.level)
            }
            Floating(id) => write!(f, "floating: block {id:?} rests on nothing"),
            Misplaced(id) => write!(f, "block {id:?} must be placed exactly once (anchored or held)"),
            BadHeld(why) => write!(f, "invalid held assembly: {why}"),
            Unstable(Some(w)) => write!(f, "unstable initial state (block {w:?} cannot be balanced)"),
            Unstable(None) => write!(f, "unstable initial state"),
            HeldUnstable(g) => write!(f, "assembly held by {g:?} is unstable"),
            Numerical(why) => write!(f, "stability check failed: {why}"),
        }
    }
}

impl ProblemInstance {
    pub fn block(&self, b: BlockId) -> &BlockSpec {
        &self.blocks[b.index()]
    }

    pub fn size(&self, b: BlockId) -> u32 {
        self.blocks[b.index()].size
    }

    pub fn surface(&self, s: SurfaceId) -> &Surface {
        &self.surfaces[s.index()]
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.blocks.len()).map(|i| BlockId(i as u16))
    }

    pub fn surface_ids(&self) -> impl Iterator<Item = SurfaceId> + '_ {
        (0..self.surfaces.len()).map(|i| SurfaceId(i as u16))
    }

    pub fn gripper_ids(&self) -> impl Iterator<Item = GripperId> + '_ {
        (0..self.grippers.len()).map(|i| GripperId(i as u16))
    }

    /// Number of unit spaces on a location.
    pub fn location_size(&self, l: Location) -> u32 {
        match l {
            Location::Surface(s) => self.surface(s).width(),
            Location::Block(b) => self.size(b),
        }
    }

    pub fn location_name(&self, l: Location) -> &str {
        match l {
            Location::Surface(s) => &self.surface(s).id,
            Location::Block(b) => &self.block(b).id,
        }
    }

    pub fn find_block(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.id == name).map(|i| BlockId(i as u16))
    }

    pub fn find_surface(&self, name: &str) -> Option<SurfaceId> {
        self.surfaces.iter().position(|s| s.id == name).map(|i| SurfaceId(i as u16))
    }

    pub fn find_gripper(&self, name: &str) -> Option<GripperId> {
        self.grippers.iter().position(|g| g == name).map(|i| GripperId(i as u16))
    }

    pub fn find_location(&self, name: &str) -> Option<Location> {
        self.find_block(name)
            .map(Location::Block)
            .or_else(|| self.find_surface(name).map(Location::Surface))
    }

    /// The surface that directly carries a block body at `cell`, if any.
    pub fn surface_under(&self, cell: Cell) -> Option<SurfaceId> {
        self.surfaces
            .iter()
            .position(|s| s.level == cell.level && s.contains(cell.x))
            .map(|i| SurfaceId(i as u16))
    }

    /// Cells inside a raised surface's pedestal.
    pub fn is_solid(&self, cell: Cell) -> bool {
        cell.level < 0 || self.surfaces.iter().any(|s| s.contains(cell.x) && cell.level < s.level)
    }

    /// Inclusive global column range. Wide enough that any chain of blocks
    /// hanging off a surface stays inside.
    pub fn column_bounds(&self) -> (i32, i32) {
        let total: i32 = self.blocks.iter().map(|b| b.size as i32).sum();
        let lo = self.surfaces.iter().map(|s| s.lo).min().unwrap_or(0);
        let hi = self.surfaces.iter().map(|s| s.hi).max().unwrap_or(0);
        (lo - total, hi + total)
    }

    pub fn max_level(&self) -> i32 {
        let top = self.surfaces.iter().map(|s| s.level).max().unwrap_or(0);
        top + self.blocks.len() as i32
    }

    /// A block body may occupy this cell in an empty world.
    pub fn occupiable(&self, cell: Cell) -> bool {
        let (lo, hi) = self.column_bounds();
        cell.x >= lo && cell.x <= hi && cell.level <= self.max_level() && !self.is_solid(cell)
    }

    pub fn left_to_right_slack(&self) -> Option<i32> {
        self.ordering.iter().map(|o| match o {
            OrderingConstraint::LeftToRight { slack } => *slack,
        }).max()
    }

    /// Structural checks plus construction of the initial state (grid
    /// invariants). Stability is not checked here; see [`Self::verify`].
    pub fn validate(&self) -> Result<WorldState, ValidationError> {
        let mut seen: Vec<&str> = Vec::new();
        let names = self
            .blocks
            .iter()
            .map(|b| b.id.as_str())
            .chain(self.surfaces.iter().map(|s| s.id.as_str()));
        for name in names {
            if seen.contains(&name) {
                return Err(ValidationError::DuplicateId(name.into()));
            }
            seen.push(name);
        }
        for (i, g) in self.grippers.iter().enumerate() {
            if self.grippers[..i].contains(g) {
                return Err(ValidationError::DuplicateId(g.clone()));
            }
        }
        if self.blocks.len() > u16::MAX as usize || self.surfaces.len() > u16::MAX as usize {
            return Err(ValidationError::UnknownIndex("id space"));
        }
        for b in &self.blocks {
            let ok = b.size > 0
                && b.weight.is_finite()
                && b.weight > 0.0
                && b.centroid_offset >= 0.0
                && b.centroid_offset <= b.size as f64;
            if !ok {
                return Err(ValidationError::BadBlock(b.id.clone()));
            }
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.lo > s.hi || s.level < 0 {
                return Err(ValidationError::BadSurface(s.id.clone()));
            }
            for t in &self.surfaces[..i] {
                if s.lo <= t.hi && t.lo <= s.hi {
                    return Err(ValidationError::SurfacesOverlap(t.id.clone(), s.id.clone()));
                }
            }
        }
        let p = &self.physics;
        if !(p.mu >= 0.0 && p.mu.is_finite()) {
            return Err(ValidationError::BadPhysics("mu"));
        }
        if !(p.epsilon >= 0.0 && p.epsilon.is_finite()) {
            return Err(ValidationError::BadPhysics("epsilon"));
        }
        if !(p.slack > 0.0 && p.slack.is_finite()) {
            return Err(ValidationError::BadPhysics("slack"));
        }
        self.validate_goal()?;
        self.try_initial_state()
    }

    fn validate_goal(&self) -> Result<(), ValidationError> {
        let nb = self.blocks.len();
        let ns = self.surfaces.len();
        let loc_ok = |l: &Location| match l {
            Location::Block(b) => b.index() < nb,
            Location::Surface(s) => s.index() < ns,
        };
        for atom in &self.goal.atoms {
            let ok = match atom {
                GoalAtom::Bridge { left, right } => left
                    .iter()
                    .chain(right.iter())
                    .all(|s| s.index() < ns),
                GoalAtom::Overhang { surface, .. } => surface.index() < ns,
                GoalAtom::PlacedOn { block, on } => block.index() < nb && loc_ok(on),
                GoalAtom::PlacedOnAt { block, on, u, v } => {
                    block.index() < nb
                        && loc_ok(on)
                        && *v >= 1
                        && *v <= self.size(*block)
                        && *u >= 1
                        && *u <= self.location_size(*on)
                }
                GoalAtom::ExactCell { block, .. } => block.index() < nb,
            };
            if !ok {
                return Err(ValidationError::UnknownIndex("goal reference"));
            }
        }
        Ok(())
    }

    fn try_initial_state(&self) -> Result<WorldState, ValidationError> {
        let mut state = WorldState::new();
        let mut placed = alloc::vec![0u32; self.blocks.len()];
        for (g, asm) in &self.initial_held {
            if g.index() >= self.grippers.len() {
                return Err(ValidationError::UnknownIndex("gripper"));
            }
            if state.held(*g).is_some() {
                return Err(ValidationError::BadHeld("gripper holds two assemblies".into()));
            }
            for &b in asm.members.keys() {
                if b.index() >= self.blocks.len() {
                    return Err(ValidationError::UnknownIndex("block"));
                }
                placed[b.index()] += 1;
            }
            check_assembly(self, asm)?;
            state.held.insert(*g, asm.clone());
        }
        for p in &self.initial {
            if p.block.index() >= self.blocks.len() {
                return Err(ValidationError::UnknownIndex("block"));
            }
            placed[p.block.index()] += 1;
            if placed[p.block.index()] > 1 {
                return Err(ValidationError::Misplaced(self.block(p.block).id.clone()));
            }
            state.insert_block(self, p.block, p.cell)?;
        }
        if let Some(i) = placed.iter().position(|&n| n != 1) {
            return Err(ValidationError::Misplaced(self.blocks[i].id.clone()));
        }
        state.check_invariants(self)?;
        Ok(state)
    }

    /// The t = 0 state. The instance must have passed [`Self::validate`].
    pub fn initial_state(&self) -> WorldState {
        self.try_initial_state().expect("instance was validated")
    }

    /// Full validation: structure, grid invariants and stability of the
    /// initial grounded structure and of every initially held assembly.
    pub fn verify(&self) -> Result<WorldState, ValidationError> {
        let state = self.validate()?;
        let verdict = stability::check_state(self, &state)
            .map_err(|_| ValidationError::Numerical("LP did not converge"))?;
        if !verdict.stable {
            return Err(ValidationError::Unstable(
                verdict.witness.map(|b| self.block(b).id.clone()),
            ));
        }
        for (&g, asm) in state.held_assemblies() {
            if asm.len() < 2 {
                continue;
            }
            let v = stability::check_held_stability(self, &state, g)
                .map_err(|_| ValidationError::Numerical("LP did not converge"))?;
            if !v.stable {
                return Err(ValidationError::HeldUnstable(self.grippers[g.index()].clone()));
            }
        }
        Ok(state)
    }
}

fn check_assembly(inst: &ProblemInstance, asm: &HeldAssembly) -> Result<(), ValidationError> {
    match asm.members.get(&asm.root) {
        Some(o) if o.dx == 0 && o.dh == 0 => {}
        _ => return Err(ValidationError::BadHeld("root must sit at offset (0, 0)".into())),
    }
    let cells = asm.cells(inst);
    let mut occ: BTreeMap<Cell, BlockId> = BTreeMap::new();
    for &(c, b, _) in &cells {
        if c.level < 0 {
            return Err(ValidationError::BadHeld("member below the root".into()));
        }
        if occ.insert(c, b).is_some() {
            return Err(ValidationError::BadHeld("members overlap".into()));
        }
    }
    for (&b, off) in &asm.members {
        if b == asm.root {
            continue;
        }
        let rests = (0..inst.size(b) as i32)
            .any(|i| occ.contains_key(&Cell::new(off.dx + i, off.dh - 1)));
        if !rests {
            return Err(ValidationError::BadHeld(alloc::format!(
                "member {:?} rests on nothing inside the assembly",
                inst.block(b).id
            )));
        }
    }
    Ok(())
}

/// The world at one plan step: anchored blocks on the grid plus the
/// assemblies carried by grippers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldState {
    pub t: u32,
    grid: BTreeMap<Cell, (BlockId, u32)>,
    anchors: BTreeMap<BlockId, Cell>,
    held: BTreeMap<GripperId, HeldAssembly>,
    frontier: Option<i32>,
}

/// Canonical identity of a state, ignoring the step index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey {
    pub anchors: Vec<(BlockId, Cell)>,
    pub held: Vec<(GripperId, HeldAssembly)>,
    pub frontier: Option<i32>,
}

impl Default for WorldState {
    fn default() -> Self {
        Self::new()
    }
}

impl WorldState {
    pub fn new() -> Self {
        WorldState {
            t: 0,
            grid: BTreeMap::new(),
            anchors: BTreeMap::new(),
            held: BTreeMap::new(),
            frontier: None,
        }
    }

    pub fn occupant(&self, cell: Cell) -> Option<(BlockId, u32)> {
        self.grid.get(&cell).copied()
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.grid.contains_key(&cell)
    }

    /// Left end of an anchored block.
    pub fn anchor(&self, b: BlockId) -> Option<Cell> {
        self.anchors.get(&b).copied()
    }

    pub fn anchored(&self) -> impl Iterator<Item = (BlockId, Cell)> + '_ {
        self.anchors.iter().map(|(&b, &c)| (b, c))
    }

    pub fn anchored_count(&self) -> usize {
        self.anchors.len()
    }

    pub fn cells(&self) -> impl Iterator<Item = (Cell, BlockId, u32)> + '_ {
        self.grid.iter().map(|(&c, &(b, v))| (c, b, v))
    }

    pub fn held(&self, g: GripperId) -> Option<&HeldAssembly> {
        self.held.get(&g)
    }

    pub fn held_assemblies(&self) -> impl Iterator<Item = (&GripperId, &HeldAssembly)> + '_ {
        self.held.iter()
    }

    pub fn holder_of(&self, b: BlockId) -> Option<GripperId> {
        self.held.iter().find(|(_, a)| a.contains(b)).map(|(&g, _)| g)
    }

    pub fn all_grippers_empty(&self) -> bool {
        self.held.is_empty()
    }

    /// Rightmost left column among placements made so far; tracked only for
    /// instances with a left-to-right ordering constraint.
    pub fn frontier(&self) -> Option<i32> {
        self.frontier
    }

    pub fn set_frontier(&mut self, f: Option<i32>) {
        self.frontier = f;
    }

    pub fn key(&self) -> StateKey {
        StateKey {
            anchors: self.anchors.iter().map(|(&b, &c)| (b, c)).collect(),
            held: self.held.iter().map(|(&g, a)| (g, a.clone())).collect(),
            frontier: self.frontier,
        }
    }

    /// Anchors `b` with its left end at `cell`. Does not check support.
    pub fn insert_block(
        &mut self,
        inst: &ProblemInstance,
        b: BlockId,
        cell: Cell,
    ) -> Result<(), ValidationError> {
        let size = inst.size(b);
        for v in 0..size {
            let c = Cell::new(cell.x + v as i32, cell.level);
            if !inst.occupiable(c) {
                return Err(ValidationError::OutOfBounds { block: inst.block(b).id.clone(), cell: c });
            }
            if self.grid.contains_key(&c) {
                return Err(ValidationError::Overlap { block: inst.block(b).id.clone(), cell: c });
            }
        }
        if self.anchors.contains_key(&b) || self.holder_of(b).is_some() {
            return Err(ValidationError::Misplaced(inst.block(b).id.clone()));
        }
        for v in 0..size {
            self.grid.insert(Cell::new(cell.x + v as i32, cell.level), (b, v + 1));
        }
        self.anchors.insert(b, cell);
        Ok(())
    }

    pub fn remove_block(&mut self, inst: &ProblemInstance, b: BlockId) -> Option<Cell> {
        let cell = self.anchors.remove(&b)?;
        for v in 0..inst.size(b) {
            self.grid.remove(&Cell::new(cell.x + v as i32, cell.level));
        }
        Some(cell)
    }

    pub fn set_held(&mut self, g: GripperId, asm: HeldAssembly) {
        self.held.insert(g, asm);
    }

    pub fn take_held(&mut self, g: GripperId) -> Option<HeldAssembly> {
        self.held.remove(&g)
    }

    /// Whether an anchored block has a block or surface directly under at
    /// least one of its cells.
    pub fn has_support(&self, inst: &ProblemInstance, b: BlockId) -> bool {
        let Some(cell) = self.anchor(b) else { return false };
        (0..inst.size(b) as i32).any(|i| {
            let c = Cell::new(cell.x + i, cell.level);
            inst.surface_under(c).is_some() || self.grid.contains_key(&c.below())
        })
    }

    /// Grid invariants: consistent cells, disjoint occupancy, every anchored
    /// block supported, no block both anchored and held.
    pub fn check_invariants(&self, inst: &ProblemInstance) -> Result<(), ValidationError> {
        let mut expected = 0usize;
        for (&b, &cell) in &self.anchors {
            for v in 1..=inst.size(b) {
                let c = Cell::new(cell.x + v as i32 - 1, cell.level);
                if self.grid.get(&c) != Some(&(b, v)) {
                    return Err(ValidationError::Overlap { block: inst.block(b).id.clone(), cell: c });
                }
                if !inst.occupiable(c) {
                    return Err(ValidationError::OutOfBounds { block: inst.block(b).id.clone(), cell: c });
                }
            }
            expected += inst.size(b) as usize;
            if !self.has_support(inst, b) {
                return Err(ValidationError::Floating(inst.block(b).id.clone()));
            }
        }
        if expected != self.grid.len() {
            return Err(ValidationError::BadHeld("stray grid cells".into()));
        }
        let mut held_seen: Vec<BlockId> = Vec::new();
        for asm in self.held.values() {
            for &b in asm.members.keys() {
                if self.anchors.contains_key(&b) || held_seen.contains(&b) {
                    return Err(ValidationError::Misplaced(inst.block(b).id.clone()));
                }
                held_seen.push(b);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Pick { gripper: GripperId, block: BlockId },
    /// Place the held assembly so that unit `v` of its root rests on unit
    /// `u` of `target`.
    PlaceOn { gripper: GripperId, target: Location, u: u32, v: u32 },
}

impl Action {
    pub fn gripper(&self) -> GripperId {
        match self {
            Action::Pick { gripper, .. } | Action::PlaceOn { gripper, .. } => *gripper,
        }
    }

    pub fn is_place(&self) -> bool {
        matches!(self, Action::PlaceOn { .. })
    }
}

/// A sequence of steps; each step is a set of simultaneous actions, at most
/// one per gripper.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Plan {
    pub steps: Vec<Vec<Action>>,
}

impl Plan {
    pub fn makespan(&self) -> usize {
        self.steps.len()
    }
}
