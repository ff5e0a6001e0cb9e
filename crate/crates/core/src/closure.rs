//! Derived relations over a world state.
//!
//! The grid-based functions here ([`derive_on`], [`compute_above`],
//! [`supported_closure`], [`connected_components`]) are what the planner
//! uses. [`fixpoint_oracle`] recomputes `on`, `above` and `supported` by
//! iterating the relational rules from one anchor `on` atom per block and is
//! kept separate so that the two can be compared.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{BlockId, Cell, Edge, GripperId, Location, ProblemInstance, SurfaceId, WorldState};

/// Unit `v` of `block` rests on unit `u` of `on`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct On {
    pub block: BlockId,
    pub on: Location,
    pub u: u32,
    pub v: u32,
}

/// Unit `v` of `block` sits in column `x` at height `h`, where `h` is the
/// grid level plus one (a block on a level-0 table has `h = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Above {
    pub h: i32,
    pub block: BlockId,
    pub v: u32,
    pub x: i32,
}

/// `(b, l)`: block `b` rests on, or is transitively supported by, `l`.
pub type SupportPair = (BlockId, Location);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircularityError(pub BlockId);

impl fmt::Display for CircularityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {} is supported by itself", self.0 .0)
    }
}

/// `on` atoms from vertical grid adjacency, plus the internal `on` atoms of
/// every held assembly.
pub fn derive_on(inst: &ProblemInstance, state: &WorldState) -> BTreeSet<On> {
    let mut out = BTreeSet::new();
    for (cell, b, v) in state.cells() {
        if let Some((l, u)) = state.occupant(cell.below()) {
            out.insert(On { block: b, on: Location::Block(l), u, v });
        } else if let Some(s) = inst.surface_under(cell) {
            let u = (cell.x - inst.surface(s).lo + 1) as u32;
            out.insert(On { block: b, on: Location::Surface(s), u, v });
        }
    }
    for (_, asm) in state.held_assemblies() {
        let cells = asm.cells(inst);
        let occ: BTreeMap<Cell, (BlockId, u32)> =
            cells.iter().map(|&(c, b, v)| (c, (b, v))).collect();
        for &(c, b, v) in &cells {
            if let Some(&(l, u)) = occ.get(&c.below()) {
                out.insert(On { block: b, on: Location::Block(l), u, v });
            }
        }
    }
    out
}

/// Global positions of anchored block units. Held blocks have none.
pub fn compute_above(_inst: &ProblemInstance, state: &WorldState) -> BTreeSet<Above> {
    state
        .cells()
        .map(|(c, b, v)| Above { h: c.level + 1, block: b, v, x: c.x })
        .collect()
}

/// Projection of `on` onto `(block, location)`.
pub fn on_aux(on: &BTreeSet<On>) -> BTreeSet<SupportPair> {
    on.iter().map(|a| (a.block, a.on)).collect()
}

/// Least fixpoint of
///
/// ```text
/// supported(b, l) <- onAux(b, l)
/// supported(b, l) <- onAux(b, l'), supported(l', l), b != l'
/// ```
///
/// failing if some block ends up supporting itself.
pub fn supported_closure(
    on_aux: &BTreeSet<SupportPair>,
) -> Result<BTreeSet<SupportPair>, CircularityError> {
    let mut supported = on_aux.clone();
    loop {
        let mut by_block: BTreeMap<BlockId, Vec<Location>> = BTreeMap::new();
        for &(b, l) in &supported {
            by_block.entry(b).or_default().push(l);
        }
        let mut fresh = Vec::new();
        for &(b, mid) in on_aux {
            let Location::Block(m) = mid else { continue };
            if m == b {
                continue;
            }
            if let Some(ls) = by_block.get(&m) {
                for &l in ls {
                    if !supported.contains(&(b, l)) {
                        fresh.push((b, l));
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        supported.extend(fresh);
    }
    if let Some(&(b, _)) = supported.iter().find(|(b, l)| *l == Location::Block(*b)) {
        return Err(CircularityError(b));
    }
    Ok(supported)
}

/// Which bridge sides a block is connected to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sides {
    pub left: bool,
    pub right: bool,
}

/// Connected components of the support graph over surfaces and anchored
/// blocks. Two nodes are connected when one rests on the other, closed under
/// symmetry and transitivity. Side contact does not connect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connectivity {
    component: BTreeMap<Location, usize>,
    nontrivial: BTreeSet<usize>,
}

impl Connectivity {
    pub fn component(&self, n: Location) -> Option<usize> {
        self.component.get(&n).copied()
    }

    /// `connected(x, y)`. A node is connected to itself only if it touches
    /// something.
    pub fn connected(&self, a: Location, b: Location) -> bool {
        match (self.component(a), self.component(b)) {
            (Some(x), Some(y)) => x == y && (a != b || self.nontrivial.contains(&x)),
            _ => false,
        }
    }

    pub fn pairs(&self) -> BTreeSet<(Location, Location)> {
        let mut out = BTreeSet::new();
        for &a in self.component.keys() {
            for &b in self.component.keys() {
                if self.connected(a, b) {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    pub fn side(&self, n: Location, left: &[SurfaceId], right: &[SurfaceId]) -> Sides {
        let hits = |group: &[SurfaceId]| {
            group.iter().any(|&s| self.connected(n, Location::Surface(s)))
        };
        Sides { left: hits(left), right: hits(right) }
    }

    /// Some block `x` on the left side is connected to some block `y` on the
    /// right side.
    pub fn bridges(&self, left: &[SurfaceId], right: &[SurfaceId]) -> bool {
        let blocks: Vec<Location> = self
            .component
            .keys()
            .copied()
            .filter(|n| matches!(n, Location::Block(_)))
            .collect();
        blocks.iter().any(|&x| {
            self.side(x, left, right).left
                && blocks
                    .iter()
                    .any(|&y| self.connected(x, y) && self.side(y, left, right).right)
        })
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub fn connected_components(inst: &ProblemInstance, state: &WorldState) -> Connectivity {
    let mut nodes: Vec<Location> = inst.surface_ids().map(Location::Surface).collect();
    nodes.extend(state.anchored().map(|(b, _)| Location::Block(b)));
    let index: BTreeMap<Location, usize> =
        nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    let mut touched = alloc::vec![false; nodes.len()];
    for (cell, b, _) in state.cells() {
        let below = if let Some((l, _)) = state.occupant(cell.below()) {
            Location::Block(l)
        } else if let Some(s) = inst.surface_under(cell) {
            Location::Surface(s)
        } else {
            continue;
        };
        let i = index[&Location::Block(b)];
        let j = index[&below];
        touched[i] = true;
        touched[j] = true;
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut component = BTreeMap::new();
    let mut nontrivial = BTreeSet::new();
    for (i, &n) in nodes.iter().enumerate() {
        let r = find(&mut parent, i);
        component.insert(n, r);
        if touched[i] {
            nontrivial.insert(r);
        }
    }
    Connectivity { component, nontrivial }
}

/// Number of contiguous columns past the given edge of `surface` covered by
/// blocks connected to it.
pub fn overhang_extent(
    inst: &ProblemInstance,
    state: &WorldState,
    surface: SurfaceId,
    edge: Edge,
) -> u32 {
    let conn = connected_components(inst, state);
    let s = inst.surface(surface);
    let covered: BTreeSet<i32> = state
        .cells()
        .filter(|(_, b, _)| conn.connected(Location::Block(*b), Location::Surface(surface)))
        .map(|(c, _, _)| c.x)
        .collect();
    let (start, step) = match edge {
        Edge::Right => (s.hi + 1, 1),
        Edge::Left => (s.lo - 1, -1),
    };
    let mut n = 0;
    while covered.contains(&(start + step * n as i32)) {
        n += 1;
    }
    n
}

/// All relations the planner needs for one state.
#[derive(Clone, Debug)]
pub struct DerivedRelations {
    pub on: BTreeSet<On>,
    pub on_aux: BTreeSet<SupportPair>,
    pub above: BTreeSet<Above>,
    pub supported: BTreeSet<SupportPair>,
    pub connectivity: Connectivity,
}

impl DerivedRelations {
    pub fn compute(inst: &ProblemInstance, state: &WorldState) -> Result<Self, CircularityError> {
        let on = derive_on(inst, state);
        let on_aux = on_aux(&on);
        let supported = supported_closure(&on_aux)?;
        Ok(DerivedRelations {
            above: compute_above(inst, state),
            connectivity: connected_components(inst, state),
            on,
            on_aux,
            supported,
        })
    }

    /// Anchored-only support pairs (held assemblies excluded).
    pub fn anchored_on_aux<'a>(
        &'a self,
        state: &'a WorldState,
    ) -> impl Iterator<Item = SupportPair> + 'a {
        self.on_aux
            .iter()
            .copied()
            .filter(move |(b, _)| state.anchor(*b).is_some())
    }
}

// ---------------------------------------------------------------------------
// Literal-rule fixpoint evaluation
// ---------------------------------------------------------------------------

/// One chosen `on` atom per placed block, from which every other relation is
/// derived by rule iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Seeds {
    pub anchored: Vec<On>,
    /// Per gripper: the assembly root and one anchor atom per other member.
    pub held: Vec<(GripperId, BlockId, Vec<On>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRelations {
    pub on: BTreeSet<On>,
    pub above: BTreeSet<Above>,
    /// Positions inside each held assembly, relative to the root's unit 1
    /// at `h = 1, x = 0`.
    pub held_above: BTreeMap<GripperId, BTreeSet<Above>>,
    pub supported: BTreeSet<SupportPair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleError {
    NonTermination,
    Circular(BlockId),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NonTermination => f.write_str("rule iteration did not reach a fixpoint"),
            OracleError::Circular(b) => write!(f, "block {} is supported by itself", b.0),
        }
    }
}

/// The leftmost supported unit of every placed block, as an `on` atom. Held
/// roots get no anchor.
pub fn anchor_seeds(inst: &ProblemInstance, state: &WorldState) -> Seeds {
    let mut anchored = Vec::new();
    for (b, cell) in state.anchored() {
        for v in 1..=inst.size(b) {
            let c = Cell::new(cell.x + v as i32 - 1, cell.level);
            if let Some((l, u)) = state.occupant(c.below()) {
                anchored.push(On { block: b, on: Location::Block(l), u, v });
                break;
            }
            if let Some(s) = inst.surface_under(c) {
                let u = (c.x - inst.surface(s).lo + 1) as u32;
                anchored.push(On { block: b, on: Location::Surface(s), u, v });
                break;
            }
        }
    }
    let mut held = Vec::new();
    for (&g, asm) in state.held_assemblies() {
        let cells = asm.cells(inst);
        let occ: BTreeMap<Cell, (BlockId, u32)> =
            cells.iter().map(|&(c, b, v)| (c, (b, v))).collect();
        let mut seeds = Vec::new();
        for (&b, off) in &asm.members {
            if b == asm.root {
                continue;
            }
            for v in 1..=inst.size(b) {
                let c = Cell::new(off.dx + v as i32 - 1, off.dh - 1);
                if let Some(&(l, u)) = occ.get(&c) {
                    seeds.push(On { block: b, on: Location::Block(l), u, v });
                    break;
                }
            }
        }
        held.push((g, asm.root, seeds));
    }
    Seeds { anchored, held }
}

pub fn fixpoint_oracle(
    inst: &ProblemInstance,
    state: &WorldState,
) -> Result<OracleRelations, OracleError> {
    fixpoint_from_seeds(inst, &anchor_seeds(inst, state))
}

fn iteration_cap(inst: &ProblemInstance) -> usize {
    let (lo, hi) = inst.column_bounds();
    let columns = (hi - lo + 1) as usize;
    let nb = inst.blocks.len().max(1);
    nb * nb * columns + 1
}

/// Applies the ramification and position rules until nothing new is derived.
///
/// Anchored world:
///
/// ```text
/// on(b,l,u+i,v+i)    <- on(b,l,u,v)                 1 <= i <= min(size(b)-v, size(l)-u)
/// on(b,l,u-j,v-j)    <- on(b,l,u,v)                 1 <= j <= min(v-1, u-1)
/// above(L+1,b,v,x)   <- on(b,s,u,v)                 surface s at level L, x = lo(s)+u-1
/// above(h,b,v,x)     <- above(h-1,b',u,x), on(b,b',u,v)
/// above(h,b,v+1,x+1) <- above(h,b,v,x)              v < size(b)
/// above(h,b,v-1,x-1) <- above(h,b,v,x)              v > 1
/// on(b,b',u,v)       <- above(h,b,v,x), above(h-1,b',u,x)
/// on(b,s,u,v)        <- above(L+1,b,v,x)            x on surface s at level L
/// ```
///
/// Each held assembly is evaluated the same way in its own frame, seeded with
/// `above(1, root, 1, 0)` and no surfaces.
pub fn fixpoint_from_seeds(
    inst: &ProblemInstance,
    seeds: &Seeds,
) -> Result<OracleRelations, OracleError> {
    let cap = iteration_cap(inst);
    let (mut on, above) = iterate_world(inst, seeds.anchored.iter().copied(), None, true, cap)?;
    let mut held_above = BTreeMap::new();
    for (g, root, members) in &seeds.held {
        let root_seed = Above { h: 1, block: *root, v: 1, x: 0 };
        let (h_on, h_above) =
            iterate_world(inst, members.iter().copied(), Some(root_seed), false, cap)?;
        on.extend(h_on);
        held_above.insert(*g, h_above);
    }
    let supported = supported_by_rules(&on, cap)?;
    Ok(OracleRelations { on, above, held_above, supported })
}

fn iterate_world(
    inst: &ProblemInstance,
    seeds: impl Iterator<Item = On>,
    root: Option<Above>,
    with_surfaces: bool,
    cap: usize,
) -> Result<(BTreeSet<On>, BTreeSet<Above>), OracleError> {
    let mut on: BTreeSet<On> = seeds.collect();
    let mut above: BTreeSet<Above> = root.into_iter().collect();
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > cap {
            return Err(OracleError::NonTermination);
        }
        let mut new_on: Vec<On> = Vec::new();
        let mut new_above: Vec<Above> = Vec::new();

        for a in &on {
            let sb = inst.size(a.block);
            let sl = inst.location_size(a.on);
            for i in 1..=(sb - a.v).min(sl.saturating_sub(a.u)) {
                new_on.push(On { u: a.u + i, v: a.v + i, ..*a });
            }
            for j in 1..=(a.v - 1).min(a.u.saturating_sub(1)) {
                new_on.push(On { u: a.u - j, v: a.v - j, ..*a });
            }
            if let Location::Surface(s) = a.on {
                if with_surfaces {
                    let surf = inst.surface(s);
                    new_above.push(Above {
                        h: surf.level + 1,
                        block: a.block,
                        v: a.v,
                        x: surf.lo + a.u as i32 - 1,
                    });
                }
            }
        }

        for a in &above {
            for o in on.iter().filter(|o| o.on == Location::Block(a.block) && o.u == a.v) {
                new_above.push(Above { h: a.h + 1, block: o.block, v: o.v, x: a.x });
            }
            if a.v < inst.size(a.block) {
                new_above.push(Above { v: a.v + 1, x: a.x + 1, ..*a });
            }
            if a.v > 1 {
                new_above.push(Above { v: a.v - 1, x: a.x - 1, ..*a });
            }
            for b in above.iter().filter(|b| b.h == a.h - 1 && b.x == a.x) {
                new_on.push(On { block: a.block, on: Location::Block(b.block), u: b.v, v: a.v });
            }
            if with_surfaces {
                for (i, s) in inst.surfaces.iter().enumerate() {
                    if s.level + 1 == a.h && s.contains(a.x) {
                        new_on.push(On {
                            block: a.block,
                            on: Location::Surface(SurfaceId(i as u16)),
                            u: (a.x - s.lo + 1) as u32,
                            v: a.v,
                        });
                    }
                }
            }
        }

        let before = (on.len(), above.len());
        on.extend(new_on);
        above.extend(new_above);
        if (on.len(), above.len()) == before {
            break;
        }
    }
    Ok((on, above))
}

fn supported_by_rules(on: &BTreeSet<On>, cap: usize) -> Result<BTreeSet<SupportPair>, OracleError> {
    let aux: BTreeSet<SupportPair> = on.iter().map(|a| (a.block, a.on)).collect();
    let mut supported = aux.clone();
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > cap.max(aux.len() + 2) {
            return Err(OracleError::NonTermination);
        }
        let mut fresh = Vec::new();
        for &(b, mid) in &aux {
            for &(m, l) in &supported {
                if Location::Block(m) == mid && m != b && !supported.contains(&(b, l)) {
                    fresh.push((b, l));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        supported.extend(fresh);
    }
    for &(b, l) in &supported {
        if l == Location::Block(b) {
            return Err(OracleError::Circular(b));
        }
    }
    Ok(supported)
}
