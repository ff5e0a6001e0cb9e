//! Static-equilibrium stability check.
//!
//! A structure is stable when, for each disturbance scenario, there exist
//! contact forces satisfying Coulomb friction such that every free body is in
//! force and torque balance. Each maximal contact interval carries two force
//! points at its ends; a point force is written as `alpha (mu, 1) + beta (-mu, 1)`
//! with `alpha, beta >= 0`, which is exactly the 2D friction cone. Feasibility
//! is decided by a Phase-I simplex.
//!
//! Scenarios: every free body pushed horizontally by `epsilon * weight` to the
//! right, then to the left. The undisturbed case is the midpoint of those two
//! right-hand sides, so it is feasible whenever both are; with `epsilon == 0`
//! only the undisturbed case is solved.

mod lp;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::model::{BlockId, Cell, GripperId, ProblemInstance, SurfaceId, WorldState};

#[derive(Clone, Debug, PartialEq)]
pub struct Body {
    pub block: BlockId,
    pub weight: f64,
    /// Centre of mass `(x, y)`; a block at grid level `h` spans `y` in `[h, h + 1]`.
    pub centroid: (f64, f64),
    /// Fixed bodies (a grasped root) absorb any reaction and need no balance.
    pub fixed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    Ground(SurfaceId),
    Body(usize),
}

/// Contact along the horizontal line `y` between `x_a` and `x_b`, with
/// `upper` resting on `lower`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contact {
    pub lower: Support,
    pub upper: usize,
    pub x_a: f64,
    pub x_b: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactProblem {
    pub bodies: Vec<Body>,
    pub contacts: Vec<Contact>,
    pub mu: f64,
    /// Disturbance magnitude as a fraction of each body's weight.
    pub epsilon: f64,
    pub slack: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// On instability, the body whose balance rows carry the largest residual.
    pub witness: Option<BlockId>,
}

impl StabilityVerdict {
    pub const STABLE: StabilityVerdict = StabilityVerdict { stable: true, witness: None };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityError {
    /// The simplex did not terminate within its iteration budget.
    Numerical,
    /// The tower oracle was given something other than a serial stack.
    NotApplicable,
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::Numerical => f.write_str("equilibrium LP did not converge"),
            StabilityError::NotApplicable => f.write_str("problem is not a serial tower"),
        }
    }
}

/// Horizontal push applied to every free body.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Still,
    PushRight,
    PushLeft,
}

impl Scenario {
    fn direction(self) -> f64 {
        match self {
            Scenario::Still => 0.0,
            Scenario::PushRight => 1.0,
            Scenario::PushLeft => -1.0,
        }
    }
}

impl ContactProblem {
    pub fn scenarios(&self) -> &'static [Scenario] {
        if self.epsilon > 0.0 {
            &[Scenario::PushRight, Scenario::PushLeft]
        } else {
            &[Scenario::Still]
        }
    }

    fn free_bodies(&self) -> Vec<usize> {
        (0..self.bodies.len()).filter(|&i| !self.bodies[i].fixed).collect()
    }

    /// Equality system `A z = b` for one scenario; rows are `(Fx, Fy, torque)`
    /// per free body in body order, columns four per contact.
    fn system(&self, scenario: Scenario) -> (Vec<Vec<f64>>, Vec<f64>, Vec<usize>) {
        let free = self.free_bodies();
        let mut row_of = vec![usize::MAX; self.bodies.len()];
        for (k, &i) in free.iter().enumerate() {
            row_of[i] = 3 * k;
        }
        let scale = free
            .iter()
            .map(|&i| self.bodies[i].weight)
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let m = 3 * free.len();
        let n = 4 * self.contacts.len();
        let mut a = vec![vec![0.0; n]; m];
        let mut b = vec![0.0; m];
        for (k, &i) in free.iter().enumerate() {
            let w = self.bodies[i].weight / scale;
            b[3 * k] = -scenario.direction() * self.epsilon * w;
            b[3 * k + 1] = w;
        }
        for (c, contact) in self.contacts.iter().enumerate() {
            for (p, px) in [contact.x_a, contact.x_b].into_iter().enumerate() {
                for (s, fx) in [self.mu, -self.mu].into_iter().enumerate() {
                    let col = 4 * c + 2 * p + s;
                    let mut add = |body: usize, sign: f64| {
                        let r = row_of[body];
                        if r == usize::MAX {
                            return;
                        }
                        let (cx, cy) = self.bodies[body].centroid;
                        a[r][col] += sign * fx;
                        a[r + 1][col] += sign;
                        a[r + 2][col] += sign * ((px - cx) - (contact.y - cy) * fx);
                    };
                    add(contact.upper, 1.0);
                    if let Support::Body(l) = contact.lower {
                        add(l, -1.0);
                    }
                }
            }
        }
        (a, b, free)
    }
}

/// Decides stability of a contact problem.
pub fn check_static_equilibrium(
    problem: &ContactProblem,
) -> Result<StabilityVerdict, StabilityError> {
    let free = problem.free_bodies();
    if free.is_empty() {
        return Ok(StabilityVerdict::STABLE);
    }
    for &scenario in problem.scenarios() {
        let (a, b, free) = problem.system(scenario);
        let res = lp::phase_one(&a, &b).map_err(|_| StabilityError::Numerical)?;
        let budget = problem.slack * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>());
        if res.objective > budget {
            let worst = (0..free.len())
                .max_by(|&p, &q| {
                    let rp: f64 = res.residuals[3 * p..3 * p + 3].iter().sum();
                    let rq: f64 = res.residuals[3 * q..3 * q + 3].iter().sum();
                    rp.partial_cmp(&rq).unwrap_or(core::cmp::Ordering::Equal).then(q.cmp(&p))
                })
                .map(|k| problem.bodies[free[k]].block);
            return Ok(StabilityVerdict { stable: false, witness: worst });
        }
    }
    Ok(StabilityVerdict::STABLE)
}

/// Human-readable dump of the equilibrium system for each scenario.
pub fn describe_lp(problem: &ContactProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "bodies: {}  contacts: {}  mu = {}  epsilon = {}",
        problem.bodies.len(),
        problem.contacts.len(),
        problem.mu,
        problem.epsilon
    );
    for (i, c) in problem.contacts.iter().enumerate() {
        let lower = match c.lower {
            Support::Ground(s) => alloc::format!("ground#{}", s.0),
            Support::Body(l) => alloc::format!("body#{}", problem.bodies[l].block.0),
        };
        let _ = writeln!(
            out,
            "c{i}: body#{} on {lower} over [{}, {}] at y = {}  (vars a{i}L b{i}L a{i}R b{i}R)",
            problem.bodies[c.upper].block.0,
            c.x_a,
            c.x_b,
            c.y
        );
    }
    for &scenario in problem.scenarios() {
        let (a, b, free) = problem.system(scenario);
        let _ = writeln!(out, "scenario {scenario:?}:");
        for (r, row) in a.iter().enumerate() {
            let what = ["Fx", "Fy", "Tz"][r % 3];
            let _ = write!(out, "  body#{:<3} {what} |", problem.bodies[free[r / 3]].block.0);
            for v in row {
                let _ = write!(out, " {v:>8.4}");
            }
            let _ = writeln!(out, " | = {:>8.4}", b[r]);
        }
    }
    out
}

fn body_for(inst: &ProblemInstance, b: BlockId, left: Cell, fixed: bool) -> Body {
    let spec = inst.block(b);
    Body {
        block: b,
        weight: spec.weight,
        centroid: (left.x as f64 + spec.centroid_offset, left.level as f64 + 0.5),
        fixed,
    }
}

/// Groups per-unit supports of one block into maximal contiguous contacts.
fn push_contacts(
    contacts: &mut Vec<Contact>,
    upper: usize,
    level: i32,
    units: impl Iterator<Item = (i32, Option<Support>)>,
) {
    let mut run: Option<(Support, i32, i32)> = None;
    for (x, sup) in units {
        match (run, sup) {
            (Some((s, a, b)), Some(t)) if s == t && b + 1 == x => run = Some((s, a, x)),
            _ => {
                if let Some((s, a, b)) = run.take() {
                    contacts.push(Contact { lower: s, upper, x_a: a as f64, x_b: (b + 1) as f64, y: level as f64 });
                }
                run = sup.map(|s| (s, x, x));
            }
        }
    }
    if let Some((s, a, b)) = run {
        contacts.push(Contact { lower: s, upper, x_a: a as f64, x_b: (b + 1) as f64, y: level as f64 });
    }
}

/// Contact problem of the grounded structure: one body per anchored block,
/// surfaces as fixed ground.
pub fn extract_contacts(inst: &ProblemInstance, state: &WorldState) -> ContactProblem {
    let index: BTreeMap<BlockId, usize> =
        state.anchored().enumerate().map(|(i, (b, _))| (b, i)).collect();
    let bodies: Vec<Body> = state.anchored().map(|(b, c)| body_for(inst, b, c, false)).collect();
    let mut contacts = Vec::new();
    for (i, (b, left)) in state.anchored().enumerate() {
        let units = (0..inst.size(b) as i32).map(|k| {
            let c = Cell::new(left.x + k, left.level);
            let sup = match state.occupant(c.below()) {
                Some((l, _)) => Some(Support::Body(index[&l])),
                None => inst.surface_under(c).map(Support::Ground),
            };
            (c.x, sup)
        });
        push_contacts(&mut contacts, i, left.level, units);
    }
    ContactProblem {
        bodies,
        contacts,
        mu: inst.physics.mu,
        epsilon: inst.physics.epsilon,
        slack: inst.physics.slack,
    }
}

/// Contact problem of the assembly held by `gripper`, in the assembly frame,
/// with the root fixed.
pub fn extract_held_contacts(
    inst: &ProblemInstance,
    state: &WorldState,
    gripper: GripperId,
) -> Option<ContactProblem> {
    let asm = state.held(gripper)?;
    let index: BTreeMap<BlockId, usize> =
        asm.members.keys().enumerate().map(|(i, &b)| (b, i)).collect();
    let occ: BTreeMap<Cell, BlockId> = asm.cells(inst).into_iter().map(|(c, b, _)| (c, b)).collect();
    let mut bodies = Vec::new();
    let mut contacts = Vec::new();
    for (i, (&b, off)) in asm.members.iter().enumerate() {
        let left = Cell::new(off.dx, off.dh);
        bodies.push(body_for(inst, b, left, b == asm.root));
        let units = (0..inst.size(b) as i32).map(|k| {
            let c = Cell::new(left.x + k, left.level);
            (c.x, occ.get(&c.below()).map(|l| Support::Body(index[l])))
        });
        push_contacts(&mut contacts, i, left.level, units);
    }
    Some(ContactProblem {
        bodies,
        contacts,
        mu: inst.physics.mu,
        epsilon: inst.physics.epsilon,
        slack: inst.physics.slack,
    })
}

/// Stability of the grounded structure of a state.
pub fn check_state(
    inst: &ProblemInstance,
    state: &WorldState,
) -> Result<StabilityVerdict, StabilityError> {
    check_static_equilibrium(&extract_contacts(inst, state))
}

/// Stability of the assembly held by `gripper`. Single blocks and empty
/// grippers are vacuously stable.
pub fn check_held_stability(
    inst: &ProblemInstance,
    state: &WorldState,
    gripper: GripperId,
) -> Result<StabilityVerdict, StabilityError> {
    match extract_held_contacts(inst, state, gripper) {
        Some(p) if p.bodies.len() >= 2 => check_static_equilibrium(&p),
        _ => Ok(StabilityVerdict::STABLE),
    }
}

/// Serial order of a tower, bottom first, or `None` if the problem is not a
/// single stack of free bodies standing on the ground.
fn tower_order(problem: &ContactProblem) -> Option<Vec<usize>> {
    let n = problem.bodies.len();
    if problem.bodies.iter().any(|b| b.fixed) || problem.contacts.len() != n {
        return None;
    }
    let mut below = vec![None; n];
    let mut above = vec![None; n];
    let mut base = None;
    for (k, c) in problem.contacts.iter().enumerate() {
        if below[c.upper].replace(k).is_some() {
            return None;
        }
        match c.lower {
            Support::Ground(_) => {
                if base.replace(c.upper).is_some() {
                    return None;
                }
            }
            Support::Body(l) => {
                if above[l].replace(c.upper).is_some() {
                    return None;
                }
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut cur = base;
    while let Some(i) = cur {
        if order.len() == n {
            return None;
        }
        order.push(i);
        cur = above[i];
    }
    (order.len() == n).then_some(order)
}

/// Smallest slack over all stability conditions of a serial tower: negative
/// means some condition is violated. Conditions per contact: the resultant of
/// everything above, shifted by the disturbance moment, stays within the
/// contact interval; and the friction demand `epsilon` does not exceed `mu`.
pub fn tower_margin(problem: &ContactProblem) -> Result<(f64, Option<BlockId>), StabilityError> {
    let order = tower_order(problem).ok_or(StabilityError::NotApplicable)?;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    if problem.epsilon > 0.0 {
        worst = problem.mu - problem.epsilon;
        witness = order.first().map(|&i| problem.bodies[i].block);
    }
    let below: BTreeMap<usize, &Contact> = problem.contacts.iter().map(|c| (c.upper, c)).collect();
    for (k, &i) in order.iter().enumerate() {
        let contact = below[&i];
        let stack = &order[k..];
        let w: f64 = stack.iter().map(|&j| problem.bodies[j].weight).sum();
        let cx: f64 = stack.iter().map(|&j| problem.bodies[j].weight * problem.bodies[j].centroid.0).sum::<f64>() / w;
        let moment: f64 = stack
            .iter()
            .map(|&j| problem.bodies[j].weight * (problem.bodies[j].centroid.1 - contact.y))
            .sum::<f64>()
            / w;
        let shift = problem.epsilon * moment;
        let m = (cx - shift - contact.x_a).min(contact.x_b - (cx + shift));
        if m < worst {
            worst = m;
            witness = Some(problem.bodies[i].block);
        }
    }
    Ok((worst, witness))
}

/// Closed-form verdict for serial towers, used to cross-check the LP.
pub fn tower_oracle(problem: &ContactProblem) -> Result<StabilityVerdict, StabilityError> {
    let (margin, witness) = tower_margin(problem)?;
    let tol = problem.slack * 10.0;
    if margin >= -tol {
        Ok(StabilityVerdict::STABLE)
    } else {
        Ok(StabilityVerdict { stable: false, witness })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn body(i: u16, w: f64, x: f64, y: f64) -> Body {
        Body { block: BlockId(i), weight: w, centroid: (x, y), fixed: false }
    }

    fn ground(upper: usize, x_a: f64, x_b: f64) -> Contact {
        Contact { lower: Support::Ground(SurfaceId(0)), upper, x_a, x_b, y: 0.0 }
    }

    fn problem(bodies: Vec<Body>, contacts: Vec<Contact>, epsilon: f64) -> ContactProblem {
        ContactProblem { bodies, contacts, mu: 0.5, epsilon, slack: 1e-9 }
    }

    #[test]
    fn fully_supported_block_is_stable() {
        let p = problem(vec![body(0, 1.0, 1.5, 0.5)], vec![ground(0, 0.0, 3.0)], 0.05);
        assert!(check_static_equilibrium(&p).unwrap().stable);
        assert!(tower_oracle(&p).unwrap().stable);
    }

    #[test]
    fn block_mostly_past_the_edge_tips() {
        // size 3 at columns 2..4 on a table ending at x = 3
        let p = problem(vec![body(0, 1.0, 3.5, 0.5)], vec![ground(0, 2.0, 3.0)], 0.0);
        let v = check_static_equilibrium(&p).unwrap();
        assert!(!v.stable);
        assert_eq!(v.witness, Some(BlockId(0)));
    }

    #[test]
    fn empty_problem_is_stable() {
        let p = problem(vec![], vec![], 0.05);
        assert!(check_static_equilibrium(&p).unwrap().stable);
    }

    #[test]
    fn frictionless_push_is_unstable() {
        let mut p = problem(vec![body(0, 1.0, 1.5, 0.5)], vec![ground(0, 0.0, 3.0)], 0.05);
        p.mu = 0.0;
        assert!(!check_static_equilibrium(&p).unwrap().stable);
        p.epsilon = 0.0;
        assert!(check_static_equilibrium(&p).unwrap().stable);
    }

    #[test]
    fn oracle_rejects_non_towers() {
        let p = problem(
            vec![body(0, 1.0, 0.5, 0.5), body(1, 1.0, 2.5, 0.5)],
            vec![ground(0, 0.0, 1.0), ground(1, 2.0, 3.0)],
            0.0,
        );
        assert_eq!(tower_oracle(&p), Err(StabilityError::NotApplicable));
    }

    fn grid_inst(blocks: Vec<BlockSpec>, at: Vec<(i32, i32)>, table: (i32, i32)) -> ProblemInstance {
        ProblemInstance {
            surfaces: vec![Surface::new("table", 0, table.0, table.1)],
            initial: at
                .into_iter()
                .enumerate()
                .map(|(i, (x, h))| Placement { block: BlockId(i as u16), cell: Cell::new(x, h) })
                .collect(),
            blocks,
            grippers: vec!["g".into()],
            initial_held: vec![],
            goal: GoalSpec::default(),
            makespan: 1,
            physics: PhysicsParams::default(),
            ordering: vec![],
        }
    }

    #[test]
    fn one_contact_per_supporting_interval() {
        let inst = grid_inst(vec![BlockSpec::new("L", 5, 1.0)], vec![(0, 0)], (0, 9));
        let s = inst.validate().unwrap();
        let p = extract_contacts(&inst, &s);
        assert_eq!(p.bodies.len(), 1);
        assert_eq!(p.contacts.len(), 1);
        assert_eq!((p.contacts[0].x_a, p.contacts[0].x_b), (0.0, 5.0));

        // plank over two towers
        let inst = grid_inst(
            vec![BlockSpec::new("a", 1, 1.0), BlockSpec::new("b", 1, 1.0), BlockSpec::new("p", 5, 1.0)],
            vec![(1, 0), (5, 0), (1, 1)],
            (0, 9),
        );
        let s = inst.validate().unwrap();
        let p = extract_contacts(&inst, &s);
        let plank: Vec<_> = p.contacts.iter().filter(|c| c.upper == 2).collect();
        assert_eq!(plank.len(), 2);
        assert_eq!((plank[0].x_a, plank[0].x_b), (1.0, 2.0));
        assert_eq!((plank[1].x_a, plank[1].x_b), (5.0, 6.0));
        assert!(check_static_equilibrium(&p).unwrap().stable);

        let empty = grid_inst(vec![], vec![], (0, 9));
        let s = empty.validate().unwrap();
        let p = extract_contacts(&empty, &s);
        assert!(p.bodies.is_empty() && p.contacts.is_empty());
    }

    fn held_inst(extra: Option<(u32, i32, i32)>) -> (ProblemInstance, WorldState) {
        let mut blocks = vec![BlockSpec::new("P", 5, 1.0)];
        let mut asm = HeldAssembly::single(BlockId(0));
        if let Some((size, dx, dh)) = extra {
            blocks.push(BlockSpec::new("s", size, 1.0));
            asm.members.insert(BlockId(1), Offset { dx, dh });
        }
        let mut inst = grid_inst(blocks, vec![], (0, 9));
        inst.initial_held = vec![(GripperId(0), asm)];
        let s = inst.validate().unwrap();
        (inst, s)
    }

    #[test]
    fn held_single_block_is_vacuously_stable() {
        let (inst, s) = held_inst(None);
        assert!(check_held_stability(&inst, &s, GripperId(0)).unwrap().stable);
    }

    #[test]
    fn held_plank_with_centred_block_is_stable() {
        let (inst, s) = held_inst(Some((1, 2, 1)));
        assert!(check_held_stability(&inst, &s, GripperId(0)).unwrap().stable);
    }

    #[test]
    fn held_plank_with_hanging_block_is_unstable() {
        // medium with unit 1 on the plank's last unit: centroid at x = 5.5,
        // contact [4, 5].
        let (inst, s) = held_inst(Some((3, 4, 1)));
        let v = check_held_stability(&inst, &s, GripperId(0)).unwrap();
        assert!(!v.stable);
        assert_eq!(v.witness, Some(BlockId(1)));
    }

    #[test]
    fn lp_dump_mentions_every_contact() {
        let p = problem(vec![body(0, 1.0, 1.5, 0.5)], vec![ground(0, 0.0, 3.0)], 0.05);
        let text = describe_lp(&p);
        assert!(text.contains("c0:"));
        assert!(text.contains("PushRight"));
        assert!(text.contains("PushLeft"));
    }
}
