//! JSON instance and plan documents.
//!
//! Names in documents are resolved to dense ids in declaration order. Both
//! document kinds carry `"format": 1` and reject unknown keys.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use stackplan_core::model::Offset;
use stackplan_core::planner::SearchStats;
use stackplan_core::{
    Action, BlockId, BlockSpec, Cell, Edge, GoalAtom, GoalSpec, GripperId, HeldAssembly, Location,
    OrderingConstraint, PhysicsParams, Placement, Plan, ProblemInstance, Surface, SurfaceId,
    ValidationError,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("unknown {kind} {name:?}")]
    UnknownName { kind: &'static str, name: String },
    #[error("{0}")]
    Field(String),
    #[error("invalid instance: {0}")]
    Invalid(ValidationError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    surfaces: Vec<SurfaceDoc>,
    blocks: Vec<BlockDoc>,
    #[serde(default)]
    grippers: Vec<String>,
    initial: InitialDoc,
    #[serde(default)]
    goal: Vec<GoalDoc>,
    #[serde(default)]
    makespan: u32,
    #[serde(default)]
    physics: PhysicsDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ordering: Vec<OrderingDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceDoc {
    id: String,
    level: i32,
    span: [i32; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    id: String,
    size: u32,
    #[serde(default = "one")]
    weight: f64,
    /// Distance of the centre of mass from the left end; the middle if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centroid: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    #[serde(default)]
    placements: Vec<PlacementDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    held: Vec<HeldDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementDoc {
    block: String,
    x: i32,
    level: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeldDoc {
    gripper: String,
    root: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    members: Vec<MemberDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberDoc {
    block: String,
    dx: i32,
    dh: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EdgeDoc {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum GoalDoc {
    Bridge { left: Vec<String>, right: Vec<String> },
    Overhang { surface: String, edge: EdgeDoc, min_units: u32 },
    PlacedOn { block: String, on: String },
    PlacedOnAt { block: String, on: String, u: u32, v: u32 },
    ExactCell { block: String, x: i32, level: i32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysicsDoc {
    #[serde(default = "default_mu")]
    mu: f64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_slack")]
    slack: f64,
}

fn default_mu() -> f64 {
    PhysicsParams::default().mu
}
fn default_epsilon() -> f64 {
    PhysicsParams::default().epsilon
}
fn default_slack() -> f64 {
    PhysicsParams::default().slack
}

impl Default for PhysicsDoc {
    fn default() -> Self {
        let p = PhysicsParams::default();
        PhysicsDoc { mu: p.mu, epsilon: p.epsilon, slack: p.slack }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum OrderingDoc {
    LeftToRight {
        #[serde(default)]
        slack: i32,
    },
}

/// An instance together with its free-text description.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub description: Option<String>,
    pub instance: ProblemInstance,
}

struct Names<'a> {
    inst: &'a ProblemInstance,
}

impl Names<'_> {
    fn block(&self, name: &str) -> Result<BlockId, FormatError> {
        self.inst.find_block(name).ok_or_else(|| unknown("block", name))
    }
    fn surface(&self, name: &str) -> Result<SurfaceId, FormatError> {
        self.inst.find_surface(name).ok_or_else(|| unknown("surface", name))
    }
    fn gripper(&self, name: &str) -> Result<GripperId, FormatError> {
        self.inst.find_gripper(name).ok_or_else(|| unknown("gripper", name))
    }
    fn location(&self, name: &str) -> Result<Location, FormatError> {
        self.inst.find_location(name).ok_or_else(|| unknown("block or surface", name))
    }
}

fn unknown(kind: &'static str, name: &str) -> FormatError {
    FormatError::UnknownName { kind, name: name.to_string() }
}

/// Parses an instance and checks its structure (ids, geometry, grid
/// invariants). Stability of the initial state is not checked here.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, FormatError> {
    parse_instance_file(text).map(|f| f.instance)
}

pub fn parse_instance_file(text: &str) -> Result<InstanceFile, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format));
    }
    let mut inst = ProblemInstance {
        surfaces: doc
            .surfaces
            .iter()
            .map(|s| Surface::new(s.id.clone(), s.level, s.span[0], s.span[1]))
            .collect(),
        blocks: doc
            .blocks
            .iter()
            .map(|b| {
                let mut spec = BlockSpec::new(b.id.clone(), b.size, b.weight);
                if let Some(c) = b.centroid {
                    spec.centroid_offset = c;
                }
                spec
            })
            .collect(),
        grippers: doc.grippers.clone(),
        initial: Vec::new(),
        initial_held: Vec::new(),
        goal: GoalSpec::default(),
        makespan: doc.makespan,
        physics: PhysicsParams {
            mu: doc.physics.mu,
            epsilon: doc.physics.epsilon,
            slack: doc.physics.slack,
        },
        ordering: doc
            .ordering
            .iter()
            .map(|o| match o {
                OrderingDoc::LeftToRight { slack } => OrderingConstraint::LeftToRight { slack: *slack },
            })
            .collect(),
    };
    let snapshot = inst.clone();
    let names = Names { inst: &snapshot };
    for p in &doc.initial.placements {
        inst.initial.push(Placement { block: names.block(&p.block)?, cell: Cell::new(p.x, p.level) });
    }
    for h in &doc.initial.held {
        let g = names.gripper(&h.gripper)?;
        let mut asm = HeldAssembly::single(names.block(&h.root)?);
        for m in &h.members {
            let b = names.block(&m.block)?;
            if asm.members.insert(b, Offset { dx: m.dx, dh: m.dh }).is_some() {
                return Err(FormatError::Field(format!("block {:?} listed twice in a held assembly", m.block)));
            }
        }
        inst.initial_held.push((g, asm));
    }
    for g in &doc.goal {
        let atom = match g {
            GoalDoc::Bridge { left, right } => GoalAtom::Bridge {
                left: left.iter().map(|s| names.surface(s)).collect::<Result<_, _>>()?,
                right: right.iter().map(|s| names.surface(s)).collect::<Result<_, _>>()?,
            },
            GoalDoc::Overhang { surface, edge, min_units } => GoalAtom::Overhang {
                surface: names.surface(surface)?,
                edge: match edge {
                    EdgeDoc::Left => Edge::Left,
                    EdgeDoc::Right => Edge::Right,
                },
                min_units: *min_units,
            },
            GoalDoc::PlacedOn { block, on } => {
                GoalAtom::PlacedOn { block: names.block(block)?, on: names.location(on)? }
            }
            GoalDoc::PlacedOnAt { block, on, u, v } => GoalAtom::PlacedOnAt {
                block: names.block(block)?,
                on: names.location(on)?,
                u: *u,
                v: *v,
            },
            GoalDoc::ExactCell { block, x, level } => {
                GoalAtom::ExactCell { block: names.block(block)?, cell: Cell::new(*x, *level) }
            }
        };
        inst.goal.atoms.push(atom);
    }
    inst.validate().map_err(FormatError::Invalid)?;
    Ok(InstanceFile { description: doc.description, instance: inst })
}

pub fn serialize_instance(inst: &ProblemInstance) -> String {
    serialize_instance_file(&InstanceFile { description: None, instance: inst.clone() })
}

pub fn serialize_instance_file(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let bname = |b: BlockId| inst.block(b).id.clone();
    let sname = |s: SurfaceId| inst.surface(s).id.clone();
    let doc = InstanceDoc {
        format: FORMAT_VERSION,
        description: file.description.clone(),
        surfaces: inst
            .surfaces
            .iter()
            .map(|s| SurfaceDoc { id: s.id.clone(), level: s.level, span: [s.lo, s.hi] })
            .collect(),
        blocks: inst
            .blocks
            .iter()
            .map(|b| BlockDoc {
                id: b.id.clone(),
                size: b.size,
                weight: b.weight,
                centroid: (b.centroid_offset != b.size as f64 / 2.0).then_some(b.centroid_offset),
            })
            .collect(),
        grippers: inst.grippers.clone(),
        initial: InitialDoc {
            placements: inst
                .initial
                .iter()
                .map(|p| PlacementDoc { block: bname(p.block), x: p.cell.x, level: p.cell.level })
                .collect(),
            held: inst
                .initial_held
                .iter()
                .map(|(g, asm)| HeldDoc {
                    gripper: inst.grippers[g.index()].clone(),
                    root: bname(asm.root),
                    members: asm
                        .members
                        .iter()
                        .filter(|(b, _)| **b != asm.root)
                        .map(|(b, o)| MemberDoc { block: bname(*b), dx: o.dx, dh: o.dh })
                        .collect(),
                })
                .collect(),
        },
        goal: inst
            .goal
            .atoms
            .iter()
            .map(|a| match a {
                GoalAtom::Bridge { left, right } => GoalDoc::Bridge {
                    left: left.iter().map(|s| sname(*s)).collect(),
                    right: right.iter().map(|s| sname(*s)).collect(),
                },
                GoalAtom::Overhang { surface, edge, min_units } => GoalDoc::Overhang {
                    surface: sname(*surface),
                    edge: match edge {
                        Edge::Left => EdgeDoc::Left,
                        Edge::Right => EdgeDoc::Right,
                    },
                    min_units: *min_units,
                },
                GoalAtom::PlacedOn { block, on } => {
                    GoalDoc::PlacedOn { block: bname(*block), on: inst.location_name(*on).to_string() }
                }
                GoalAtom::PlacedOnAt { block, on, u, v } => GoalDoc::PlacedOnAt {
                    block: bname(*block),
                    on: inst.location_name(*on).to_string(),
                    u: *u,
                    v: *v,
                },
                GoalAtom::ExactCell { block, cell } => {
                    GoalDoc::ExactCell { block: bname(*block), x: cell.x, level: cell.level }
                }
            })
            .collect(),
        makespan: inst.makespan,
        physics: PhysicsDoc {
            mu: inst.physics.mu,
            epsilon: inst.physics.epsilon,
            slack: inst.physics.slack,
        },
        ordering: inst
            .ordering
            .iter()
            .map(|o| match o {
                OrderingConstraint::LeftToRight { slack } => OrderingDoc::LeftToRight { slack: *slack },
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance documents serialize");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Op {
    Pick,
    Place,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    op: Op,
    gripper: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    block: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsDoc {
    pub nodes_expanded: u64,
    pub successors: u64,
    pub pruned_unstable: u64,
    pub pruned_other: u64,
    pub duplicates: u64,
    #[serde(default)]
    pub pruned_bound: u64,
    pub horizon: u32,
}

impl From<SearchStats> for StatsDoc {
    fn from(s: SearchStats) -> Self {
        StatsDoc {
            nodes_expanded: s.nodes_expanded,
            successors: s.successors,
            pruned_unstable: s.pruned_unstable,
            pruned_other: s.pruned_other,
            duplicates: s.duplicates,
            pruned_bound: s.pruned_bound,
            horizon: s.horizons,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    format: u32,
    steps: Vec<Vec<ActionDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    statistics: Option<StatsDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanSetDoc {
    format: u32,
    plans: Vec<PlanBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    statistics: Option<StatsDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanBody {
    steps: Vec<Vec<ActionDoc>>,
}

fn steps_to_doc(inst: &ProblemInstance, plan: &Plan) -> Vec<Vec<ActionDoc>> {
    // Root of what each gripper carries, to name the block in place records.
    let mut carrying: BTreeMap<GripperId, BlockId> =
        inst.initial_held.iter().map(|(g, a)| (*g, a.root)).collect();
    plan.steps
        .iter()
        .map(|step| {
            let docs: Vec<ActionDoc> = step
                .iter()
                .map(|a| match *a {
                    Action::Pick { gripper, block } => ActionDoc {
                        op: Op::Pick,
                        gripper: inst.grippers[gripper.index()].clone(),
                        block: Some(inst.block(block).id.clone()),
                        target: None,
                        u: None,
                        v: None,
                    },
                    Action::PlaceOn { gripper, target, u, v } => ActionDoc {
                        op: Op::Place,
                        gripper: inst.grippers[gripper.index()].clone(),
                        block: carrying.get(&gripper).map(|b| inst.block(*b).id.clone()),
                        target: Some(inst.location_name(target).to_string()),
                        u: Some(u),
                        v: Some(v),
                    },
                })
                .collect();
            for a in step {
                match *a {
                    Action::Pick { gripper, block } => {
                        carrying.insert(gripper, block);
                    }
                    Action::PlaceOn { gripper, .. } => {
                        carrying.remove(&gripper);
                    }
                }
            }
            docs
        })
        .collect()
}

fn steps_from_doc(inst: &ProblemInstance, steps: &[Vec<ActionDoc>]) -> Result<Plan, FormatError> {
    let names = Names { inst };
    let mut plan = Plan::default();
    for step in steps {
        let mut actions = Vec::new();
        for a in step {
            let gripper = names.gripper(&a.gripper)?;
            let action = match a.op {
                Op::Pick => {
                    if a.target.is_some() || a.u.is_some() || a.v.is_some() {
                        return Err(FormatError::Field("pick takes only gripper and block".into()));
                    }
                    let block = a.block.as_deref().ok_or_else(|| FormatError::Field("pick without block".into()))?;
                    Action::Pick { gripper, block: names.block(block)? }
                }
                Op::Place => {
                    if let Some(b) = &a.block {
                        names.block(b)?;
                    }
                    let target = a.target.as_deref().ok_or_else(|| FormatError::Field("place without target".into()))?;
                    let (Some(u), Some(v)) = (a.u, a.v) else {
                        return Err(FormatError::Field("place needs both u and v".into()));
                    };
                    Action::PlaceOn { gripper, target: names.location(target)?, u, v }
                }
            };
            actions.push(action);
        }
        actions.sort_by_key(|a| a.gripper());
        plan.steps.push(actions);
    }
    Ok(plan)
}

fn finish(mut s: String) -> String {
    s.push('\n');
    s
}

pub fn serialize_plan(inst: &ProblemInstance, plan: &Plan, stats: Option<&SearchStats>) -> String {
    let doc = PlanDoc {
        format: FORMAT_VERSION,
        steps: steps_to_doc(inst, plan),
        statistics: stats.map(|s| (*s).into()),
    };
    finish(serde_json::to_string_pretty(&doc).expect("plan documents serialize"))
}

pub fn serialize_plans(inst: &ProblemInstance, plans: &[Plan], stats: Option<&SearchStats>) -> String {
    let doc = PlanSetDoc {
        format: FORMAT_VERSION,
        plans: plans.iter().map(|p| PlanBody { steps: steps_to_doc(inst, p) }).collect(),
        statistics: stats.map(|s| (*s).into()),
    };
    finish(serde_json::to_string_pretty(&doc).expect("plan documents serialize"))
}

pub fn parse_plan(inst: &ProblemInstance, text: &str) -> Result<Plan, FormatError> {
    let doc: PlanDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format));
    }
    steps_from_doc(inst, &doc.steps)
}

pub fn parse_plans(inst: &ProblemInstance, text: &str) -> Result<Vec<Plan>, FormatError> {
    let doc: PlanSetDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format));
    }
    doc.plans.iter().map(|p| steps_from_doc(inst, &p.steps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "format": 1,
        "surfaces": [{"id": "table", "level": 0, "span": [0, 4]}],
        "blocks": [{"id": "A", "size": 3}, {"id": "c", "size": 1, "weight": 2.0}],
        "grippers": ["left"],
        "initial": {"placements": [{"block": "A", "x": 0, "level": 0}, {"block": "c", "x": 0, "level": 1}]},
        "goal": [{"placed_on": {"block": "c", "on": "table"}}],
        "makespan": 2
    }"#;

    #[test]
    fn parses_names_and_defaults() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.blocks[0].centroid_offset, 1.5);
        assert_eq!(inst.blocks[1].weight, 2.0);
        assert_eq!(inst.physics, PhysicsParams::default());
        assert_eq!(
            inst.goal.atoms,
            vec![GoalAtom::PlacedOn { block: BlockId(1), on: Location::Surface(SurfaceId(0)) }]
        );
    }

    #[test]
    fn round_trip() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let extra = SMALL.replace("\"makespan\": 2", "\"makespan\": 2, \"speed\": 3");
        assert!(matches!(parse_instance(&extra), Err(FormatError::Json(_))));
        let v2 = SMALL.replace("\"format\": 1", "\"format\": 2");
        assert!(matches!(parse_instance(&v2), Err(FormatError::Version(2))));
        let bad = SMALL.replace("\"on\": \"table\"", "\"on\": \"floor\"");
        assert!(matches!(parse_instance(&bad), Err(FormatError::UnknownName { .. })));
    }

    #[test]
    fn overlapping_initial_blocks_are_rejected() {
        let text = SMALL.replace("\"x\": 0, \"level\": 1", "\"x\": 1, \"level\": 0");
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn plan_round_trip_names_the_carried_block() {
        let inst = parse_instance(SMALL).unwrap();
        let plan = Plan {
            steps: vec![
                vec![Action::Pick { gripper: GripperId(0), block: BlockId(1) }],
                vec![Action::PlaceOn {
                    gripper: GripperId(0),
                    target: Location::Surface(SurfaceId(0)),
                    u: 5,
                    v: 1,
                }],
            ],
        };
        let text = serialize_plan(&inst, &plan, None);
        assert!(text.contains("\"op\": \"place\""));
        assert_eq!(text.matches("\"block\": \"c\"").count(), 2);
        assert_eq!(parse_plan(&inst, &text).unwrap(), plan);
        let set = serialize_plans(&inst, &[plan.clone(), Plan::default()], None);
        assert_eq!(parse_plans(&inst, &set).unwrap(), vec![plan, Plan::default()]);
    }

    #[test]
    fn malformed_actions_are_rejected() {
        let inst = parse_instance(SMALL).unwrap();
        let text = r#"{"format": 1, "steps": [[{"op": "place", "gripper": "left", "target": "table", "u": 1}]]}"#;
        assert!(matches!(parse_plan(&inst, text), Err(FormatError::Field(_))));
        let text = r#"{"format": 1, "steps": [[{"op": "pick", "gripper": "right", "block": "A"}]]}"#;
        assert!(matches!(parse_plan(&inst, text), Err(FormatError::UnknownName { .. })));
    }
}
