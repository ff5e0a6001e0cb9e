//! Planning core for multi-gripper block construction.
//!
//! Blocks of unit height and integer width are rearranged by several grippers
//! into goal structures such as bridges, overhangs and towers. Every state the
//! planner visits is checked for supportedness (no block rests on itself),
//! static stability of the grounded structure and of every carried
//! subassembly, and the goal's connectedness conditions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, rendering and
//! the command-line front end live in the companion `stackplan` crate.
//!
//! Layout:
//!
//! - [`model`]: instances, world states, plans.
//! - [`closure`]: derived relations (`on`, `above`, `supported`, connectivity)
//!   and the literal-rule fixpoint evaluator used to cross-check them.
//! - [`stability`]: contact extraction and the static-equilibrium LP.
//! - [`planner`]: joint-action enumeration, successor function and the
//!   bounded-horizon iterative-deepening search.
//! - [`validator`]: independent plan replay.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod closure;
pub mod model;
pub mod planner;
pub mod stability;
pub mod validator;

pub use model::{
    Action, BlockId, BlockSpec, Cell, Edge, GoalAtom, GoalSpec, GripperId, HeldAssembly,
    Location, OrderingConstraint, PhysicsParams, Placement, Plan, ProblemInstance, Surface,
    SurfaceId, ValidationError, WorldState,
};
