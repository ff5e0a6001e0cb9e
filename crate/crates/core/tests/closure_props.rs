mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use stackplan_core::closure::{
    self, compute_above, connected_components, derive_on, fixpoint_from_seeds, fixpoint_oracle,
    on_aux, supported_closure, Above, On, OracleError, Seeds,
};
use stackplan_core::{BlockId, Location};

use common::{drop_instance, random_state};

fn drops() -> impl Strategy<Value = Vec<(u32, i32)>> {
    prop::collection::vec((1u32..=3, -2i32..=12), 1..=7)
}

fn picks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..8, 0..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn grid_states_never_support_themselves(d in drops(), p in picks()) {
        let (inst, state) = random_state(&d, &p);
        prop_assert!(supported_closure(&on_aux(&derive_on(&inst, &state))).is_ok());
        prop_assert!(fixpoint_oracle(&inst, &state).is_ok());
    }

    #[test]
    fn grid_relations_match_rule_fixpoint(d in drops(), p in picks()) {
        let (inst, state) = random_state(&d, &p);
        let on = derive_on(&inst, &state);
        let above = compute_above(&inst, &state);
        let supported = supported_closure(&on_aux(&on)).unwrap();
        let oracle = fixpoint_oracle(&inst, &state).unwrap();
        prop_assert_eq!(&oracle.on, &on);
        prop_assert_eq!(&oracle.above, &above);
        prop_assert_eq!(&oracle.supported, &supported);
        for (g, asm) in state.held_assemblies() {
            let expected: BTreeSet<Above> = asm
                .cells(&inst)
                .into_iter()
                .map(|(c, b, v)| Above { h: c.level + 1, block: b, v, x: c.x })
                .collect();
            prop_assert_eq!(&oracle.held_above[g], &expected);
        }
    }

    #[test]
    fn every_anchored_unit_has_one_position(d in drops(), p in picks()) {
        let (inst, state) = random_state(&d, &p);
        let above = compute_above(&inst, &state);
        let mut count: BTreeMap<(BlockId, u32), usize> = BTreeMap::new();
        for a in &above {
            *count.entry((a.block, a.v)).or_default() += 1;
        }
        for (b, _) in state.anchored() {
            for v in 1..=inst.size(b) {
                prop_assert_eq!(count.get(&(b, v)).copied(), Some(1));
            }
        }
        prop_assert_eq!(count.len(), state.cells().count());
    }

    #[test]
    fn connectivity_is_an_equivalence_on_touching_nodes(d in drops()) {
        let inst = drop_instance(&d, 0);
        let state = inst.validate().unwrap();
        let pairs = connected_components(&inst, &state).pairs();
        for &(a, b) in &pairs {
            prop_assert!(pairs.contains(&(b, a)));
            for &(c, e) in &pairs {
                if c == b {
                    prop_assert!(pairs.contains(&(a, e)));
                }
            }
        }
    }

    #[test]
    fn adding_a_block_never_disconnects(d in drops(), extra in (1u32..=3, -2i32..=12)) {
        let before = drop_instance(&d, 0);
        let mut more = d.clone();
        more.push(extra);
        let after = drop_instance(&more, 0);
        let old = connected_components(&before, &before.validate().unwrap()).pairs();
        let new = connected_components(&after, &after.validate().unwrap()).pairs();
        prop_assert!(old.is_subset(&new));
    }
}

/// Support pairs over `n` blocks with the cycle `cycle[0] -> cycle[1] -> ...
/// -> cycle[0]` plus arbitrary extra edges.
fn cyclic_pairs(n: u16, cycle: &[u16], extra: &[(u16, u16)]) -> BTreeSet<(BlockId, Location)> {
    let mut pairs = BTreeSet::new();
    for w in 0..cycle.len() {
        let (a, b) = (cycle[w], cycle[(w + 1) % cycle.len()]);
        pairs.insert((BlockId(a), Location::Block(BlockId(b))));
    }
    for &(a, b) in extra {
        pairs.insert((BlockId(a % n), Location::Block(BlockId(b % n))));
    }
    pairs
}

fn cycle_case() -> impl Strategy<Value = (u16, Vec<u16>, Vec<(u16, u16)>)> {
    (2u16..=7).prop_flat_map(|n| {
        (
            Just(n),
            Just((0..n).collect::<Vec<u16>>()).prop_shuffle().prop_flat_map(move |perm| {
                (1..=perm.len()).prop_map(move |k| perm[..k].to_vec())
            }),
            prop::collection::vec((0..n, 0..n), 0..6),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn injected_cycles_are_detected((n, cycle, extra) in cycle_case()) {
        let pairs = cyclic_pairs(n, &cycle, &extra);
        prop_assert!(supported_closure(&pairs).is_err());

        let inst = drop_instance(&vec![(1, 0); n as usize], 0);
        let anchored: Vec<On> = pairs
            .iter()
            .map(|&(b, l)| On { block: b, on: l, u: 1, v: 1 })
            .collect();
        let seeds = Seeds { anchored, held: vec![] };
        prop_assert!(matches!(fixpoint_from_seeds(&inst, &seeds), Err(OracleError::Circular(_))));
    }
}

#[test]
fn oracle_matches_on_bridging_staircase() {
    // Two medium blocks in a staircase past the table edge.
    let inst = drop_instance(&[(3, 4), (3, 6)], 0);
    let state = inst.validate().unwrap();
    let oracle = closure::fixpoint_oracle(&inst, &state).unwrap();
    assert_eq!(oracle.on, derive_on(&inst, &state));
    assert_eq!(oracle.above, compute_above(&inst, &state));
}
