mod common;

use common::*;
use ordered_bundles::ordering::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn algorithms_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (i, inst) in random_instances(&mut rng, 150, 12, 6).iter().enumerate() {
        let min = brute_min(inst);
        let simple = order_simple(inst);
        let linear = order_linear(inst);
        simple.validate(inst).unwrap();
        linear.validate(inst).unwrap();
        assert_eq!(count_crossings(inst, &simple), min, "simple, instance {i}: {}", inst.to_json());
        assert_eq!(count_crossings(inst, &linear), min, "linear, instance {i}: {}", inst.to_json());
        assert_eq!(unavoidable_crossings(inst), min);
        check_consistent(inst, &simple).unwrap();
        check_consistent(inst, &linear).unwrap();
    }
}

fn fixture(name: &str) -> OrderInstance {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    OrderInstance::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn four_terminal_fixture_needs_three_crossings() {
    let inst = fixture("four_terminals.json");
    assert_eq!(brute_min(&inst), 3);
    assert_eq!(count_crossings(&inst, &order_simple(&inst)), 3);
    assert_eq!(count_crossings(&inst, &order_linear(&inst)), 3);
}

#[test]
fn gadget_fixture_has_no_nice_ordering() {
    let inst = fixture("no_nice.json");
    assert!(!nice_consistent_exists(&inst));
    assert_eq!(nice_exists_exhaustive(&inst), Some(false));
    for ord in [order_simple(&inst), order_linear(&inst)] {
        check_consistent(&inst, &ord).unwrap();
        assert!(!is_nice(&inst, &ord));
        assert_eq!(count_crossings(&inst, &ord), unavoidable_crossings(&inst));
    }
}

#[test]
fn nice_oracles_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut seen = 0;
    for inst in random_instances(&mut rng, 200, 12, 6) {
        if let Some(exhaustive) = nice_exists_exhaustive(&inst) {
            assert_eq!(exhaustive, nice_consistent_exists(&inst), "{}", inst.to_json());
            seen += 1;
        }
    }
    assert!(seen > 100);
}

#[test]
fn trees_get_nice_optimal_orderings() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 200 {
        let Some(inst) = random_tree_instance(&mut rng, 12, 6) else {
            continue;
        };
        let ord = order_nice_tree(&inst).unwrap();
        ord.validate(&inst).unwrap();
        assert!(is_nice(&inst, &ord), "{}", inst.to_json());
        assert_eq!(count_crossings(&inst, &ord), brute_min(&inst), "{}", inst.to_json());
        done += 1;
    }
}

#[test]
fn tree_ordering_rejects_cycles() {
    assert!(order_nice_tree(&fixture("no_nice.json")).is_err());
}

#[test]
fn deletion_forest_partitions_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for inst in random_instances(&mut rng, 100, 12, 6) {
        let (ord, forest) = order_linear_with_forest(&inst);
        assert_eq!(forest.roots, inst.edge_paths().len());
        for e in &forest.edges {
            let mut order = e.order.clone();
            order.sort_unstable();
            let mut paths = e.paths.clone();
            paths.sort_unstable();
            assert_eq!(order, paths);
            if !e.children.is_empty() {
                let mut below: Vec<usize> = e.children.iter().flat_map(|&c| forest.edges[c].paths.clone()).collect();
                below.sort_unstable();
                assert_eq!(below, paths);
            }
        }
        for (i, e) in forest.edges[..forest.roots].iter().enumerate() {
            let key = (e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1]));
            assert_eq!(ord.order(e.ends[0], e.ends[1]).unwrap(), e.order, "root {i}");
            assert!(inst.edge_paths().contains_key(&key));
        }
    }
}

#[test]
fn deleting_a_star_center_joins_its_leaves() {
    // Center 0 with leaves 1..=4 clockwise; paths 1-3, 2-4, 1-2.
    let rotation = vec![vec![1, 2, 3, 4], vec![0], vec![0], vec![0], vec![0]];
    let inst = OrderInstance::new(rotation, vec![vec![1, 0, 3], vec![2, 0, 4], vec![1, 0, 2]]).unwrap();
    let (ord, forest) = order_linear_with_forest(&inst);
    assert_eq!(forest.roots, 4);
    let joins: Vec<[usize; 2]> = forest.edges[forest.roots..]
        .iter()
        .map(|e| {
            let mut ends = e.ends;
            ends.sort_unstable();
            ends
        })
        .collect();
    assert_eq!(joins.len(), 3);
    for pair in [[1, 3], [2, 4], [1, 2]] {
        assert!(joins.contains(&pair), "{joins:?}");
    }
    // 1-3 and 2-4 only touch at the center, which is not a crossing.
    assert_eq!(count_crossings(&inst, &ord), 0);
    assert_eq!(brute_min(&inst), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larger_instances_are_consistent_and_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = loop {
            let draw = if seed % 2 == 0 {
                random_walk_instance(&mut rng, 24, 12)
            } else {
                random_instance(&mut rng, 24, 12)
            };
            if let Some(inst) = draw {
                break inst;
            }
        };
        let simple = order_simple(&inst);
        let linear = order_linear(&inst);
        prop_assert!(simple.validate(&inst).is_ok());
        prop_assert!(linear.validate(&inst).is_ok());
        prop_assert!(check_consistent(&inst, &simple).is_ok());
        prop_assert!(check_consistent(&inst, &linear).is_ok());
        let unavoidable = unavoidable_crossings(&inst);
        prop_assert_eq!(count_crossings(&inst, &simple), unavoidable);
        prop_assert_eq!(count_crossings(&inst, &linear), unavoidable);
    }
}
