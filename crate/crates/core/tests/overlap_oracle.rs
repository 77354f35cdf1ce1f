use std::collections::BTreeSet;

use proptest::prelude::*;
use termkit::overlap::{directional_overlap, symmetrized_overlap, unique_term_overlap, EmbeddedPoint};
use termkit_oracle::fixtures::points;
use termkit_oracle::knn_overlap;

fn embedded(raw: &[(String, String, Vec<f64>)]) -> Vec<EmbeddedPoint> {
    raw.iter()
        .map(|(dataset, id, vector)| EmbeddedPoint {
            dataset: dataset.clone(),
            id: id.clone(),
            vector: vector.clone(),
        })
        .collect()
}

#[test]
fn matches_brute_force_on_random_collections() {
    for seed in 0..10 {
        let raw = points(seed, 200, 8, 2 + seed as usize % 3);
        for k in [1, 5, 10] {
            let m = directional_overlap(&embedded(&raw), k).unwrap();
            let expected = knn_overlap(&raw, k);
            for (i, a) in m.datasets.iter().enumerate() {
                for (j, b) in m.datasets.iter().enumerate() {
                    assert_eq!(m.values[i][j], expected[&(a.clone(), b.clone())], "seed {seed} k {k}");
                }
                let sum: f64 = m.values[i].iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9);
            }
            let s = symmetrized_overlap(&m).unwrap();
            for (i, row) in s.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_eq!(*v, s[j][i]);
                }
            }
        }
    }
}

#[test]
fn duplicated_vectors_break_ties_deterministically() {
    let mut raw = points(7, 30, 3, 3);
    let copy = raw[0].2.clone();
    for p in raw.iter_mut().skip(1).step_by(3) {
        p.2 = copy.clone();
    }
    let m = directional_overlap(&embedded(&raw), 4).unwrap();
    let expected = knn_overlap(&raw, 4);
    for (i, a) in m.datasets.iter().enumerate() {
        for (j, b) in m.datasets.iter().enumerate() {
            assert_eq!(m.values[i][j], expected[&(a.clone(), b.clone())]);
        }
    }
}

#[test]
fn single_dataset_is_one() {
    let raw: Vec<_> = points(3, 20, 4, 1);
    assert_eq!(directional_overlap(&embedded(&raw), 5).unwrap().values, vec![vec![1.0]]);
}

#[test]
fn term_overlap_diagonal_is_set_size() {
    let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let sets = vec![
        ("acl".to_string(), set(&["parsing", "corpus", "treebank"])),
        ("genia".to_string(), set(&["corpus", "protein"])),
    ];
    let c = unique_term_overlap(&sets);
    assert_eq!(c.counts, vec![vec![3, 1], vec![1, 2]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn invariant_to_input_order(seed in 0u64..1000, rotate in 0usize..60) {
        let raw = points(seed, 60, 5, 3);
        let base = directional_overlap(&embedded(&raw), 3).unwrap();
        let mut shuffled = raw.clone();
        shuffled.rotate_left(rotate);
        shuffled.reverse();
        prop_assert_eq!(directional_overlap(&embedded(&shuffled), 3).unwrap(), base);
    }

    #[test]
    fn invariant_to_positive_rescaling(seed in 0u64..1000, scale in 0.5f64..4.0) {
        let raw = points(seed, 60, 5, 3);
        let base = directional_overlap(&embedded(&raw), 3).unwrap();
        let scaled: Vec<_> = raw
            .iter()
            .enumerate()
            .map(|(i, (d, id, v))| {
                let f = if i % 2 == 0 { scale } else { 1.0 };
                (d.clone(), id.clone(), v.iter().map(|x| x * f).collect())
            })
            .collect();
        prop_assert_eq!(directional_overlap(&embedded(&scaled), 3).unwrap(), base);
    }
}
