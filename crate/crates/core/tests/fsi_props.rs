use fsi_core::fsi_index::ValidateOptions;
use fsi_core::oracles::{naive_hash_intersect, naive_sorted_intersect};
use fsi_core::{BuildConfig, FsiIndex, SetCollection, SubsetMode};
use proptest::prelude::*;

fn collections() -> impl Strategy<Value = SetCollection> {
    (1u64..200, 1usize..12).prop_flat_map(|(universe, m)| {
        proptest::collection::vec(proptest::collection::vec(0..universe, 0..40), m)
            .prop_map(|sets| SetCollection::from_sets(sets, true).unwrap())
    })
}

fn config() -> impl Strategy<Value = BuildConfig> {
    (
        prop_oneof![Just(SubsetMode::Explicit), Just(SubsetMode::Compact)],
        1u64..8,
    )
        .prop_map(|(mode, t)| {
            BuildConfig::default()
                .with_mode(mode)
                .with_leaf_threshold(t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn agrees_with_oracles(col in collections(), cfg in config()) {
        let idx = FsiIndex::build(col.clone(), cfg);
        for i in 0..col.len() {
            for j in 0..col.len() {
                let (got, _) = idx.intersect(i, j).unwrap();
                let want = naive_sorted_intersect(col.set(i).unwrap(), col.set(j).unwrap()).unwrap();
                prop_assert_eq!(&got, &want);
                prop_assert_eq!(&got, &naive_hash_intersect(&col, i, j).unwrap());
                prop_assert_eq!(idx.intersect(j, i).unwrap().0, got.clone());
                prop_assert_eq!(idx.intersection_empty(i, j).unwrap(), got.is_empty());
                prop_assert_eq!(idx.intersection_size(i, j).unwrap(), got.len() as u64);
            }
        }
    }

    #[test]
    fn structure_validates(col in collections(), cfg in config()) {
        let idx = FsiIndex::build(col, cfg);
        prop_assert!(idx.validate(&ValidateOptions::default()).is_ok());
        let stats = idx.stats();
        prop_assert!(stats.total_matrix_bits <= stats.total_size * stats.depth as u64);
        if cfg.subset_mode == SubsetMode::Compact {
            prop_assert_eq!(stats.rank_entries, stats.total_size);
        }
    }

    #[test]
    fn modes_agree(col in collections(), t in 1u64..8) {
        let a = FsiIndex::build(col.clone(), BuildConfig::default().with_mode(SubsetMode::Explicit).with_leaf_threshold(t));
        let b = FsiIndex::build(col.clone(), BuildConfig::default().with_mode(SubsetMode::Compact).with_leaf_threshold(t));
        for i in 0..col.len() {
            for j in 0..col.len() {
                prop_assert_eq!(a.intersect(i, j).unwrap(), b.intersect(i, j).unwrap());
            }
        }
    }

    #[test]
    fn persistence_round_trips(col in collections(), cfg in config()) {
        let idx = FsiIndex::build(col, cfg);
        let bytes = idx.to_bytes();
        let back = FsiIndex::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert!(back.validate(&ValidateOptions::default()).is_ok());
    }

    #[test]
    fn inverse_table_counts_every_membership(col in collections()) {
        let mut seen = std::collections::BTreeSet::new();
        let mut total = 0;
        for set in col.sets() {
            for &x in set {
                if seen.insert(x) {
                    total += col.sets_of(x).len();
                }
            }
        }
        prop_assert_eq!(total, col.total_size());
        for (id, set) in col.sets().iter().enumerate() {
            for &x in set {
                prop_assert!(col.sets_of(x).contains(&(id as u32)));
                prop_assert!(col.membership(id, x).unwrap());
            }
        }
    }

    #[test]
    fn sets_file_round_trips(col in collections()) {
        let mut buf = Vec::new();
        col.write(&mut buf).unwrap();
        let back = SetCollection::load(buf.as_slice(), false).unwrap();
        prop_assert_eq!(back.sets(), col.sets());
    }
}

#[test]
fn out_of_range_ids_are_rejected() {
    let col = SetCollection::from_sets(vec![vec![1, 2], vec![2]], false).unwrap();
    let idx = FsiIndex::build(col, BuildConfig::default());
    assert!(idx.intersect(0, 2).is_err());
    assert!(idx.intersection_empty(5, 0).is_err());
    assert!(idx.intersection_size(0, 9).is_err());
}
