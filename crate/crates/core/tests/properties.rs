use proptest::prelude::*;
use svrtree::cart::{cart_fit, prune_path};
use svrtree::data_io::FeatureScaling;
use svrtree::evaluation::{confusion, rank_descending, stratified_folds};
use svrtree::geometry::{grid_surface_oracle, union_surface};
use svrtree::resampling::{
    adasyn, adasyn_budget, borderline_smote1, duplicate_oversample, largest_remainder, smote,
};
use svrtree::tree_core::{
    derive_class_weights, gini, risk, signed_node_impurity, tree_signed_impurity,
};
use svrtree::{fit, BoxUnion, ClassWeights, Dataset, FitConfig, Hyperrectangle, Model};

fn dataset(max_n: usize, max_d: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_d, 6..=max_n).prop_flat_map(|(d, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(0u8..=20, d), n),
            proptest::collection::vec(proptest::bool::weighted(0.3), n),
        )
            .prop_filter_map("need a minority", |(rows, flags)| {
                let n1 = flags.iter().filter(|&&f| f).count();
                if n1 == 0 || 2 * n1 >= flags.len() {
                    return None;
                }
                let rows: Vec<Vec<f64>> = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v as f64 / 20.0).collect())
                    .collect();
                Dataset::from_rows(&rows, flags.into_iter().map(u8::from).collect()).ok()
            })
    })
}

/// Non-overlapping boxes cut from a row of columns on the 1/16 grid.
fn grid_boxes() -> impl Strategy<Value = BoxUnion> {
    proptest::collection::vec((0u32..16, 1u32..=16, any::<bool>()), 1..6).prop_map(|cols| {
        let mut x = 0u32;
        let mut boxes = Vec::new();
        for (lo, len, keep) in cols {
            if x >= 16 {
                break;
            }
            let width = 1 + (len % (16 - x).max(1)).min(16 - x - 1);
            let (y0, y1) = (lo.min(15), (lo + len).clamp(lo.min(15) + 1, 16));
            if keep {
                boxes.push(
                    Hyperrectangle::new(
                        vec![x as f64 / 16.0, y0 as f64 / 16.0],
                        vec![(x + width) as f64 / 16.0, y1 as f64 / 16.0],
                    )
                    .unwrap(),
                );
            }
            x += width;
        }
        BoxUnion::new(2, boxes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_surface_matches_rasterization(u in grid_boxes()) {
        prop_assert_eq!(union_surface(&u), grid_surface_oracle(&u, 16));
        prop_assert!(u.volume() <= 1.0);
    }

    #[test]
    fn gini_is_symmetric_and_bounded(p0 in 0.0f64..=1.0) {
        let i = gini(p0, 1.0 - p0).unwrap();
        prop_assert!((i - gini(1.0 - p0, p0).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=0.5).contains(&i));
        prop_assert!(((1.0 - 2.0 * i) - (1.0 - 2.0 * p0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn signed_impurity_dominates(c0 in 0u64..200, c1 in 0u64..200, alpha in 1u32..40) {
        prop_assume!(c0 + c1 > 0);
        let s = ClassWeights::new(alpha, 400, 10).unwrap().stats(c0, c1);
        let i = svrtree::tree_core::node_impurity(&s);
        for label in [0, 1] {
            prop_assert!(signed_node_impurity(&s, label) >= i - 1e-15);
        }
        let d = s.dominant_label();
        prop_assert!((signed_node_impurity(&s, d) - i).abs() < 1e-15);
    }

    #[test]
    fn leaves_partition_the_cube(data in dataset(60, 3), k in 0usize..11) {
        let w = derive_class_weights(data.n0(), data.n1()).unwrap();
        let lambda = svrtree::evaluation::lambda_grid(data.len())[k];
        let tree = fit(&data, w, FitConfig::new(lambda, data.len())).unwrap();
        let total: f64 = tree.leaf_ids().map(|id| tree.node(id).region.volume()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(tree.leaf_count() <= svrtree::induction::default_max_leaves(data.len()));
        for i in 0..data.len() {
            prop_assert!(tree.node(tree.leaf_of(data.row(i))).region.contains(data.row(i)));
        }
        let single = svrtree::Tree::single_leaf(data.dimension(), w.stats(data.n0() as u64, data.n1() as u64).dominant_label(), w, lambda);
        prop_assert!(risk(&tree, &data).unwrap().total <= risk(&single, &data).unwrap().total + 1e-12);
    }

    #[test]
    fn model_json_round_trip(data in dataset(50, 3)) {
        let w = derive_class_weights(data.n0(), data.n1()).unwrap();
        let tree = fit(&data, w, FitConfig::new(1e-4, data.len())).unwrap();
        let text = Model::new(tree.clone()).to_json().unwrap();
        let back = Model::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert_eq!(back.tree.predict_dataset(&data).unwrap(), tree.predict_dataset(&data).unwrap());
        prop_assert_eq!(back.tree.decision_set().svr(), tree.decision_set().svr());
    }

    #[test]
    fn folds_partition_and_stratify(labels in proptest::collection::vec(proptest::bool::weighted(0.25), 20..200), k in 2usize..6, seed in any::<u64>()) {
        let labels: Vec<u8> = labels.into_iter().map(u8::from).collect();
        let n1 = labels.iter().filter(|&&y| y == 1).count();
        prop_assume!(n1 >= k && labels.len() - n1 >= k);
        let folds = stratified_folds(&labels, k, seed).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let ones: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == 1).count()).collect();
        prop_assert!(ones.iter().max().unwrap() - ones.iter().min().unwrap() <= 1);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(folds, stratified_folds(&labels, k, seed).unwrap());
    }

    #[test]
    fn resampled_counts(data in dataset(80, 3), k in 1usize..7, seed in any::<u64>()) {
        let (n0, n1) = (data.n0(), data.n1());
        let alpha = ((n0 / n1) as u32).max(1);
        for out in [
            duplicate_oversample(&data, alpha, seed).unwrap(),
            smote(&data, alpha, k, seed).unwrap(),
            borderline_smote1(&data, alpha, k, seed).unwrap(),
        ] {
            prop_assert_eq!(out.n1(), alpha as usize * n1);
            prop_assert_eq!(out.n0(), n0);
        }
        let a = adasyn(&data, alpha, k, seed).unwrap();
        prop_assert_eq!(a.len() - data.len(), adasyn_budget(n0, n1, alpha));
        prop_assert_eq!(&a, &adasyn(&data, alpha, k, seed).unwrap());
    }

    #[test]
    fn largest_remainder_allocates_exactly(weights in proptest::collection::vec(0.0f64..5.0, 1..30), total in 0usize..500) {
        let parts = largest_remainder(&weights, total);
        prop_assert_eq!(parts.iter().sum::<usize>(), total);
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 {
            for (p, w) in parts.iter().zip(&weights) {
                let quota = w / sum * total as f64;
                prop_assert!((*p as f64 - quota).abs() < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn scaling_round_trip(min in -1e3f64..1e3, span in 1e-3f64..1e3, t in 0.0f64..=1.0) {
        let s = FeatureScaling { min, max: min + span };
        let x = min + t * span;
        prop_assert!((s.unscale(s.scale(x)) - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn prune_path_is_nested(data in dataset(60, 2)) {
        let full = cart_fit(&data).unwrap();
        let path = prune_path(&full);
        prop_assert!(path.alphas.windows(2).all(|w| w[0] < w[1]));
        let leaves: Vec<usize> = (0..path.len()).map(|i| path.leaf_count(i)).collect();
        prop_assert!(leaves.windows(2).all(|w| w[0] > w[1]));
        prop_assert_eq!(*leaves.last().unwrap(), 1);
        for i in 0..path.len() {
            let t = path.tree(i);
            prop_assert_eq!(t.leaf_count(), leaves[i]);
            for r in 0..data.len() {
                prop_assert_eq!(t.predict(data.row(r)).unwrap(), path.predict_at(i, data.row(r)));
            }
        }
    }

    #[test]
    fn confusion_totals(truth in proptest::collection::vec(0u8..2, 1..100), flips in proptest::collection::vec(any::<bool>(), 100)) {
        let pred: Vec<u8> = truth.iter().zip(&flips).map(|(&y, &f)| if f { 1 - y } else { y }).collect();
        let cm = confusion(&truth, &pred).unwrap();
        prop_assert_eq!(cm.total() as usize, truth.len());
        let m = cm.metrics();
        for v in [m.accuracy, m.precision, m.tpr, m.f_measure, m.g_mean] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn ranks_sum_to_triangular(values in proptest::collection::vec(0u8..5, 1..12)) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        let ranks = rank_descending(&v);
        let n = v.len() as f64;
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn zero_penalty_growth_never_raises_training_impurity() {
    let data = svrtree::data_io::toy_generate(20, 200, 9);
    let w = derive_class_weights(data.n0(), data.n1()).unwrap();
    let root = svrtree::Tree::single_leaf(2, 1, w, 0.0);
    let grown = fit(&data, w, FitConfig::new(0.0, data.len())).unwrap();
    assert!(
        tree_signed_impurity(&grown, &data).unwrap() < tree_signed_impurity(&root, &data).unwrap()
    );
}
