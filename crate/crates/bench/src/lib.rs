//! Fixtures shared by the criterion benches.

use svrtree::data_io::synthetic_boxes;
use svrtree::evaluation::lambda_grid;
use svrtree::tree_core::derive_class_weights;
use svrtree::{BoxUnion, Dataset, FitConfig, Hyperrectangle, Tree};

/// Synthetic rectangle data with the mid-grid penalty config for its size.
pub fn workload(n: usize, d: usize, seed: u64) -> (Dataset, FitConfig) {
    let data = synthetic_boxes(n, d, seed);
    let config = FitConfig::new(lambda_grid(n)[5], n);
    (data, config)
}

pub fn fitted(n: usize, d: usize) -> (Dataset, Tree) {
    let (data, config) = workload(n, d, 0);
    let w = derive_class_weights(data.n0(), data.n1()).expect("synthetic data has a minority");
    let tree = svrtree::fit(&data, w, config).expect("fit");
    (data, tree)
}

/// A `k x k` checkerboard of minority cells in the unit square, minus the
/// cell that holds the node box.
pub fn checkerboard(k: usize) -> (Hyperrectangle, BoxUnion) {
    let step = 1.0 / k as f64;
    let cell = |i: usize, j: usize| {
        Hyperrectangle::new(
            vec![i as f64 * step, j as f64 * step],
            vec![(i + 1) as f64 * step, (j + 1) as f64 * step],
        )
        .expect("cell inside the unit square")
    };
    let boxes = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| (i + j) % 2 == 0 && (i, j) != (0, 0))
        .map(|(i, j)| cell(i, j))
        .collect();
    (
        cell(0, 1),
        BoxUnion::new(2, boxes).expect("cells are disjoint"),
    )
}
