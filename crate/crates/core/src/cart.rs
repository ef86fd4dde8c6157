//! CART with Gini splits, grown to purity, and weakest-link pruning with the
//! pruning level chosen by cross-validated F-measure.

use std::collections::BTreeSet;

use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::ConfusionMatrix;
use crate::induction::midpoint;
use crate::tree_core::{ClassWeights, NodeId, NodeKind, Tree};

/// Two zero-gain links closer than this are pruned together.
const LINK_TOLERANCE: f64 = 1e-12;

/// Fully grown CART tree with unit sample weights.
pub fn cart_fit(data: &Dataset) -> Result<Tree> {
    cart_fit_weighted(data, &vec![1; data.len()])
}

/// Gini of `(a, b)` scaled by the node weight: `2ab / (a + b)`.
fn weighted_gini(a: u64, b: u64) -> f64 {
    let total = a + b;
    if total == 0 {
        0.0
    } else {
        2.0 * a as f64 * b as f64 / total as f64
    }
}

/// Fully grown CART tree where sample `i` counts `weights[i]` times.
///
/// Node statistics hold weighted class counts. Leaves take the weighted
/// majority label, the minority label on ties.
pub fn cart_fit_weighted(data: &Dataset, weights: &[u32]) -> Result<Tree> {
    if data.is_empty() {
        return Err(Error::InvalidInput("cannot fit on an empty dataset".into()));
    }
    if weights.len() != data.len() {
        return Err(Error::InvalidInput(format!(
            "{} sample weights for {} samples",
            weights.len(),
            data.len()
        )));
    }
    let (mut w0, mut w1) = (0u64, 0u64);
    for (&w, &y) in weights.iter().zip(data.labels()) {
        if y == 1 {
            w1 += w as u64;
        } else {
            w0 += w as u64;
        }
    }
    let cw = ClassWeights::uniform(w0 as usize, w1 as usize)?;
    let d = data.dimension();
    let root = cw.stats(w0, w1);
    let mut tree = Tree::single_leaf(d, root.dominant_label(), cw, 0.0);
    let n =
        u32::try_from(data.len()).map_err(|_| Error::InvalidInput("too many samples".into()))?;
    let lists: Vec<Vec<u32>> = (0..d)
        .map(|j| {
            let mut order: Vec<u32> = (0..n).filter(|&i| weights[i as usize] > 0).collect();
            order.sort_by(|&a, &b| {
                data.value(a as usize, j)
                    .total_cmp(&data.value(b as usize, j))
            });
            order
        })
        .collect();
    let mut goes_left = vec![false; data.len()];
    let mut stack = vec![(0usize, lists)];
    while let Some((id, lists)) = stack.pop() {
        let stats = tree.node(id).stats;
        let (c0, c1) = (stats.count0, stats.count1);
        if c0 == 0 || c1 == 0 {
            continue;
        }
        let mut best: Option<(f64, usize, f64, u64, u64)> = None;
        for (j, order) in lists.iter().enumerate() {
            let (mut l0, mut l1) = (0u64, 0u64);
            for pair in order.windows(2) {
                let i = pair[0] as usize;
                if data.label(i) == 1 {
                    l1 += weights[i] as u64;
                } else {
                    l0 += weights[i] as u64;
                }
                let a = data.value(i, j);
                let b = data.value(pair[1] as usize, j);
                if a < b {
                    let score = weighted_gini(l0, l1) + weighted_gini(c0 - l0, c1 - l1);
                    if best.is_none_or(|bst| score < bst.0) {
                        best = Some((score, j, midpoint(a, b), l0, l1));
                    }
                }
            }
        }
        let Some((_, j, t, l0, l1)) = best else {
            continue;
        };
        let ls = cw.stats(l0, l1);
        let rs = cw.stats(c0 - l0, c1 - l1);
        let (left, right) = tree.split_leaf(
            id,
            j,
            t,
            (ls.dominant_label(), rs.dominant_label()),
            (ls, rs),
        )?;
        for &i in &lists[0] {
            goes_left[i as usize] = data.value(i as usize, j) <= t;
        }
        let (mut ll, mut rl) = (Vec::with_capacity(d), Vec::with_capacity(d));
        for order in lists {
            let (a, b): (Vec<u32>, Vec<u32>) =
                order.into_iter().partition(|&i| goes_left[i as usize]);
            ll.push(a);
            rl.push(b);
        }
        stack.push((right, rl));
        stack.push((left, ll));
    }
    Ok(tree)
}

/// Nested subtrees of one fitted tree, indexed by critical cost-complexity values.
#[derive(Debug, Clone)]
pub struct PruneSequence {
    /// Strictly increasing, starting at 0.
    pub alphas: Vec<f64>,
    base: Tree,
    /// Position in the sequence from which each internal node is a leaf.
    pruned_at: Vec<usize>,
}

/// Misclassified weight of a node labelled by majority, as a fraction of the total.
fn node_error(tree: &Tree, id: NodeId, total: f64) -> f64 {
    let s = tree.node(id).stats;
    s.count0.min(s.count1) as f64 / total
}

/// Weakest-link pruning sequence of `tree`.
///
/// The first entry is the smallest subtree with the same training error as
/// the full tree, which is the full tree whenever every leaf is pure.
pub fn prune_path(tree: &Tree) -> PruneSequence {
    let m = tree.nodes().len();
    let root = tree.node(0).stats;
    let total = (root.count0 + root.count1).max(1) as f64;
    let own: Vec<f64> = (0..m).map(|i| node_error(tree, i, total)).collect();
    let mut pruned_at = vec![usize::MAX; m];
    collapse_zero_links(tree, &own, &mut pruned_at);
    let mut alphas = vec![0.0];
    let mut subtree_error = vec![0.0; m];
    let mut leaves = vec![0usize; m];
    let mut reachable = vec![false; m];
    loop {
        let step = alphas.len();
        let is_leaf =
            |i: usize, pruned: &[usize]| tree.node(i).is_leaf() || pruned[i] != usize::MAX;
        for i in (0..m).rev() {
            if is_leaf(i, &pruned_at) {
                subtree_error[i] = own[i];
                leaves[i] = 1;
            } else if let NodeKind::Split { left, right, .. } = tree.node(i).kind {
                subtree_error[i] = subtree_error[left] + subtree_error[right];
                leaves[i] = leaves[left] + leaves[right];
            }
        }
        reachable.fill(false);
        reachable[0] = true;
        let mut links = Vec::new();
        for i in 0..m {
            if !reachable[i] || is_leaf(i, &pruned_at) {
                continue;
            }
            if let NodeKind::Split { left, right, .. } = tree.node(i).kind {
                reachable[left] = true;
                reachable[right] = true;
            }
            links.push((i, (own[i] - subtree_error[i]) / (leaves[i] - 1) as f64));
        }
        if links.is_empty() {
            break;
        }
        let weakest = links.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        for &(i, g) in &links {
            if g <= weakest + LINK_TOLERANCE {
                pruned_at[i] = step;
            }
        }
        let last = alphas[step - 1];
        alphas.push(if weakest > last {
            weakest
        } else {
            f64::from_bits(last.to_bits() + 1)
        });
    }
    PruneSequence {
        alphas,
        base: tree.clone(),
        pruned_at,
    }
}

/// Collapse, bottom-up and at step 0, every node whose removal does not
/// raise the training error.
fn collapse_zero_links(tree: &Tree, own: &[f64], pruned_at: &mut [usize]) {
    let m = pruned_at.len();
    let mut subtree_error = vec![0.0; m];
    loop {
        let mut changed = false;
        for i in (0..m).rev() {
            let leaf = tree.node(i).is_leaf() || pruned_at[i] != usize::MAX;
            if leaf {
                subtree_error[i] = own[i];
            } else if let NodeKind::Split { left, right, .. } = tree.node(i).kind {
                subtree_error[i] = subtree_error[left] + subtree_error[right];
                if own[i] - subtree_error[i] <= LINK_TOLERANCE {
                    pruned_at[i] = 0;
                    subtree_error[i] = own[i];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

impl PruneSequence {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn base(&self) -> &Tree {
        &self.base
    }

    /// Position of the subtree optimal at cost-complexity `alpha`.
    pub fn index_at(&self, alpha: f64) -> usize {
        self.alphas
            .partition_point(|&a| a <= alpha)
            .saturating_sub(1)
    }

    fn collapsed_nodes(&self, index: usize) -> BTreeSet<NodeId> {
        (0..self.pruned_at.len())
            .filter(|&i| self.pruned_at[i] <= index)
            .collect()
    }

    pub fn tree(&self, index: usize) -> Tree {
        let collapse = self.collapsed_nodes(index);
        if collapse.is_empty() {
            return self.base.clone();
        }
        self.base.collapsed(&collapse, |n| n.stats.dominant_label())
    }

    pub fn trees(&self) -> Vec<Tree> {
        (0..self.len()).map(|i| self.tree(i)).collect()
    }

    pub fn subtree_at(&self, alpha: f64) -> Tree {
        self.tree(self.index_at(alpha))
    }

    pub fn leaf_count(&self, index: usize) -> usize {
        self.tree(index).leaf_count()
    }

    /// Label of `x` under the subtree at `index`, without building it.
    pub fn predict_at(&self, index: usize, x: &[f64]) -> u8 {
        let t = &self.base;
        let mut id = 0;
        loop {
            let n = t.node(id);
            match n.kind {
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } if self.pruned_at[id] > index => {
                    id = if x[feature] <= threshold { left } else { right }
                }
                NodeKind::Leaf { label } => return label,
                NodeKind::Split { .. } => return n.stats.dominant_label(),
            }
        }
    }

    /// Geometric midpoints of consecutive critical values, then the last value.
    pub fn candidate_alphas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .alphas
            .windows(2)
            .map(|w| (w[0] * w[1]).sqrt())
            .collect();
        if let Some(&last) = self.alphas.last() {
            out.push(last);
        }
        out
    }
}

/// Chosen pruning level and the cross-validated F-measure of every candidate.
#[derive(Debug, Clone)]
pub struct PrunedSelection {
    pub tree: Tree,
    pub alpha: f64,
    pub scores: Vec<(f64, f64)>,
}

/// Prune a tree grown on `prepare(train)` at the candidate alpha with the best
/// F-measure pooled over `folds` (validation index sets into `train`).
///
/// `prepare` receives the training rows and a stream id (the fold index, or
/// `u64::MAX` for the full training set) and returns the data to grow on.
pub fn select_pruned(
    train: &Dataset,
    folds: &[Vec<usize>],
    prepare: &(dyn Fn(&Dataset, u64) -> Result<Dataset> + Sync),
) -> Result<PrunedSelection> {
    let full = prepare(train, u64::MAX)?;
    let path = prune_path(&cart_fit(&full)?);
    let candidates = path.candidate_alphas();
    let mut pooled = vec![ConfusionMatrix::default(); candidates.len()];
    if candidates.len() > 1 {
        for (f, validation) in folds.iter().enumerate() {
            let fit_rows = complement(train.len(), validation);
            let inner = prepare(&train.subset(&fit_rows), f as u64)?;
            let inner_path = prune_path(&cart_fit(&inner)?);
            for (c, &alpha) in candidates.iter().enumerate() {
                let idx = inner_path.index_at(alpha);
                for &i in validation {
                    pooled[c].record(train.label(i), inner_path.predict_at(idx, train.row(i)));
                }
            }
        }
    }
    let scores: Vec<(f64, f64)> = candidates
        .iter()
        .zip(&pooled)
        .map(|(&a, cm)| (a, cm.metrics().f_measure))
        .collect();
    let mut best = 0;
    for (c, s) in scores.iter().enumerate() {
        if s.1 > scores[best].1 {
            best = c;
        }
    }
    let alpha = scores.get(best).map_or(0.0, |s| s.0);
    Ok(PrunedSelection {
        tree: path.subtree_at(alpha),
        alpha,
        scores,
    })
}

/// Sorted indices in `0..n` not listed in `excluded` (which must be sorted).
pub(crate) fn complement(n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n.saturating_sub(excluded.len()));
    let mut e = excluded.iter().peekable();
    for i in 0..n {
        if e.peek() == Some(&&i) {
            e.next();
        } else {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::toy_generate;
    use crate::resampling::duplicate_oversample;

    fn training_errors(t: &Tree, data: &Dataset) -> usize {
        data.rows()
            .zip(data.labels())
            .filter(|(x, &y)| t.predict(x).unwrap() != y)
            .count()
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let data = Dataset::from_rows(&[vec![0.1], vec![0.7]], vec![1, 1]).unwrap();
        let t = cart_fit(&data).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.predict(&[0.4]).unwrap(), 1);
        assert!(cart_fit(&data.subset(&[])).is_err());
    }

    #[test]
    fn separable_line_needs_one_split() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let labels = (0..10).map(|i| u8::from(i >= 6)).collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let t = cart_fit(&data).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(training_errors(&t, &data), 0);
    }

    #[test]
    fn full_growth_fits_distinct_points() {
        let data = toy_generate(20, 200, 5);
        let t = cart_fit(&data).unwrap();
        assert_eq!(training_errors(&t, &data), 0);
        let path = prune_path(&t);
        assert_eq!(path.alphas[0], 0.0);
        assert_eq!(path.tree(0), t);
        assert!(path.alphas.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(path.tree(path.len() - 1).leaf_count(), 1);
        assert_eq!(path.subtree_at(1e9).leaf_count(), 1);
    }

    #[test]
    fn path_is_nested() {
        let data = toy_generate(30, 300, 8);
        let path = prune_path(&cart_fit(&data).unwrap());
        let trees = path.trees();
        for w in trees.windows(2) {
            assert!(w[1].leaf_count() < w[0].leaf_count());
            // every split of the smaller tree appears, at the same place, in the larger one
            fn contained(small: &Tree, big: &Tree, s: NodeId, b: NodeId) -> bool {
                match (small.node(s).kind, big.node(b).kind) {
                    (NodeKind::Leaf { .. }, _) => true,
                    (
                        NodeKind::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        },
                        NodeKind::Split {
                            feature: f2,
                            threshold: t2,
                            left: l2,
                            right: r2,
                        },
                    ) => {
                        feature == f2
                            && threshold == t2
                            && contained(small, big, left, l2)
                            && contained(small, big, right, r2)
                    }
                    _ => false,
                }
            }
            assert!(contained(&w[1], &w[0], 0, 0));
        }
        for i in 0..path.len() {
            let t = path.tree(i);
            for x in data.rows().take(50) {
                assert_eq!(path.predict_at(i, x), t.predict(x).unwrap());
            }
        }
    }

    #[test]
    fn chosen_subtree_minimizes_cost_complexity() {
        let data = toy_generate(30, 300, 21);
        let path = prune_path(&cart_fit(&data).unwrap());
        let total = data.len() as f64;
        let cost = |i: usize, a: f64| {
            training_errors(&path.tree(i), &data) as f64 / total + a * path.leaf_count(i) as f64
        };
        for &a in &path.candidate_alphas() {
            let chosen = path.index_at(a);
            for i in 0..path.len() {
                assert!(cost(chosen, a) <= cost(i, a) + 1e-12);
            }
        }
    }

    #[test]
    fn pruning_twice_is_stable() {
        let data = toy_generate(25, 250, 4);
        let t = cart_fit(&data).unwrap();
        let a = prune_path(&t);
        let b = prune_path(&a.tree(0));
        assert_eq!(a.alphas, b.alphas);
        assert_eq!(a.trees(), b.trees());
    }

    #[test]
    fn duplication_equals_integer_weights() {
        for seed in 0..5 {
            let data = toy_generate(6, 60, seed);
            let dup = duplicate_oversample(&data, 10, 0).unwrap();
            let weights: Vec<u32> = data
                .labels()
                .iter()
                .map(|&y| if y == 1 { 10 } else { 1 })
                .collect();
            let a = cart_fit(&dup).unwrap();
            let b = cart_fit_weighted(&data, &weights).unwrap();
            assert_eq!(a.nodes().len(), b.nodes().len());
            for (x, y) in a.nodes().iter().zip(b.nodes()) {
                assert_eq!(x.kind, y.kind);
                assert_eq!(x.stats.count0, y.stats.count0);
                assert_eq!(x.stats.count1, y.stats.count1);
            }
        }
    }

    #[test]
    fn single_candidate_is_returned() {
        let data = Dataset::from_rows(&[vec![0.1], vec![0.9]], vec![0, 0]).unwrap();
        let sel = select_pruned(&data, &[vec![0], vec![1]], &|d, _| Ok(d.clone())).unwrap();
        assert_eq!(sel.scores.len(), 1);
        assert_eq!(sel.alpha, 0.0);
    }

    #[test]
    fn selection_prefers_the_separating_subtree() {
        // minority on the right half with 20% label noise that deep splits memorize
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200u64 {
            let x = (i as f64 + 0.5) / 200.0;
            let h = crate::evaluation::derive_seed(9, &[i]);
            rows.push(vec![x, (h >> 11) as f64 / (1u64 << 53) as f64]);
            labels.push(u8::from((x > 0.5) != (h.is_multiple_of(5))));
        }
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let folds = crate::evaluation::stratified_folds(data.labels(), 5, 3).unwrap();
        let sel = select_pruned(&data, &folds, &|d, _| Ok(d.clone())).unwrap();
        let full = cart_fit(&data).unwrap();
        assert!(sel.tree.leaf_count() * 4 < full.leaf_count());
        match sel.tree.node(0).kind {
            NodeKind::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!((threshold - 0.5).abs() < 0.05);
            }
            _ => panic!("selected tree is a single leaf"),
        }
    }

    #[test]
    fn complement_of_sorted_indices() {
        assert_eq!(complement(6, &[1, 4]), vec![0, 2, 3, 5]);
        assert_eq!(complement(3, &[]), vec![0, 1, 2]);
    }
}
