//! Breadth-first greedy growth of a tree minimizing the regularized risk,
//! with an optional gate against splitting on new features.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{ratio, union_surface_of, Hyperrectangle, LabelPair, NodeContacts};
use crate::tree_core::{
    node_impurity, risk, signed_node_impurity, ClassWeights, NodeId, NodeKind, NodeStats,
    RiskBreakdown, Tree,
};

/// A split must lower the risk by more than this to be accepted.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    pub max_leaves: usize,
    pub feature_selection: bool,
    pub c0: f64,
    /// Unused: induction has no randomness. Kept so configs round-trip.
    pub seed: u64,
}

impl FitConfig {
    /// `lambda` with the default leaf budget for `n` samples.
    pub fn new(lambda: f64, n: usize) -> Self {
        Self {
            lambda,
            max_leaves: default_max_leaves(n),
            feature_selection: false,
            c0: 4.0,
            seed: 0,
        }
    }

    pub fn with_feature_selection(mut self, on: bool) -> Self {
        self.feature_selection = on;
        self
    }

    pub fn with_max_leaves(mut self, max_leaves: usize) -> Self {
        self.max_leaves = max_leaves;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.max_leaves == 0 {
            return Err(Error::InvalidInput("max_leaves must be at least 1".into()));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "c0 must be positive, got {}",
                self.c0
            )));
        }
        Ok(())
    }
}

/// `floor(2 sqrt(n))`, at least 1.
pub fn default_max_leaves(n: usize) -> usize {
    ((2.0 * (n as f64).sqrt()).floor() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub left_label: u8,
    pub right_label: u8,
    pub risk: RiskBreakdown,
    /// Unsigned impurity decrease of the split (independent of the labels).
    pub impurity_decrease: f64,
    /// False when the feature gate rules the split out.
    pub admissible: bool,
    /// Surface and volume of the decision set after this split.
    pub surface: f64,
    pub volume: f64,
}

impl SplitCandidate {
    pub fn labels(&self) -> LabelPair {
        LabelPair {
            left: self.left_label,
            right: self.right_label,
        }
    }
}

/// Every candidate for one node together with the risk of leaving it alone.
#[derive(Debug, Clone)]
pub struct NodeScan {
    pub node: NodeId,
    pub unsplit: RiskBreakdown,
    /// Largest impurity decrease over splits on already used features.
    pub used_feature_decrease: f64,
    pub candidates: Vec<SplitCandidate>,
}

impl NodeScan {
    /// Candidate the greedy step would accept, if any.
    pub fn best(&self) -> Option<&SplitCandidate> {
        let mut best: Option<&SplitCandidate> = None;
        for c in self.candidates.iter().filter(|c| c.admissible) {
            if best.is_none_or(|b| c.risk.total < b.risk.total) {
                best = Some(c);
            }
        }
        best.filter(|b| accepts(b.risk.total, self.unsplit.total))
    }
}

fn accepts(candidate: f64, unsplit: f64) -> bool {
    candidate < unsplit - IMPROVEMENT_TOLERANCE
}

/// One dequeued node and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: NodeId,
    pub split: Option<SplitCandidate>,
    /// Risk of the whole tree after the step.
    pub risk: RiskBreakdown,
    pub leaf_count: usize,
}

/// Midpoint of two adjacent distinct values, never rounded up onto `b`.
pub fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// `mass(A) I(A) - mass(A1) I(A1) - mass(A2) I(A2)`.
pub fn impurity_decrease(parent: &NodeStats, left: &NodeStats, right: &NodeStats) -> f64 {
    parent.mass * node_impurity(parent)
        - left.mass * node_impurity(left)
        - right.mass * node_impurity(right)
}

/// Whether a split on a feature not used so far clears `delta_i0 + c0 * lambda`.
pub fn feature_gate(delta_i: f64, delta_i0: f64, c0: f64, lambda: f64) -> bool {
    delta_i >= delta_i0 + c0 * lambda
}

fn contribution(s: &NodeStats, label: u8) -> f64 {
    s.mass * signed_node_impurity(s, label)
}

/// Samples whose path from the root passes through `node`.
pub fn node_samples(tree: &Tree, node: NodeId, data: &Dataset) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| {
            let x = data.row(i);
            let mut id = 0;
            loop {
                if id == node {
                    return true;
                }
                match tree.node(id).kind {
                    NodeKind::Leaf { .. } => return false,
                    NodeKind::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => id = if x[feature] <= threshold { left } else { right },
                }
            }
        })
        .collect()
}

/// `(feature, threshold)` pairs at midpoints of consecutive distinct values
/// of the node's samples; empty when the node holds fewer than two.
pub fn candidate_splits(tree: &Tree, node: NodeId, data: &Dataset) -> Vec<(usize, f64)> {
    let samples = node_samples(tree, node, data);
    let mut out = Vec::new();
    if samples.len() < 2 {
        return out;
    }
    for j in 0..data.dimension() {
        let mut values: Vec<f64> = samples.iter().map(|&i| data.value(i, j)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        out.extend(values.windows(2).map(|w| (j, midpoint(w[0], w[1]))));
    }
    out
}

/// Risk of `tree` with leaf `node` split as given, computed from the surface
/// profile of the split feature instead of rebuilding the decision set.
pub fn evaluate_candidate(
    tree: &Tree,
    node: NodeId,
    feature: usize,
    threshold: f64,
    labels: LabelPair,
    data: &Dataset,
) -> Result<RiskBreakdown> {
    check_leaf(tree, node, feature)?;
    let others: Vec<Hyperrectangle> = minority_leaves_except(tree, node);
    let mut contacts = NodeContacts::new(&tree.node(node).region, &others, 0.0);
    contacts.set_others_surface(union_surface_of(&others));
    let surface = contacts.profile(feature, labels).eval(threshold);

    let counts = tree.leaf_counts(data)?;
    let alpha = tree.weights().alpha;
    let total = data.n0() as f64 + alpha as f64 * data.n1() as f64;
    let mut si = 0.0;
    let mut volume = 0.0;
    for id in tree.leaf_ids().filter(|&i| i != node) {
        let (c0, c1) = counts[id];
        let l = tree.node(id).label().unwrap_or(0);
        si += contribution(&NodeStats::from_counts(c0, c1, alpha, total), l);
        if l == 1 {
            volume += tree.node(id).region.volume();
        }
    }
    let (mut l0, mut l1, mut r0, mut r1) = (0u64, 0u64, 0u64, 0u64);
    for i in node_samples(tree, node, data) {
        let left = data.value(i, feature) <= threshold;
        match (left, data.label(i)) {
            (true, 1) => l1 += 1,
            (true, _) => l0 += 1,
            (false, 1) => r1 += 1,
            (false, _) => r0 += 1,
        }
    }
    let (lb, rb) = tree.node(node).region.split(feature, threshold);
    si += contribution(&NodeStats::from_counts(l0, l1, alpha, total), labels.left);
    si += contribution(&NodeStats::from_counts(r0, r1, alpha, total), labels.right);
    if labels.left == 1 {
        volume += lb.volume();
    }
    if labels.right == 1 {
        volume += rb.volume();
    }
    Ok(RiskBreakdown::new(
        si,
        ratio(surface, volume),
        tree.lambda(),
    ))
}

/// Risk of the split tree by copying it and recomputing everything.
pub fn evaluate_candidate_naive(
    tree: &Tree,
    node: NodeId,
    feature: usize,
    threshold: f64,
    labels: LabelPair,
    data: &Dataset,
) -> Result<RiskBreakdown> {
    check_leaf(tree, node, feature)?;
    let mut t = tree.clone();
    t.split_leaf(
        node,
        feature,
        threshold,
        (labels.left, labels.right),
        Default::default(),
    )?;
    risk(&t, data)
}

fn check_leaf(tree: &Tree, node: NodeId, feature: usize) -> Result<()> {
    if node >= tree.nodes().len() || !tree.node(node).is_leaf() {
        return Err(Error::InvalidInput(format!("node {node} is not a leaf")));
    }
    if feature >= tree.dimension() {
        return Err(Error::FeatureOutOfRange {
            feature,
            dimension: tree.dimension(),
        });
    }
    Ok(())
}

fn minority_leaves_except(tree: &Tree, node: NodeId) -> Vec<Hyperrectangle> {
    tree.leaf_ids()
        .filter(|&i| i != node && tree.node(i).label() == Some(1))
        .map(|i| tree.node(i).region.clone())
        .collect()
}

/// Incremental state of one fit: the tree, the queue of leaves still to be
/// examined and, for each queued leaf, its samples sorted along every feature.
pub struct Grower<'a> {
    data: &'a Dataset,
    config: FitConfig,
    tree: Tree,
    queue: VecDeque<NodeId>,
    sorted: Vec<Option<Vec<Vec<u32>>>>,
    used: Vec<bool>,
    /// Surface of the current decision set, carried from the accepted profiles.
    surface: f64,
    goes_left: Vec<bool>,
    trace: Vec<TraceStep>,
}

impl<'a> Grower<'a> {
    pub fn new(data: &'a Dataset, weights: ClassWeights, config: FitConfig) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::InvalidInput("cannot fit on an empty dataset".into()));
        }
        if weights.n0 != data.n0() || weights.n1 != data.n1() {
            return Err(Error::InvalidInput(format!(
                "class weights are for {}/{} samples, data has {}/{}",
                weights.n0,
                weights.n1,
                data.n0(),
                data.n1()
            )));
        }
        let d = data.dimension();
        let root_stats = weights.stats(data.n0() as u64, data.n1() as u64);
        let tree = Tree::single_leaf(d, root_stats.dominant_label(), weights, config.lambda);
        let surface = if root_stats.dominant_label() == 1 {
            tree.node(0).region.surface()
        } else {
            0.0
        };
        let n = u32::try_from(data.len())
            .map_err(|_| Error::InvalidInput("too many samples".into()))?;
        let lists = (0..d)
            .map(|j| {
                let mut order: Vec<u32> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    data.value(a as usize, j)
                        .total_cmp(&data.value(b as usize, j))
                });
                order
            })
            .collect();
        let mut g = Self {
            data,
            config,
            tree,
            queue: VecDeque::from([0]),
            sorted: vec![Some(lists)],
            used: vec![false; d],
            surface,
            goes_left: vec![false; data.len()],
            trace: Vec::new(),
        };
        let r = g.current_risk();
        g.trace.push(TraceStep {
            node: 0,
            split: None,
            risk: r,
            leaf_count: 1,
        });
        Ok(g)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    /// Leaves waiting in the queue, front first.
    pub fn queued(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.queue.iter().copied()
    }

    /// Initial state followed by one entry per processed node.
    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.queue.is_empty() || self.tree.leaf_count() >= self.config.max_leaves
    }

    pub fn current_risk(&self) -> RiskBreakdown {
        let mut si = 0.0;
        let mut volume = 0.0;
        for id in self.tree.leaf_ids() {
            let n = self.tree.node(id);
            let l = n.label().unwrap_or(0);
            si += contribution(&n.stats, l);
            if l == 1 {
                volume += n.region.volume();
            }
        }
        RiskBreakdown::new(si, ratio(self.surface, volume), self.config.lambda)
    }

    /// Process the next queued leaf. Returns `None` once growth has stopped.
    pub fn step(&mut self) -> Option<&TraceStep> {
        if self.is_done() {
            return None;
        }
        let node = self.queue.pop_front()?;
        let mut best: Option<SplitCandidate> = None;
        let unsplit = self.visit(node, |c| {
            if c.admissible && best.is_none_or(|b| c.risk.total < b.risk.total) {
                best = Some(*c);
            }
        });
        let accepted = best.filter(|b| accepts(b.risk.total, unsplit.total));
        match accepted {
            Some(c) => self.apply(node, &c),
            None => {
                self.tree.node_mut(node).complete = true;
                self.sorted[node] = None;
            }
        }
        let r = self.current_risk();
        self.trace.push(TraceStep {
            node,
            split: accepted,
            risk: r,
            leaf_count: self.tree.leaf_count(),
        });
        self.trace.last()
    }

    pub fn run(&mut self) {
        while self.step().is_some() {}
    }

    pub fn finish(mut self) -> Tree {
        self.run();
        self.tree
    }

    pub fn into_parts(mut self) -> (Tree, Vec<TraceStep>) {
        self.run();
        (self.tree, self.trace)
    }

    /// All candidates for a queued leaf, in tie-break order.
    pub fn scan(&self, node: NodeId) -> Result<NodeScan> {
        if self.sorted.get(node).is_none_or(Option::is_none) {
            return Err(Error::InvalidInput(format!("node {node} is not queued")));
        }
        let mut candidates = Vec::new();
        let mut used_decrease = 0.0;
        let unsplit = self.visit_inner(node, &mut |c| candidates.push(*c), &mut used_decrease);
        Ok(NodeScan {
            node,
            unsplit,
            used_feature_decrease: used_decrease,
            candidates,
        })
    }

    fn visit(&self, node: NodeId, on_candidate: impl FnMut(&SplitCandidate)) -> RiskBreakdown {
        let mut f = on_candidate;
        let mut used = 0.0;
        self.visit_inner(node, &mut f, &mut used)
    }

    /// Feeds every candidate split of `node` to `on_candidate` in tie-break
    /// order and returns the risk of leaving the node as is.
    fn visit_inner(
        &self,
        node: NodeId,
        on_candidate: &mut dyn FnMut(&SplitCandidate),
        used_decrease: &mut f64,
    ) -> RiskBreakdown {
        let data = self.data;
        let tree = &self.tree;
        let lambda = self.config.lambda;
        let weights = *tree.weights();
        let target = tree.node(node);
        let label = target.label().unwrap_or(0);
        let lists = self.sorted[node]
            .as_ref()
            .expect("queued node has sample lists");

        let mut others = Vec::new();
        let mut si_others = 0.0;
        let mut volume_others = 0.0;
        for id in tree.leaf_ids() {
            if id == node {
                continue;
            }
            let n = tree.node(id);
            let l = n.label().unwrap_or(0);
            si_others += contribution(&n.stats, l);
            if l == 1 {
                volume_others += n.region.volume();
                others.push(n.region.clone());
            }
        }
        let mut contacts = NodeContacts::new(&target.region, &others, 0.0);
        let surface_others = if others.is_empty() {
            0.0
        } else if label == 1 {
            self.surface - target.region.surface() + 2.0 * contacts.total_contact()
        } else {
            self.surface
        };
        contacts.set_others_surface(surface_others);

        let unsplit = {
            let si = si_others + contribution(&target.stats, label);
            let v = if label == 1 {
                volume_others + target.region.volume()
            } else {
                volume_others
            };
            RiskBreakdown::new(si, ratio(self.surface, v), lambda)
        };

        let count = lists[0].len();
        if count < 2 {
            return unsplit;
        }
        let (c0, c1) = (target.stats.count0, target.stats.count1);

        // Boundaries of every feature: (threshold, left class counts).
        let boundaries: Vec<Vec<(f64, u64, u64)>> = lists
            .iter()
            .enumerate()
            .map(|(j, order)| {
                let mut out = Vec::new();
                let (mut l0, mut l1) = (0u64, 0u64);
                for w in order.windows(2) {
                    let i = w[0] as usize;
                    if data.label(i) == 1 {
                        l1 += 1;
                    } else {
                        l0 += 1;
                    }
                    let a = data.value(i, j);
                    let b = data.value(w[1] as usize, j);
                    if a < b {
                        out.push((midpoint(a, b), l0, l1));
                    }
                }
                out
            })
            .collect();

        let decrease = |l0: u64, l1: u64| {
            impurity_decrease(
                &target.stats,
                &weights.stats(l0, l1),
                &weights.stats(c0 - l0, c1 - l1),
            )
        };
        *used_decrease = 0.0;
        if self.config.feature_selection {
            for (j, bs) in boundaries.iter().enumerate() {
                if self.used[j] {
                    for &(_, l0, l1) in bs {
                        *used_decrease = f64::max(*used_decrease, decrease(l0, l1));
                    }
                }
            }
        }

        let region = &target.region;
        let d = region.dimension();
        for (j, bs) in boundaries.iter().enumerate() {
            if bs.is_empty() {
                continue;
            }
            let thresholds: Vec<f64> = bs.iter().map(|b| b.0).collect();
            let surfaces: Vec<Vec<f64>> = LabelPair::ALL
                .iter()
                .map(|&lp| contacts.profile(j, lp).eval_sorted(&thresholds))
                .collect();
            let (lo, hi) = (region.lower()[j], region.upper()[j]);
            for (k, &(t, l0, l1)) in bs.iter().enumerate() {
                let left = weights.stats(l0, l1);
                let right = weights.stats(c0 - l0, c1 - l1);
                let delta = impurity_decrease(&target.stats, &left, &right);
                let admissible = !self.config.feature_selection
                    || self.used[j]
                    || feature_gate(delta, *used_decrease, self.config.c0, lambda);
                let lv = width_product(region, j, t - lo, d);
                let rv = width_product(region, j, hi - t, d);
                for (p, &lp) in LabelPair::ALL.iter().enumerate() {
                    let si =
                        si_others + contribution(&left, lp.left) + contribution(&right, lp.right);
                    let mut v = volume_others;
                    if lp.left == 1 {
                        v += lv;
                    }
                    if lp.right == 1 {
                        v += rv;
                    }
                    let s = surfaces[p][k];
                    on_candidate(&SplitCandidate {
                        feature: j,
                        threshold: t,
                        left_label: lp.left,
                        right_label: lp.right,
                        risk: RiskBreakdown::new(si, ratio(s, v), lambda),
                        impurity_decrease: delta,
                        admissible,
                        surface: s,
                        volume: v,
                    });
                }
            }
        }
        unsplit
    }

    fn apply(&mut self, node: NodeId, c: &SplitCandidate) {
        let lists = self.sorted[node]
            .take()
            .expect("queued node has sample lists");
        let data = self.data;
        let (j, t) = (c.feature, c.threshold);
        let (mut l0, mut l1) = (0u64, 0u64);
        for &i in &lists[0] {
            let left = data.value(i as usize, j) <= t;
            self.goes_left[i as usize] = left;
            if left {
                if data.label(i as usize) == 1 {
                    l1 += 1;
                } else {
                    l0 += 1;
                }
            }
        }
        let parent = self.tree.node(node).stats;
        let weights = *self.tree.weights();
        let stats = (
            weights.stats(l0, l1),
            weights.stats(parent.count0 - l0, parent.count1 - l1),
        );
        let (left, right) = self
            .tree
            .split_leaf(node, j, t, (c.left_label, c.right_label), stats)
            .expect("candidate comes from a queued leaf");
        let (mut ll, mut rl) = (
            Vec::with_capacity(lists.len()),
            Vec::with_capacity(lists.len()),
        );
        for order in lists {
            let (a, b): (Vec<u32>, Vec<u32>) =
                order.into_iter().partition(|&i| self.goes_left[i as usize]);
            ll.push(a);
            rl.push(b);
        }
        self.sorted.resize(self.tree.nodes().len(), None);
        self.sorted[left] = Some(ll);
        self.sorted[right] = Some(rl);
        self.queue.push_back(left);
        self.queue.push_back(right);
        self.used[j] = true;
        self.surface = c.surface;
    }
}

/// Volume of `region` with its width along `axis` replaced by `width`.
fn width_product(region: &Hyperrectangle, axis: usize, width: f64, d: usize) -> f64 {
    (0..d)
        .map(|k| if k == axis { width } else { region.width(k) })
        .product()
}

/// Grow a tree on `data` under the given class weights.
pub fn fit(data: &Dataset, weights: ClassWeights, config: FitConfig) -> Result<Tree> {
    Ok(Grower::new(data, weights, config)?.finish())
}

/// Like [`fit`], also returning the per-step trace.
pub fn fit_with_trace(
    data: &Dataset,
    weights: ClassWeights,
    config: FitConfig,
) -> Result<(Tree, Vec<TraceStep>)> {
    Ok(Grower::new(data, weights, config)?.into_parts())
}

/// Features split on anywhere in the tree.
pub fn used_features(tree: &Tree) -> BTreeSet<usize> {
    tree.split_features()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::derive_class_weights;
    use approx::assert_relative_eq;

    fn line(values: &[f64], labels: &[u8]) -> Dataset {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(&rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn midpoints_of_distinct_values() {
        let data = line(&[0.8, 0.2, 0.4, 0.4], &[0, 1, 0, 1]);
        let t = Tree::single_leaf(1, 1, derive_class_weights(2, 2).unwrap(), 0.0);
        let c = candidate_splits(&t, 0, &data);
        assert_eq!(c.len(), 2);
        assert_relative_eq!(c[0].1, 0.3, epsilon = 1e-15);
        assert_relative_eq!(c[1].1, 0.6, epsilon = 1e-15);
        let same = line(&[0.5, 0.5], &[0, 1]);
        assert!(candidate_splits(&t, 0, &same).is_empty());
        assert_eq!(midpoint(1.0, f64::from_bits(1.0f64.to_bits() + 1)), 1.0);
    }

    #[test]
    fn gate_examples() {
        assert!(feature_gate(0.10, 0.08, 4.0, 0.004));
        assert!(!feature_gate(0.09, 0.08, 4.0, 0.004));
        assert!(feature_gate(0.2, 0.2, 4.0, 0.0));
    }

    #[test]
    fn decrease_of_perfect_split() {
        let parent = NodeStats::from_counts(2, 2, 1, 4.0);
        let l = NodeStats::from_counts(2, 0, 1, 4.0);
        let r = NodeStats::from_counts(0, 2, 1, 4.0);
        assert_eq!(impurity_decrease(&parent, &l, &r), 0.5);
        let same = NodeStats::from_counts(1, 1, 1, 4.0);
        assert_eq!(impurity_decrease(&parent, &same, &same), 0.0);
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let data = line(&[0.1, 0.5, 0.9], &[0, 0, 0]);
        let w = ClassWeights::uniform(3, 0).unwrap();
        let t = fit(&data, w, FitConfig::new(0.01, 3)).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.predict(&[0.3]).unwrap(), 0);
        assert_eq!(risk(&t, &data).unwrap().total, 0.0);
    }

    #[test]
    fn threshold_in_one_dimension() {
        let values: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let labels: Vec<u8> = values.iter().map(|&v| u8::from(v > 0.5)).collect();
        let data = line(&values, &labels);
        let w = derive_class_weights(50, 50).unwrap();
        let t = fit(&data, w, FitConfig::new(1e-4, 100)).unwrap();
        assert_eq!(t.leaf_count(), 2);
        match t.node(0).kind {
            NodeKind::Split { threshold, .. } => {
                assert_relative_eq!(threshold, 0.5, epsilon = 1e-12)
            }
            _ => panic!("root not split"),
        }
        assert_eq!(
            crate::tree_core::tree_signed_impurity(&t, &data).unwrap(),
            0.0
        );
    }

    #[test]
    fn fast_and_naive_agree_along_a_fit() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 7) % 40) as f64 / 40.0, ((i * 13) % 40) as f64 / 40.0])
            .collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] > 0.4 && r[1] < 0.7))
            .collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let w = derive_class_weights(data.n0(), data.n1()).unwrap();
        let mut g = Grower::new(&data, w, FitConfig::new(0.01, 40)).unwrap();
        while !g.is_done() {
            let node = g.queued().next().unwrap();
            let scan = g.scan(node).unwrap();
            let naive_unsplit = risk(g.tree(), &data).unwrap();
            assert!((scan.unsplit.total - naive_unsplit.total).abs() < 1e-9);
            for c in &scan.candidates {
                let n = evaluate_candidate_naive(
                    g.tree(),
                    node,
                    c.feature,
                    c.threshold,
                    c.labels(),
                    &data,
                )
                .unwrap();
                let f =
                    evaluate_candidate(g.tree(), node, c.feature, c.threshold, c.labels(), &data)
                        .unwrap();
                assert!((c.risk.total - n.total).abs() < 1e-9, "{c:?} vs {n:?}");
                assert!((f.total - n.total).abs() < 1e-9);
            }
            g.step();
        }
        let steps = g.trace();
        let accepted: Vec<f64> = steps
            .iter()
            .filter(|s| s.split.is_some())
            .map(|s| s.risk.total)
            .collect();
        assert!(!accepted.is_empty());
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn respects_leaf_budget_and_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64 * 0.618).fract(), (i as f64 * 0.414).fract()])
            .collect();
        let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let w = derive_class_weights(data.n0(), data.n1()).unwrap();
        let cfg = FitConfig::new(0.0, 60).with_max_leaves(5);
        let a = fit(&data, w, cfg).unwrap();
        let b = fit(&data, w, cfg).unwrap();
        assert!(a.leaf_count() <= 5);
        assert_eq!(a, b);
        let vol: f64 = a.leaf_ids().map(|i| a.node(i).region.volume()).sum();
        assert_relative_eq!(vol, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_mismatched_weights() {
        let data = line(&[0.1, 0.9], &[0, 1]);
        let w = ClassWeights::uniform(5, 5).unwrap();
        assert!(fit(&data, w, FitConfig::new(0.0, 2)).is_err());
        let w = ClassWeights::uniform(1, 1).unwrap();
        assert!(fit(&data, w, FitConfig::new(-1.0, 2)).is_err());
    }
}
