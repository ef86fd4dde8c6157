//! Tree data model, the weighted empirical measure, Gini and signed impurity,
//! and the regularized risk `signed impurity + lambda * SVR`.

use std::collections::BTreeSet;
use std::io;

use serde::{Deserialize, Serialize};

use crate::data_io::{Dataset, FeatureScaling};
use crate::error::{Error, Result};
use crate::geometry::{BoxUnion, Hyperrectangle};

/// Minority up-weight and the normalizer making the training mass sum to 1.
///
/// A majority sample carries mass `w0 / n` and a minority sample `w0 * alpha / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub alpha: u32,
    pub w0: f64,
    pub n0: usize,
    pub n1: usize,
}

impl ClassWeights {
    pub fn new(alpha: u32, n0: usize, n1: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidInput("alpha must be at least 1".into()));
        }
        if n0 + n1 == 0 {
            return Err(Error::InvalidInput("no samples".into()));
        }
        let n = (n0 + n1) as f64;
        let total = n0 as f64 + alpha as f64 * n1 as f64;
        Ok(Self {
            alpha,
            w0: n / total,
            n0,
            n1,
        })
    }

    /// Unweighted measure (`alpha = 1`).
    pub fn uniform(n0: usize, n1: usize) -> Result<Self> {
        Self::new(1, n0, n1)
    }

    pub fn n(&self) -> usize {
        self.n0 + self.n1
    }

    /// `n0 + alpha * n1`: the denominator of every weighted mass.
    pub fn total_weight(&self) -> f64 {
        self.n0 as f64 + self.alpha as f64 * self.n1 as f64
    }

    /// Node statistics for class counts under this measure.
    pub fn stats(&self, count0: u64, count1: u64) -> NodeStats {
        NodeStats::from_counts(count0, count1, self.alpha, self.total_weight())
    }
}

/// Largest integer `alpha` with `alpha * n1 <= n0` (at least 1).
pub fn derive_class_weights(n0: usize, n1: usize) -> Result<ClassWeights> {
    if n1 == 0 {
        return Err(Error::NoMinority);
    }
    let alpha = (n0 / n1).max(1);
    let alpha =
        u32::try_from(alpha).map_err(|_| Error::InvalidInput("alpha overflows u32".into()))?;
    ClassWeights::new(alpha, n0, n1)
}

/// Class counts of a node together with its weighted mass and minority fraction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeStats {
    pub count0: u64,
    pub count1: u64,
    /// `P_n(A)`.
    pub mass: f64,
    /// Weighted minority fraction `eta_n(A)`.
    pub eta: f64,
    /// Impurity `2 eta (1 - eta)`, derived from integer counts.
    impurity: f64,
    /// Weighted dominant label, 1 on ties.
    dominant: u8,
}

impl NodeStats {
    pub fn from_counts(count0: u64, count1: u64, alpha: u32, total_weight: f64) -> Self {
        let w0 = count0 as f64;
        let w1 = alpha as f64 * count1 as f64;
        let weight = w0 + w1;
        if weight == 0.0 {
            return Self::default();
        }
        Self {
            count0,
            count1,
            mass: weight / total_weight,
            eta: w1 / weight,
            impurity: 2.0 * w0 * w1 / (weight * weight),
            dominant: u8::from(w1 >= w0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count0 == 0 && self.count1 == 0
    }

    pub fn dominant_label(&self) -> u8 {
        self.dominant
    }
}

/// Gini impurity `1 - p0^2 - p1^2` on the probability simplex.
pub fn gini(p0: f64, p1: f64) -> Result<f64> {
    if !(p0 >= 0.0 && p1 >= 0.0 && (p0 + p1 - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidProbability { p0, p1 });
    }
    Ok(1.0 - p0 * p0 - p1 * p1)
}

/// Gini impurity of a node under the weighted measure; 0 for an empty node.
pub fn node_impurity(s: &NodeStats) -> f64 {
    s.impurity
}

/// Impurity if `label` is the weighted dominant class, otherwise `1 - impurity`.
pub fn signed_node_impurity(s: &NodeStats, label: u8) -> f64 {
    if s.is_empty() {
        0.0
    } else if label == s.dominant {
        s.impurity
    } else {
        1.0 - s.impurity
    }
}

/// Node index into a tree's arena; the root is 0.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Leaf {
        label: u8,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: NodeId,
        right: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub region: Hyperrectangle,
    pub kind: NodeKind,
    pub stats: NodeStats,
    /// Set once split search has rejected every candidate for this leaf.
    pub complete: bool,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn label(&self) -> Option<u8> {
        match self.kind {
            NodeKind::Leaf { label } => Some(label),
            NodeKind::Split { .. } => None,
        }
    }
}

/// Binary axis-aligned classification tree over `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    dimension: usize,
    weights: ClassWeights,
    lambda: f64,
}

impl Tree {
    pub fn single_leaf(dimension: usize, label: u8, weights: ClassWeights, lambda: f64) -> Self {
        let stats = weights.stats(weights.n0 as u64, weights.n1 as u64);
        Self {
            nodes: vec![Node {
                region: Hyperrectangle::unit(dimension),
                kind: NodeKind::Leaf { label },
                stats,
                complete: false,
            }],
            dimension,
            weights,
            lambda,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn weights(&self) -> &ClassWeights {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    /// Leaf ids in arena order.
    pub fn leaf_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_leaf())
            .map(|(i, _)| i)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_ids().count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, id: NodeId) -> usize {
            match t.nodes[id].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Split { feature, .. } => Some(feature),
                NodeKind::Leaf { .. } => None,
            })
            .collect()
    }

    /// Turn leaf `id` into a split; returns the new `(left, right)` leaves.
    pub fn split_leaf(
        &mut self,
        id: NodeId,
        feature: usize,
        threshold: f64,
        labels: (u8, u8),
        stats: (NodeStats, NodeStats),
    ) -> Result<(NodeId, NodeId)> {
        if feature >= self.dimension {
            return Err(Error::FeatureOutOfRange {
                feature,
                dimension: self.dimension,
            });
        }
        if !self.nodes[id].is_leaf() {
            return Err(Error::InvalidInput(format!("node {id} is not a leaf")));
        }
        let (lr, rr) = self.nodes[id].region.split(feature, threshold);
        let left = self.nodes.len();
        let right = left + 1;
        self.nodes.push(Node {
            region: lr,
            kind: NodeKind::Leaf { label: labels.0 },
            stats: stats.0,
            complete: false,
        });
        self.nodes.push(Node {
            region: rr,
            kind: NodeKind::Leaf { label: labels.1 },
            stats: stats.1,
            complete: false,
        });
        self.nodes[id].kind = NodeKind::Split {
            feature,
            threshold,
            left,
            right,
        };
        Ok((left, right))
    }

    pub fn set_label(&mut self, id: NodeId, label: u8) {
        if let NodeKind::Leaf { label: l } = &mut self.nodes[id].kind {
            *l = label;
        }
    }

    /// Copy of the tree with every node in `collapse` turned into a leaf
    /// labelled `label_of(node)`; unreachable descendants are dropped and the
    /// arena renumbered in preorder.
    pub fn collapsed(&self, collapse: &BTreeSet<NodeId>, label_of: impl Fn(&Node) -> u8) -> Tree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, None::<(usize, bool)>)];
        while let Some((id, parent)) = stack.pop() {
            let src = &self.nodes[id];
            let new_id = nodes.len();
            let kind = match src.kind {
                NodeKind::Split { .. } if collapse.contains(&id) => NodeKind::Leaf {
                    label: label_of(src),
                },
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    stack.push((right, Some((new_id, false))));
                    stack.push((left, Some((new_id, true))));
                    NodeKind::Split {
                        feature,
                        threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    }
                }
                leaf => leaf,
            };
            nodes.push(Node {
                region: src.region.clone(),
                kind,
                stats: src.stats,
                complete: src.complete,
            });
            if let Some((p, is_left)) = parent {
                if let NodeKind::Split { left, right, .. } = &mut nodes[p].kind {
                    if is_left {
                        *left = new_id;
                    } else {
                        *right = new_id;
                    }
                }
            }
        }
        Tree {
            nodes,
            dimension: self.dimension,
            weights: self.weights,
            lambda: self.lambda,
        }
    }

    /// Leaf whose region contains `x`; thresholds route left.
    pub fn leaf_of(&self, x: &[f64]) -> NodeId {
        let mut id = 0;
        loop {
            match self.nodes[id].kind {
                NodeKind::Leaf { .. } => return id,
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        Ok(self.nodes[self.leaf_of(x)].label().unwrap_or(0))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<u8>> {
        if data.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: data.dimension(),
            });
        }
        Ok(data
            .rows()
            .map(|x| self.nodes[self.leaf_of(x)].label().unwrap_or(0))
            .collect())
    }

    /// Union of the minority-labelled leaf regions.
    pub fn decision_set(&self) -> BoxUnion {
        let boxes = self
            .leaf_ids()
            .filter(|&i| self.nodes[i].label() == Some(1))
            .map(|i| self.nodes[i].region.clone())
            .collect();
        BoxUnion::new_unchecked(self.dimension, boxes)
    }

    /// Per-leaf class counts of `data`, indexed by node id (zeros for internal nodes).
    pub fn leaf_counts(&self, data: &Dataset) -> Result<Vec<(u64, u64)>> {
        if data.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: data.dimension(),
            });
        }
        let mut counts = vec![(0u64, 0u64); self.nodes.len()];
        for (x, &y) in data.rows().zip(data.labels()) {
            let leaf = self.leaf_of(x);
            if y == 1 {
                counts[leaf].1 += 1;
            } else {
                counts[leaf].0 += 1;
            }
        }
        Ok(counts)
    }

    /// Recompute every node's statistics from `data` under the tree's `alpha`.
    pub fn refresh_stats(&mut self, data: &Dataset) -> Result<()> {
        let counts = self.leaf_counts(data)?;
        let total = data.n0() as f64 + self.weights.alpha as f64 * data.n1() as f64;
        fn fill(t: &mut Tree, id: NodeId, counts: &[(u64, u64)], total: f64) -> (u64, u64) {
            let (c0, c1) = match t.nodes[id].kind {
                NodeKind::Leaf { .. } => counts[id],
                NodeKind::Split { left, right, .. } => {
                    let a = fill(t, left, counts, total);
                    let b = fill(t, right, counts, total);
                    (a.0 + b.0, a.1 + b.1)
                }
            };
            let alpha = t.weights.alpha;
            t.nodes[id].stats = NodeStats::from_counts(c0, c1, alpha, total);
            (c0, c1)
        }
        fill(self, 0, &counts, total);
        Ok(())
    }
}

/// Signed impurity, SVR and their penalized sum for one tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBreakdown {
    pub signed_impurity: f64,
    pub svr: f64,
    pub lambda: f64,
    pub total: f64,
}

impl RiskBreakdown {
    pub fn new(signed_impurity: f64, svr: f64, lambda: f64) -> Self {
        Self {
            signed_impurity,
            svr,
            lambda,
            total: signed_impurity + lambda * svr,
        }
    }
}

/// `sum_leaves P_n(A) * signed impurity(A)` with leaf masses measured on `data`.
pub fn tree_signed_impurity(t: &Tree, data: &Dataset) -> Result<f64> {
    let counts = t.leaf_counts(data)?;
    let alpha = t.weights.alpha;
    let total = data.n0() as f64 + alpha as f64 * data.n1() as f64;
    Ok(t.leaf_ids()
        .map(|id| {
            let (c0, c1) = counts[id];
            let s = NodeStats::from_counts(c0, c1, alpha, total);
            s.mass * signed_node_impurity(&s, t.nodes[id].label().unwrap_or(0))
        })
        .sum())
}

/// Regularized risk of `t` on `data`.
pub fn risk(t: &Tree, data: &Dataset) -> Result<RiskBreakdown> {
    let si = tree_signed_impurity(t, data)?;
    Ok(RiskBreakdown::new(si, t.decision_set().svr(), t.lambda))
}

pub fn predict(t: &Tree, x: &[f64]) -> Result<u8> {
    t.predict(x)
}

// ---------------------------------------------------------------------------
// JSON model files
// ---------------------------------------------------------------------------

pub const MODEL_FORMAT: &str = "svrtree-model/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<JsonNode>,
        right: Box<JsonNode>,
    },
    Leaf {
        label: u8,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonModel {
    format: String,
    dimension: usize,
    lambda: f64,
    weights: ClassWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scaling: Option<Vec<FeatureScaling>>,
    root: JsonNode,
}

/// A fitted tree plus the preprocessing needed to apply it to raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub tree: Tree,
    pub feature_names: Option<Vec<String>>,
    pub scaling: Option<Vec<FeatureScaling>>,
}

impl Model {
    pub fn new(tree: Tree) -> Self {
        Self {
            tree,
            feature_names: None,
            scaling: None,
        }
    }

    /// Pretty JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        fn encode(t: &Tree, id: NodeId) -> JsonNode {
            match t.nodes[id].kind {
                NodeKind::Leaf { label } => JsonNode::Leaf { label },
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => JsonNode::Split {
                    feature,
                    threshold,
                    left: Box::new(encode(t, left)),
                    right: Box::new(encode(t, right)),
                },
            }
        }
        let doc = JsonModel {
            format: MODEL_FORMAT.to_string(),
            dimension: self.tree.dimension,
            lambda: self.tree.lambda,
            weights: self.tree.weights,
            feature_names: self.feature_names.clone(),
            scaling: self.scaling.clone(),
            root: encode(&self.tree, 0),
        };
        let mut buf = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::default());
        doc.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let doc = JsonModel::deserialize(&mut de)?;
        de.end()?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unsupported format {:?}", doc.format)));
        }
        if doc.dimension == 0 {
            return Err(Error::Model("dimension must be at least 1".into()));
        }
        let mut tree = Tree {
            nodes: vec![Node {
                region: Hyperrectangle::unit(doc.dimension),
                kind: NodeKind::Leaf { label: 0 },
                stats: NodeStats::default(),
                complete: false,
            }],
            dimension: doc.dimension,
            weights: doc.weights,
            lambda: doc.lambda,
        };
        // Breadth-first, so an induced tree gets back its original node ids.
        let mut queue = std::collections::VecDeque::from([(0usize, &doc.root)]);
        while let Some((id, node)) = queue.pop_front() {
            match node {
                JsonNode::Leaf { label } => {
                    if *label > 1 {
                        return Err(Error::Model(format!("leaf label {label} is not 0 or 1")));
                    }
                    tree.set_label(id, *label);
                }
                JsonNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::Model("non-finite threshold".into()));
                    }
                    let (l, r) = tree
                        .split_leaf(id, *feature, *threshold, (0, 0), Default::default())
                        .map_err(|e| Error::Model(e.to_string()))?;
                    queue.push_back((l, left));
                    queue.push_back((r, right));
                }
            }
        }
        if let Some(s) = &doc.scaling {
            if s.len() != doc.dimension {
                return Err(Error::Model("scaling length differs from dimension".into()));
            }
        }
        Ok(Self {
            tree,
            feature_names: doc.feature_names,
            scaling: doc.scaling,
        })
    }
}

/// Pretty-printing JSON formatter that writes floats as `{:.16e}`.
#[derive(Default)]
struct SignificantDigits {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
