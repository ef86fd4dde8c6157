//! Surface, volume and surface-to-volume ratio of rectilinear sets in `[0,1]^d`.
//!
//! Decision sets of a tree are finite unions of leaf boxes whose interiors are
//! pairwise disjoint, so the union volume is the plain sum of box volumes and
//! the union surface is the sum of box surfaces minus twice every shared face
//! piece. Faces lying on the boundary of the unit cube count toward the
//! surface: the full cube `[0,1]^2` has surface 4 and ratio 4.
//!
//! [`SurfaceProfile`] is the fast path used during split search: for a fixed
//! node box and feature it gives the union surface as a piecewise-linear
//! function of the split threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise intersection volume above which two boxes are considered overlapping.
pub const OVERLAP_TOLERANCE: f64 = 1e-12;

/// A closed axis-aligned box inside the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Hyperrectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidBox("dimension must be at least 1".into()));
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 || hi > 1.0 {
                return Err(Error::InvalidBox(format!(
                    "axis {j}: [{lo}, {hi}] is not a subinterval of [0, 1]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole sample space `[0,1]^d`.
    pub fn unit(dimension: usize) -> Self {
        Self {
            lower: vec![0.0; dimension],
            upper: vec![1.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    fn widths(&self) -> Vec<f64> {
        (0..self.dimension()).map(|j| self.width(j)).collect()
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> f64 {
        (0..self.dimension()).map(|j| self.width(j)).product()
    }

    /// `(d-1)`-dimensional measure of the boundary: `2 * sum_j prod_{k != j} w_k`.
    pub fn surface(&self) -> f64 {
        2.0 * products_excluding_one(&self.widths()).iter().sum::<f64>()
    }

    /// Closed containment test.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| lo <= x && x <= hi)
    }

    /// Cut the box at `x[feature] = threshold`, returning `(left, right)`.
    pub fn split(&self, feature: usize, threshold: f64) -> (Self, Self) {
        let mut left = self.clone();
        let mut right = self.clone();
        let t = threshold.clamp(self.lower[feature], self.upper[feature]);
        left.upper[feature] = t;
        right.lower[feature] = t;
        (left, right)
    }

    /// Length of the overlap of the two projections on `axis` (0 when disjoint).
    fn axis_overlap(&self, other: &Self, axis: usize) -> f64 {
        (self.upper[axis].min(other.upper[axis]) - self.lower[axis].max(other.lower[axis])).max(0.0)
    }

    pub fn intersection_volume(&self, other: &Self) -> f64 {
        (0..self.dimension())
            .map(|j| self.axis_overlap(other, j))
            .product()
    }
}

/// Volume of a single box.
pub fn box_volume(b: &Hyperrectangle) -> f64 {
    b.volume()
}

/// Surface of a single box.
pub fn box_surface(b: &Hyperrectangle) -> f64 {
    b.surface()
}

/// `out[j] = prod_{k != j} values[k]`, computed without division.
fn products_excluding_one(values: &[f64]) -> Vec<f64> {
    let d = values.len();
    let mut out = vec![1.0; d];
    let mut acc = 1.0;
    for j in 0..d {
        out[j] = acc;
        acc *= values[j];
    }
    acc = 1.0;
    for j in (0..d).rev() {
        out[j] *= acc;
        acc *= values[j];
    }
    out
}

/// Area of the face piece shared by two interior-disjoint boxes.
///
/// Nonzero only when the boxes touch along exactly one axis and their
/// projections on the remaining axes overlap with positive measure.
pub fn contact_area(a: &Hyperrectangle, b: &Hyperrectangle) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            actual: b.dimension(),
        });
    }
    Ok(contact_unchecked(a, b))
}

fn contact_unchecked(a: &Hyperrectangle, b: &Hyperrectangle) -> f64 {
    let d = a.dimension();
    let overlaps: Vec<f64> = (0..d).map(|k| a.axis_overlap(b, k)).collect();
    for axis in 0..d {
        if a.upper[axis] == b.lower[axis] || b.upper[axis] == a.lower[axis] {
            let area: f64 = (0..d).filter(|&k| k != axis).map(|k| overlaps[k]).product();
            if area > 0.0 {
                return area;
            }
        }
    }
    0.0
}

/// A finite union of interior-disjoint boxes of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxUnion {
    dimension: usize,
    boxes: Vec<Hyperrectangle>,
}

impl BoxUnion {
    /// Validates dimensions and pairwise interior-disjointness.
    pub fn new(dimension: usize, boxes: Vec<Hyperrectangle>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidBox("dimension must be at least 1".into()));
        }
        for b in &boxes {
            if b.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: b.dimension(),
                });
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let volume = boxes[i].intersection_volume(&boxes[j]);
                if volume > OVERLAP_TOLERANCE {
                    return Err(Error::OverlappingBoxes {
                        first: i,
                        second: j,
                        volume,
                    });
                }
            }
        }
        Ok(Self { dimension, boxes })
    }

    pub(crate) fn new_unchecked(dimension: usize, boxes: Vec<Hyperrectangle>) -> Self {
        Self { dimension, boxes }
    }

    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            boxes: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn boxes(&self) -> &[Hyperrectangle] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn surface(&self) -> f64 {
        union_surface_of(&self.boxes)
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(Hyperrectangle::volume).sum()
    }

    /// Surface over volume; 0 for an empty (or null) set.
    pub fn svr(&self) -> f64 {
        ratio(self.surface(), self.volume())
    }
}

pub(crate) fn union_surface_of(boxes: &[Hyperrectangle]) -> f64 {
    let mut total: f64 = boxes.iter().map(Hyperrectangle::surface).sum();
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            total -= 2.0 * contact_unchecked(&boxes[i], &boxes[j]);
        }
    }
    total
}

pub(crate) fn ratio(surface: f64, volume: f64) -> f64 {
    if volume > 0.0 {
        surface / volume
    } else {
        0.0
    }
}

pub fn union_surface(u: &BoxUnion) -> f64 {
    u.surface()
}

pub fn union_volume(u: &BoxUnion) -> f64 {
    u.volume()
}

pub fn svr(u: &BoxUnion) -> f64 {
    u.svr()
}

/// Volume of the symmetric difference between a union and one box.
pub fn symmetric_difference_volume(u: &BoxUnion, target: &Hyperrectangle) -> f64 {
    let shared: f64 = u
        .boxes()
        .iter()
        .map(|b| b.intersection_volume(target))
        .sum();
    u.volume() + target.volume() - 2.0 * shared
}

/// Rasterized surface estimate, exact when every face lies on the grid.
///
/// Cells are classified by whether their centre lies in some box. The result
/// counts faces separating inside from outside cells, plus inside cell faces on
/// the boundary of the unit cube, scaled by the face area `resolution^-(d-1)`.
pub fn grid_surface_oracle(u: &BoxUnion, resolution: usize) -> f64 {
    let d = u.dimension();
    let res = resolution.max(2);
    let cells = res.pow(d as u32);
    let mut inside = vec![false; cells];
    let mut strides = vec![1usize; d];
    for j in 1..d {
        strides[j] = strides[j - 1] * res;
    }
    let scale = res as f64;
    for b in u.boxes() {
        let mut ranges = Vec::with_capacity(d);
        for j in 0..d {
            // cell centre (i + 0.5) / res lies in [lo, hi]
            let first = (b.lower()[j] * scale - 0.5).ceil().max(0.0) as usize;
            let last = (b.upper()[j] * scale - 0.5).floor();
            if last < 0.0 || first as f64 > last {
                ranges.clear();
                break;
            }
            ranges.push((first, (last as usize).min(res - 1)));
        }
        if ranges.len() != d {
            continue;
        }
        let mut index: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        'cells: loop {
            let flat: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
            inside[flat] = true;
            for j in 0..d {
                if index[j] < ranges[j].1 {
                    index[j] += 1;
                    continue 'cells;
                }
                index[j] = ranges[j].0;
            }
            break;
        }
    }

    let mut faces: u64 = 0;
    for flat in 0..cells {
        for j in 0..d {
            let coord = (flat / strides[j]) % res;
            if coord == 0 && inside[flat] {
                faces += 1;
            }
            if coord + 1 == res {
                if inside[flat] {
                    faces += 1;
                }
            } else if inside[flat] != inside[flat + strides[j]] {
                faces += 1;
            }
        }
    }
    faces as f64 * (1.0 / scale).powi(d as i32 - 1)
}

/// Labels given to the two children of a split, `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelPair {
    pub left: u8,
    pub right: u8,
}

impl LabelPair {
    /// Evaluation and tie-break order: (0,1), (1,0), (0,0), (1,1).
    pub const ALL: [LabelPair; 4] = [
        LabelPair { left: 0, right: 1 },
        LabelPair { left: 1, right: 0 },
        LabelPair { left: 0, right: 0 },
        LabelPair { left: 1, right: 1 },
    ];
}

/// Union surface as a function of the split threshold on one feature.
///
/// Piecewise linear and continuous; `segments[i]` is `(slope, intercept)` on
/// the interval between `breakpoints[i-1]` and `breakpoints[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    pub feature: usize,
    pub labels: LabelPair,
    pub breakpoints: Vec<f64>,
    pub segments: Vec<(f64, f64)>,
}

impl SurfaceProfile {
    fn constant(feature: usize, labels: LabelPair, value: f64) -> Self {
        Self {
            feature,
            labels,
            breakpoints: Vec::new(),
            segments: vec![(0.0, value)],
        }
    }

    /// Build from `value(x) = intercept + slope*x + sum_{p < x} delta*(x - p)`.
    fn from_hinges(
        feature: usize,
        labels: LabelPair,
        slope: f64,
        intercept: f64,
        mut hinges: Vec<(f64, f64)>,
    ) -> Self {
        hinges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::new();
        let mut segments = vec![(slope, intercept)];
        let (mut s, mut c) = (slope, intercept);
        let mut i = 0;
        while i < hinges.len() {
            let p = hinges[i].0;
            while i < hinges.len() && hinges[i].0 == p {
                s += hinges[i].1;
                c -= hinges[i].1 * p;
                i += 1;
            }
            breakpoints.push(p);
            segments.push((s, c));
        }
        Self {
            feature,
            labels,
            breakpoints,
            segments,
        }
    }

    pub fn eval(&self, threshold: f64) -> f64 {
        let seg = self.breakpoints.partition_point(|&b| b < threshold);
        let (s, c) = self.segments[seg];
        s * threshold + c
    }

    /// Evaluate at nondecreasing thresholds with one sweep over the segments.
    pub fn eval_sorted(&self, thresholds: &[f64]) -> Vec<f64> {
        let mut seg = 0;
        thresholds
            .iter()
            .map(|&t| {
                while seg < self.breakpoints.len() && self.breakpoints[seg] < t {
                    seg += 1;
                }
                let (s, c) = self.segments[seg];
                s * t + c
            })
            .collect()
    }
}

/// How one existing minority box meets the node box.
#[derive(Debug, Clone)]
struct Contact {
    /// Touching axis.
    axis: usize,
    /// The box sits on the node's lower face along `axis` (else the upper face).
    at_lower: bool,
    /// `prod_{k != axis}` of projection overlaps: the contact area with the whole node.
    area: f64,
    /// `factors[j] = prod_{k not in {axis, j}}` of projection overlaps.
    factors: Vec<f64>,
    /// The box's extent on every axis.
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Contacts between a node box and the other minority leaves, computed once
/// per node in `O(m d)` and reused for every feature.
#[derive(Debug, Clone)]
pub(crate) struct NodeContacts {
    node: Hyperrectangle,
    others_surface: f64,
    contacts: Vec<Contact>,
    total_contact: f64,
}

impl NodeContacts {
    pub(crate) fn new(
        node: &Hyperrectangle,
        others: &[Hyperrectangle],
        others_surface: f64,
    ) -> Self {
        let d = node.dimension();
        let mut contacts = Vec::new();
        let mut total_contact = 0.0;
        for b in others {
            let overlaps: Vec<f64> = (0..d).map(|k| node.axis_overlap(b, k)).collect();
            let mut zero_axes = (0..d).filter(|&k| overlaps[k] <= 0.0);
            let axis = match (zero_axes.next(), zero_axes.next()) {
                (Some(axis), None) => axis,
                _ => continue,
            };
            let at_lower = b.upper[axis] == node.lower[axis];
            let at_upper = b.lower[axis] == node.upper[axis];
            if !(at_lower || at_upper) {
                continue;
            }
            let mut masked = overlaps.clone();
            masked[axis] = 1.0;
            let factors = products_excluding_one(&masked);
            let area = factors[axis];
            total_contact += area;
            contacts.push(Contact {
                axis,
                at_lower,
                area,
                factors,
                lower: b.lower.clone(),
                upper: b.upper.clone(),
            });
        }
        Self {
            node: node.clone(),
            others_surface,
            contacts,
            total_contact,
        }
    }

    /// Summed contact area between the node and the other boxes.
    pub(crate) fn total_contact(&self) -> f64 {
        self.total_contact
    }

    pub(crate) fn set_others_surface(&mut self, surface: f64) {
        self.others_surface = surface;
    }

    /// Union surface when both children keep the majority label.
    pub(crate) fn surface_none(&self) -> f64 {
        self.others_surface
    }

    /// Union surface when the whole node is minority.
    pub(crate) fn surface_whole(&self) -> f64 {
        self.others_surface + self.node.surface() - 2.0 * self.total_contact
    }

    pub(crate) fn profile(&self, feature: usize, labels: LabelPair) -> SurfaceProfile {
        match (labels.left, labels.right) {
            (0, 0) => SurfaceProfile::constant(feature, labels, self.surface_none()),
            (1, 1) => SurfaceProfile::constant(feature, labels, self.surface_whole()),
            (1, _) => self.child_profile(feature, labels, true),
            _ => self.child_profile(feature, labels, false),
        }
    }

    /// Profile when exactly one child (left if `left`) is minority.
    fn child_profile(&self, j: usize, labels: LabelPair, left: bool) -> SurfaceProfile {
        let node = &self.node;
        let (lo, hi) = (node.lower[j], node.upper[j]);
        let faces = products_excluding_one(&node.widths());
        // Surface of the child: 2 * (faces[j] + (extent along j) * lateral), with
        // lateral = sum_{i != j} prod_{k not in {i, j}} w_k.
        let mut masked = node.widths();
        masked[j] = 1.0;
        let lateral: f64 = products_excluding_one(&masked)
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, p)| p)
            .sum();
        let (slope, mut intercept) = if left {
            (2.0 * lateral, 2.0 * faces[j] - 2.0 * lateral * lo)
        } else {
            (-2.0 * lateral, 2.0 * faces[j] + 2.0 * lateral * hi)
        };
        intercept += self.others_surface;

        let mut hinges = Vec::new();
        for c in &self.contacts {
            if c.axis == j {
                if c.at_lower == left {
                    intercept -= 2.0 * c.area;
                }
                continue;
            }
            let q = c.factors[j];
            let a = lo.max(c.lower[j]);
            let b = hi.min(c.upper[j]);
            if q <= 0.0 || a >= b {
                continue;
            }
            if left {
                // overlap([lo, x], [a, b]) rises from 0 at a to b - a at b
                hinges.push((a, -2.0 * q));
                hinges.push((b, 2.0 * q));
            } else {
                // overlap([x, hi], [a, b]) falls from b - a at a to 0 at b
                intercept -= 2.0 * q * (b - a);
                hinges.push((a, 2.0 * q));
                hinges.push((b, -2.0 * q));
            }
        }
        SurfaceProfile::from_hinges(j, labels, slope, intercept, hinges)
    }
}

/// Union surface after splitting `node_box` on `feature`, for all four child
/// labelings (in [`LabelPair::ALL`] order).
///
/// `other_minority` holds the remaining minority leaves; `node_box` must be
/// interior-disjoint from each of them.
pub fn surface_profiles(
    node_box: &Hyperrectangle,
    other_minority: &BoxUnion,
    feature: usize,
) -> Result<Vec<SurfaceProfile>> {
    let d = node_box.dimension();
    if other_minority.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: other_minority.dimension(),
        });
    }
    if feature >= d {
        return Err(Error::FeatureOutOfRange {
            feature,
            dimension: d,
        });
    }
    for (i, b) in other_minority.boxes().iter().enumerate() {
        let volume = node_box.intersection_volume(b);
        if volume > OVERLAP_TOLERANCE {
            return Err(Error::OverlappingBoxes {
                first: i,
                second: other_minority.boxes().len(),
                volume,
            });
        }
    }
    let contacts = NodeContacts::new(node_box, other_minority.boxes(), other_minority.surface());
    Ok(LabelPair::ALL
        .iter()
        .map(|&labels| contacts.profile(feature, labels))
        .collect())
}
