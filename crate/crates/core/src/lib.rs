//! Classification trees for imbalanced binary data, regularized by the
//! surface-to-volume ratio of the minority decision set, together with the
//! oversampling and CART baselines and a nested cross-validation harness.

pub mod cart;
pub mod data_io;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod induction;
pub mod resampling;
pub mod tree_core;

pub use cart::{cart_fit, prune_path, PruneSequence};
pub use data_io::{Dataset, DatasetSpec, FeatureScaling};
pub use error::{Error, Result};
pub use evaluation::{BenchmarkReport, ConfusionMatrix, CvConfig, Method, MetricSet};
pub use geometry::{BoxUnion, Hyperrectangle, LabelPair, SurfaceProfile};
pub use induction::{fit, FitConfig, SplitCandidate};
pub use resampling::{ResampleConfig, ResampleMethod};
pub use tree_core::{ClassWeights, Model, NodeId, NodeKind, NodeStats, RiskBreakdown, Tree};
