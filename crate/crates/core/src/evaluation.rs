//! Metrics, stratified folds, the repeated nested cross-validation protocol
//! and report aggregation.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{complement, select_pruned};
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::induction::{fit, FitConfig};
use crate::resampling::{resample, ResampleConfig, ResampleMethod};
use crate::tree_core::{derive_class_weights, ClassWeights, Tree};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (1, _) => self.fn_ += 1,
            (_, 1) => self.fp += 1,
            _ => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn metrics(&self) -> MetricSet {
        metrics(self)
    }
}

pub fn confusion(truth: &[u8], predicted: &[u8]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in truth.iter().zip(predicted) {
        cm.record(y, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub tpr: f64,
    pub f_measure: f64,
    pub g_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Tpr,
    FMeasure,
    GMean,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Tpr,
        Metric::FMeasure,
        Metric::GMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Tpr => "tpr",
            Metric::FMeasure => "f_measure",
            Metric::GMean => "g_mean",
        }
    }

    fn heading(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::Precision => "Precision",
            Metric::Tpr => "TPR",
            Metric::FMeasure => "F-measure",
            Metric::GMean => "G-mean",
        }
    }
}

impl MetricSet {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Tpr => self.tpr,
            Metric::FMeasure => self.f_measure,
            Metric::GMean => self.g_mean,
        }
    }

    fn from_fn(f: impl Fn(Metric) -> f64) -> Self {
        Self {
            accuracy: f(Metric::Accuracy),
            precision: f(Metric::Precision),
            tpr: f(Metric::Tpr),
            f_measure: f(Metric::FMeasure),
            g_mean: f(Metric::GMean),
        }
    }
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Undefined ratios (no predicted or no actual positives) count as 0.
pub fn metrics(cm: &ConfusionMatrix) -> MetricSet {
    let accuracy = ratio_or_zero(cm.tp + cm.tn, cm.total());
    let precision = ratio_or_zero(cm.tp, cm.tp + cm.fp);
    let tpr = ratio_or_zero(cm.tp, cm.tp + cm.fn_);
    let tnr = ratio_or_zero(cm.tn, cm.tn + cm.fp);
    let f_measure = if precision + tpr > 0.0 {
        2.0 * precision * tpr / (precision + tpr)
    } else {
        0.0
    };
    MetricSet {
        accuracy,
        precision,
        tpr,
        f_measure,
        g_mean: (tpr * tnr).sqrt(),
    }
}

/// `k` folds with each class shuffled and dealt round-robin. Each fold's
/// indices are sorted.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one fold".into()));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[usize::from(y == 1)].push(i);
    }
    let min_class = by_class
        .iter()
        .map(Vec::len)
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(0);
    if k > 1 && k > min_class {
        return Err(Error::TooManyFolds {
            folds: k,
            min_class,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [1, 0] {
        let mut idx = by_class[class].clone();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Penalty multipliers `2^k 1e-3` for `k = 0..=10`.
pub fn lambda_multipliers() -> Vec<f64> {
    (0..=10).map(|k| (1u32 << k) as f64 * 1e-3).collect()
}

/// `2^k 1e-3 n^{-1/3}` for `k = 0..=10`.
pub fn lambda_grid(n: usize) -> Vec<f64> {
    let scale = (n.max(1) as f64).powf(-1.0 / 3.0);
    lambda_multipliers()
        .into_iter()
        .map(|m| m * scale)
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a path such as `(repetition, outer fold, inner fold)`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ splitmix64(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Svr,
    SvrSelect,
    /// Pruned CART without resampling.
    Cart,
    Duplicate,
    Smote,
    Bsmote,
    Adasyn,
}

impl Method {
    /// The six methods of the benchmark comparison.
    pub const BENCHMARK: [Method; 6] = [
        Method::Svr,
        Method::SvrSelect,
        Method::Duplicate,
        Method::Smote,
        Method::Bsmote,
        Method::Adasyn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Svr => "svr",
            Method::SvrSelect => "svr-select",
            Method::Cart => "cart",
            Method::Duplicate => "duplicate",
            Method::Smote => "smote",
            Method::Bsmote => "bsmote",
            Method::Adasyn => "adasyn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Svr => "SVR",
            Method::SvrSelect => "SVR-Select",
            Method::Cart => "CART",
            Method::Duplicate => "Duplicate",
            Method::Smote => "SMOTE",
            Method::Bsmote => "BSMOTE",
            Method::Adasyn => "ADASYN",
        }
    }

    pub fn resampler(self) -> Option<ResampleMethod> {
        match self {
            Method::Duplicate => Some(ResampleMethod::Duplicate),
            Method::Smote => Some(ResampleMethod::Smote),
            Method::Bsmote => Some(ResampleMethod::BorderlineSmote1),
            Method::Adasyn => Some(ResampleMethod::Adasyn),
            _ => None,
        }
    }

    pub fn is_svr(self) -> bool {
        matches!(self, Method::Svr | Method::SvrSelect)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "svr" => Ok(Method::Svr),
            "svr-select" => Ok(Method::SvrSelect),
            "cart" => Ok(Method::Cart),
            "duplicate" => Ok(Method::Duplicate),
            "smote" => Ok(Method::Smote),
            "bsmote" => Ok(Method::Bsmote),
            "adasyn" => Ok(Method::Adasyn),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub repetitions: usize,
    pub outer_folds: usize,
    pub inner_folds: usize,
    /// Penalty candidates as multiples of `n^{-1/3}`, `n` being the size of
    /// the training portion each tree is grown on.
    pub lambda_grid: Vec<f64>,
    /// Skip penalty selection and use this value for every SVR fit.
    pub fixed_lambda: Option<f64>,
    /// Neighbours for the SMOTE family.
    pub k: usize,
    pub c0: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            repetitions: 20,
            outer_folds: 3,
            inner_folds: 5,
            lambda_grid: lambda_multipliers(),
            fixed_lambda: None,
            k: 5,
            c0: 4.0,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidInput("need at least one repetition".into()));
        }
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return Err(Error::InvalidInput("fold counts must be at least 2".into()));
        }
        if self.lambda_grid.is_empty() && self.fixed_lambda.is_none() {
            return Err(Error::InvalidInput("empty penalty grid".into()));
        }
        Ok(())
    }
}

/// Pooled outcome of one repetition (all outer test folds together).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
    /// Tuning parameter chosen on each outer training split.
    pub selected: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub dataset: String,
    pub method: Method,
    pub mean: MetricSet,
    /// Sample standard deviation over repetitions divided by `sqrt(repetitions)`.
    pub stderr: MetricSet,
    pub repetitions: Vec<RepetitionResult>,
}

fn summarize(dataset: &str, method: Method, repetitions: Vec<RepetitionResult>) -> MethodResult {
    let r = repetitions.len() as f64;
    let mean =
        MetricSet::from_fn(|m| repetitions.iter().map(|x| x.metrics.get(m)).sum::<f64>() / r);
    let stderr = MetricSet::from_fn(|m| {
        if repetitions.len() < 2 {
            return 0.0;
        }
        let mu = mean.get(m);
        let var = repetitions
            .iter()
            .map(|x| (x.metrics.get(m) - mu).powi(2))
            .sum::<f64>()
            / (r - 1.0);
        (var / r).sqrt()
    });
    MethodResult {
        dataset: dataset.to_string(),
        method,
        mean,
        stderr,
        repetitions,
    }
}

/// A fitted classifier from one training split.
enum Fitted {
    Svr(Tree),
    Cart(Tree),
}

impl Fitted {
    fn tree(&self) -> &Tree {
        match self {
            Fitted::Svr(t) | Fitted::Cart(t) => t,
        }
    }
}

fn svr_fit(train: &Dataset, multiplier: f64, method: Method, cv: &CvConfig) -> Result<Tree> {
    let weights = class_weights_for(train)?;
    let lambda = cv
        .fixed_lambda
        .unwrap_or(multiplier * (train.len() as f64).powf(-1.0 / 3.0));
    let mut config =
        FitConfig::new(lambda, train.len()).with_feature_selection(method == Method::SvrSelect);
    config.c0 = cv.c0;
    fit(train, weights, config)
}

fn class_weights_for(data: &Dataset) -> Result<ClassWeights> {
    if data.n1() == 0 {
        ClassWeights::uniform(data.n0(), 0)
    } else {
        derive_class_weights(data.n0(), data.n1())
    }
}

fn inner_folds_for(train: &Dataset, cv: &CvConfig, seed: u64) -> Result<Vec<Vec<usize>>> {
    let min_class = train.n0().min(train.n1());
    let mut k = cv.inner_folds;
    if min_class < k {
        warn!(
            "{}: only {min_class} samples in the smaller class, using {} inner folds",
            train.name(),
            min_class.max(1)
        );
        k = min_class.max(1);
    }
    if k < 2 {
        return Ok(Vec::new());
    }
    stratified_folds(train.labels(), k, seed)
}

/// Tune on `train` by inner cross-validation and refit on all of it.
fn fit_selected(
    train: &Dataset,
    method: Method,
    cv: &CvConfig,
    seed: u64,
) -> Result<(Fitted, f64)> {
    let inner = inner_folds_for(train, cv, derive_seed(seed, &[1]))?;
    if method.is_svr() {
        if let Some(l) = cv.fixed_lambda {
            return Ok((Fitted::Svr(svr_fit(train, 0.0, method, cv)?), l));
        }
        let grid = &cv.lambda_grid;
        let mut pooled = vec![ConfusionMatrix::default(); grid.len()];
        if grid.len() > 1 {
            for validation in &inner {
                let fit_rows = complement(train.len(), validation);
                let sub = train.subset(&fit_rows);
                for (g, &m) in grid.iter().enumerate() {
                    let t = svr_fit(&sub, m, method, cv)?;
                    for &i in validation {
                        pooled[g].record(train.label(i), t.predict(train.row(i))?);
                    }
                }
            }
        }
        let mut best = 0;
        for g in 1..grid.len() {
            if pooled[g].metrics().f_measure > pooled[best].metrics().f_measure {
                best = g;
            }
        }
        let tree = svr_fit(train, grid[best], method, cv)?;
        return Ok((Fitted::Svr(tree), grid[best]));
    }
    let resampler = method.resampler();
    let k = cv.k;
    let prepare = move |d: &Dataset, stream: u64| -> Result<Dataset> {
        match resampler {
            None => Ok(d.clone()),
            Some(rm) => {
                let alpha = class_weights_for(d)?.alpha;
                let config = ResampleConfig {
                    method: rm,
                    alpha,
                    k,
                    seed: derive_seed(seed, &[2, stream]),
                };
                if d.n1() == 0 {
                    return Ok(d.clone());
                }
                resample(d, &config)
            }
        }
    };
    let sel = select_pruned(train, &inner, &prepare)?;
    Ok((Fitted::Cart(sel.tree), sel.alpha))
}

/// One repetition: outer folds from `(seed, repetition)` shared by all methods.
fn run_repetition(
    data: &Dataset,
    method: Method,
    cv: &CvConfig,
    rep: usize,
) -> Result<RepetitionResult> {
    let outer = stratified_folds(
        data.labels(),
        cv.outer_folds,
        derive_seed(cv.seed, &[rep as u64]),
    )?;
    let per_fold: Vec<(ConfusionMatrix, f64)> = outer
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train_rows = complement(data.len(), test);
            debug_assert!(train_rows.iter().all(|i| test.binary_search(i).is_err()));
            let train = data.subset(&train_rows);
            let seed = derive_seed(cv.seed, &[rep as u64, f as u64, method as u64]);
            let (model, selected) = fit_selected(&train, method, cv, seed)?;
            let mut cm = ConfusionMatrix::default();
            for &i in test {
                cm.record(data.label(i), model.tree().predict(data.row(i))?);
            }
            Ok((cm, selected))
        })
        .collect::<Result<_>>()?;
    let mut confusion = ConfusionMatrix::default();
    for (cm, _) in &per_fold {
        confusion.merge(cm);
    }
    Ok(RepetitionResult {
        repetition: rep,
        confusion,
        metrics: confusion.metrics(),
        selected: per_fold.iter().map(|p| p.1).collect(),
    })
}

/// Repeated nested cross-validation of one method on one dataset.
pub fn nested_cv(data: &Dataset, method: Method, cv: &CvConfig) -> Result<MethodResult> {
    cv.validate()?;
    if data.n1() < cv.outer_folds {
        return Err(Error::TooManyFolds {
            folds: cv.outer_folds,
            min_class: data.n1(),
        });
    }
    let reps: Vec<RepetitionResult> = (0..cv.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(data, method, cv, rep))
        .collect::<Result<_>>()?;
    Ok(summarize(data.name(), method, reps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: CvConfig,
    pub results: Vec<MethodResult>,
}

/// Ranks for `values` with 1 = largest and tied values sharing the mean rank.
pub fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Means rounded to the four printed decimals, so ties match the table.
fn printed(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

impl BenchmarkReport {
    pub fn new(config: CvConfig) -> Self {
        Self {
            config,
            results: Vec::new(),
        }
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.results {
            if !out.contains(&r.dataset) {
                out.push(r.dataset.clone());
            }
        }
        out
    }

    fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for r in &self.results {
            if !out.contains(&r.method) {
                out.push(r.method);
            }
        }
        out
    }

    /// `dataset,method,metric,mean,stderr` with four decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dataset,method,metric,mean,stderr\n");
        for r in &self.results {
            for m in Metric::ALL {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.4},{:.4}",
                    r.dataset,
                    r.method,
                    m.name(),
                    r.mean.get(m),
                    r.stderr.get(m)
                );
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Mean rank of every method per metric over the datasets where all
    /// methods were run.
    pub fn average_rankings(&self) -> BTreeMap<Method, MetricSet> {
        let methods = self.methods();
        let mut sums: BTreeMap<Method, [f64; 5]> = methods.iter().map(|&m| (m, [0.0; 5])).collect();
        let mut count = 0usize;
        for ds in self.datasets() {
            let rows: Vec<&MethodResult> = methods
                .iter()
                .filter_map(|&m| {
                    self.results
                        .iter()
                        .find(|r| r.dataset == ds && r.method == m)
                })
                .collect();
            if rows.len() != methods.len() {
                continue;
            }
            count += 1;
            for (k, metric) in Metric::ALL.iter().enumerate() {
                let values: Vec<f64> = rows.iter().map(|r| printed(r.mean.get(*metric))).collect();
                for (r, rank) in rows.iter().zip(rank_descending(&values)) {
                    sums.get_mut(&r.method).expect("method listed")[k] += rank;
                }
            }
        }
        let count = count.max(1) as f64;
        sums.into_iter()
            .map(|(m, s)| {
                let avg = MetricSet::from_fn(|metric| {
                    let k = Metric::ALL
                        .iter()
                        .position(|&x| x == metric)
                        .expect("metric listed");
                    s[k] / count
                });
                (m, avg)
            })
            .collect()
    }

    /// Plain-text table: `mean(stderr)` cells, best mean per dataset and
    /// metric marked with `*`, then the average rankings.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<12} {:<11}", "Dataset", "Method");
        for m in Metric::ALL {
            let _ = write!(s, " {:>16}", m.heading());
        }
        s.push('\n');
        for ds in self.datasets() {
            let rows: Vec<&MethodResult> =
                self.results.iter().filter(|r| r.dataset == ds).collect();
            let best: Vec<f64> = Metric::ALL
                .iter()
                .map(|&m| {
                    rows.iter()
                        .map(|r| printed(r.mean.get(m)))
                        .fold(f64::MIN, f64::max)
                })
                .collect();
            for (i, r) in rows.iter().enumerate() {
                let name = if i == 0 { ds.as_str() } else { "" };
                let _ = write!(s, "{:<12} {:<11}", name, r.method.label());
                for (k, &m) in Metric::ALL.iter().enumerate() {
                    let mark = if printed(r.mean.get(m)) == best[k] {
                        "*"
                    } else {
                        " "
                    };
                    let cell = format!("{:.4}({:.4}){mark}", r.mean.get(m), r.stderr.get(m));
                    let _ = write!(s, " {cell:>16}");
                }
                s.push('\n');
            }
        }
        let ranks = self.average_rankings();
        if !ranks.is_empty() {
            let _ = write!(s, "{:<12} {:<11}", "Avg. rank", "");
            s.push('\n');
            for (method, r) in ranks {
                let _ = write!(s, "{:<12} {:<11}", "", method.label());
                for m in Metric::ALL {
                    let _ = write!(s, " {:>16.2}", r.get(m));
                }
                s.push('\n');
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::toy_generate;
    use approx::assert_relative_eq;

    #[test]
    fn confusion_counts() {
        let truth: Vec<u8> = (0..100).map(|i| u8::from(i < 10)).collect();
        let cm = confusion(&truth, &truth).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (10, 90, 0, 0));
        let none = confusion(&truth, &[0; 100]).unwrap();
        assert_eq!((none.tp, none.fn_), (0, 10));
        assert!(confusion(&truth, &[0]).is_err());
    }

    #[test]
    fn metric_arithmetic() {
        let cm = ConfusionMatrix {
            tp: 50,
            fp: 10,
            fn_: 25,
            tn: 100,
        };
        let m = metrics(&cm);
        assert_relative_eq!(m.precision, 50.0 / 60.0);
        assert_relative_eq!(m.tpr, 50.0 / 75.0);
        assert!((m.precision - 0.8333).abs() < 5e-5);
        assert!((m.tpr - 0.6667).abs() < 5e-5);
        assert!((m.f_measure - 0.7407).abs() < 5e-5);
        assert!((m.g_mean - 0.7785).abs() < 5e-5);
        assert_relative_eq!(
            m.g_mean * m.g_mean,
            (50.0 / 75.0) * (100.0 / 110.0),
            epsilon = 1e-15
        );

        let majority = metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 30,
            tn: 70,
        });
        assert_eq!((majority.precision, majority.f_measure), (0.0, 0.0));
        let perfect = metrics(&ConfusionMatrix {
            tp: 3,
            fp: 0,
            fn_: 0,
            tn: 7,
        });
        assert_eq!(
            perfect,
            MetricSet {
                accuracy: 1.0,
                precision: 1.0,
                tpr: 1.0,
                f_measure: 1.0,
                g_mean: 1.0
            }
        );
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 11 == 0 && i < 99)).collect();
        assert_eq!(labels.iter().filter(|&&y| y == 1).count(), 9);
        let folds = stratified_folds(&labels, 3, 7).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| labels[i] == 1).count(), 3);
        }
        let mut maj: Vec<usize> = folds
            .iter()
            .map(|f| f.iter().filter(|&&i| labels[i] == 0).count())
            .collect();
        maj.sort_unstable();
        assert_eq!(maj, vec![30, 30, 31]);
        assert_eq!(stratified_folds(&labels, 3, 7).unwrap(), folds);
        assert_eq!(
            stratified_folds(&labels, 1, 7).unwrap(),
            vec![(0..100).collect::<Vec<_>>()]
        );
        assert!(stratified_folds(&labels, 10, 7).is_err());
    }

    #[test]
    fn penalty_grid() {
        let g = lambda_grid(1000);
        assert_eq!(g.len(), 11);
        assert_relative_eq!(g[0], 1e-4, epsilon = 1e-15);
        assert_relative_eq!(g[10], 1.024e-1, epsilon = 1e-14);
        assert!((lambda_grid(5404)[0] - 5.6985e-5).abs() < 1e-9);
        assert!(g.windows(2).all(|w| (w[1] / w[0] - 2.0).abs() < 1e-12));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(rank_descending(&[0.9, 0.8, 0.7]), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_descending(&[0.5, 0.5, 0.1]), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn seeds_differ_by_path() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
    }

    #[test]
    fn nested_cv_is_deterministic() {
        let data = toy_generate(15, 150, 2).with_name("toy");
        let cv = CvConfig {
            repetitions: 2,
            lambda_grid: vec![1e-3, 1e-2],
            seed: 5,
            ..CvConfig::default()
        };
        for method in [Method::Svr, Method::Smote] {
            let a = nested_cv(&data, method, &cv).unwrap();
            let b = nested_cv(&data, method, &cv).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.repetitions.len(), 2);
            for r in &a.repetitions {
                assert_eq!(r.confusion.total(), 165);
            }
            for m in Metric::ALL {
                assert!((0.0..=1.0).contains(&a.mean.get(m)));
                assert!(a.stderr.get(m) >= 0.0);
            }
        }
    }

    #[test]
    fn balanced_duplicate_matches_plain_cart() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64 * 0.377).fract(), (i as f64 * 0.123).fract()])
            .collect();
        let labels: Vec<u8> = (0..60)
            .map(|i| u8::from(rows[i][0] + 0.3 * rows[i][1] > 0.6))
            .collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        assert_eq!(derive_class_weights(data.n0(), data.n1()).unwrap().alpha, 1);
        let cv = CvConfig {
            repetitions: 2,
            ..CvConfig::default()
        };
        let a = nested_cv(&data, Method::Duplicate, &cv).unwrap();
        let b = nested_cv(&data, Method::Cart, &cv).unwrap();
        assert_eq!(a.repetitions, b.repetitions);
    }

    #[test]
    fn table_rankings_for_one_dataset() {
        let reference = [
            (Method::Svr, 0.7506),
            (Method::SvrSelect, 0.7528),
            (Method::Duplicate, 0.7522),
            (Method::Smote, 0.7601),
            (Method::Bsmote, 0.7552),
            (Method::Adasyn, 0.7612),
        ];
        let mut report = BenchmarkReport::new(CvConfig::default());
        for (method, f) in reference {
            let mean = MetricSet {
                f_measure: f,
                ..Default::default()
            };
            report.results.push(MethodResult {
                dataset: "phoneme".into(),
                method,
                mean,
                stderr: MetricSet::default(),
                repetitions: Vec::new(),
            });
        }
        let ranks = report.average_rankings();
        let f: Vec<f64> = reference.iter().map(|(m, _)| ranks[m].f_measure).collect();
        assert_eq!(f, vec![6.0, 4.0, 5.0, 2.0, 3.0, 1.0]);
        assert!(report.render_table().contains("0.7612(0.0000)*"));
        assert!(report
            .to_csv()
            .contains("phoneme,adasyn,f_measure,0.7612,0.0000"));
    }
}
