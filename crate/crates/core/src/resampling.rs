//! Minority oversampling: duplication, SMOTE, Borderline-SMOTE1 and ADASYN.
//!
//! Every method returns the input rows unchanged and in order, followed by the
//! synthetic minority rows. Randomness comes from one ChaCha8 stream per
//! minority sample index, so the output does not depend on generation order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_io::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    Duplicate,
    Smote,
    #[serde(alias = "bsmote")]
    BorderlineSmote1,
    Adasyn,
}

impl ResampleMethod {
    pub const ALL: [ResampleMethod; 4] = [
        ResampleMethod::Duplicate,
        ResampleMethod::Smote,
        ResampleMethod::BorderlineSmote1,
        ResampleMethod::Adasyn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResampleMethod::Duplicate => "duplicate",
            ResampleMethod::Smote => "smote",
            ResampleMethod::BorderlineSmote1 => "bsmote",
            ResampleMethod::Adasyn => "adasyn",
        }
    }
}

impl fmt::Display for ResampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "duplicate" => Ok(Self::Duplicate),
            "smote" => Ok(Self::Smote),
            "bsmote" | "borderline_smote1" | "borderline-smote1" => Ok(Self::BorderlineSmote1),
            "adasyn" => Ok(Self::Adasyn),
            other => Err(Error::InvalidInput(format!(
                "unknown resampling method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleConfig {
    pub method: ResampleMethod,
    pub alpha: u32,
    pub k: usize,
    pub seed: u64,
}

impl ResampleConfig {
    pub fn new(method: ResampleMethod, alpha: u32, seed: u64) -> Self {
        Self {
            method,
            alpha,
            k: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha == 0 {
            return Err(Error::InvalidInput("alpha must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn resample(data: &Dataset, config: &ResampleConfig) -> Result<Dataset> {
    config.validate()?;
    let ResampleConfig { alpha, k, seed, .. } = *config;
    match config.method {
        ResampleMethod::Duplicate => duplicate_oversample(data, alpha, seed),
        ResampleMethod::Smote => smote(data, alpha, k, seed),
        ResampleMethod::BorderlineSmote1 => borderline_smote1(data, alpha, k, seed),
        ResampleMethod::Adasyn => adasyn(data, alpha, k, seed),
    }
}

/// Repeat every minority row so it appears `alpha` times.
pub fn duplicate_oversample(data: &Dataset, alpha: u32, _seed: u64) -> Result<Dataset> {
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be at least 1".into()));
    }
    let minority = minority_indices(data);
    let mut rows = Vec::with_capacity(minority.len() * (alpha as usize - 1) * data.dimension());
    for &i in &minority {
        for _ in 1..alpha {
            rows.extend_from_slice(data.row(i));
        }
    }
    let labels = vec![1u8; rows.len() / data.dimension()];
    Ok(data.with_appended(&rows, &labels))
}

/// `alpha - 1` interpolated points per minority sample.
pub fn smote(data: &Dataset, alpha: u32, k: usize, seed: u64) -> Result<Dataset> {
    check(alpha, k)?;
    let minority = minority_indices(data);
    if minority.len() < 2 {
        return duplicate_oversample(data, alpha, seed);
    }
    let counts: Vec<usize> = vec![alpha as usize - 1; minority.len()];
    Ok(synthesize(data, &minority, &minority, &counts, k, seed))
}

/// SMOTE restricted to minority samples whose neighbourhood is mostly, but not
/// entirely, majority.
pub fn borderline_smote1(data: &Dataset, alpha: u32, k: usize, seed: u64) -> Result<Dataset> {
    check(alpha, k)?;
    let minority = minority_indices(data);
    if minority.len() < 2 {
        return duplicate_oversample(data, alpha, seed);
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let danger: Vec<bool> = minority
        .iter()
        .map(|&i| {
            let majority = majority_neighbours(data, i, &all, k);
            2 * majority >= k && majority < k
        })
        .collect();
    let n_danger = danger.iter().filter(|&&d| d).count();
    if n_danger == 0 {
        return smote(data, alpha, k, seed);
    }
    let budget = (alpha as usize - 1) * minority.len();
    let (base, extra) = (budget / n_danger, budget % n_danger);
    let mut rank = 0;
    let counts: Vec<usize> = danger
        .iter()
        .map(|&d| {
            if !d {
                return 0;
            }
            rank += 1;
            base + usize::from(rank <= extra)
        })
        .collect();
    Ok(synthesize(data, &minority, &minority, &counts, k, seed))
}

/// `beta = alpha n1 / n0` and `G = round(beta (n0 - n1))` synthetic points,
/// allotted in proportion to the majority share of each sample's neighbourhood.
pub fn adasyn(data: &Dataset, alpha: u32, k: usize, seed: u64) -> Result<Dataset> {
    check(alpha, k)?;
    let minority = minority_indices(data);
    let (n0, n1) = (data.n0(), data.n1());
    if n1 == 0 || n0 == 0 {
        return Err(if n1 == 0 {
            Error::NoMinority
        } else {
            Error::InvalidInput("adasyn needs majority samples".into())
        });
    }
    let total = adasyn_budget(n0, n1, alpha);
    let all: Vec<usize> = (0..data.len()).collect();
    let ratios: Vec<f64> = minority
        .iter()
        .map(|&i| majority_neighbours(data, i, &all, k) as f64 / k as f64)
        .collect();
    let counts = largest_remainder(&ratios, total);
    Ok(synthesize(data, &minority, &minority, &counts, k, seed))
}

/// Number of synthetic points ADASYN generates.
pub fn adasyn_budget(n0: usize, n1: usize, alpha: u32) -> usize {
    let beta = alpha as f64 * n1 as f64 / n0 as f64;
    (beta * (n0 as f64 - n1 as f64)).round().max(0.0) as usize
}

/// Split `total` in proportion to `weights` (uniformly if they sum to 0);
/// leftover units go to the largest fractional parts, ties to lower index.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / weights.len() as f64; weights.len()]
    };
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn check(alpha: u32, k: usize) -> Result<()> {
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok(())
}

fn minority_indices(data: &Dataset) -> Vec<usize> {
    (0..data.len()).filter(|&i| data.label(i) == 1).collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest members of `pool` to sample `query` (itself excluded),
/// nearest first with ties broken by index.
pub fn nearest_neighbors(data: &Dataset, query: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let x = data.row(query);
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&i| i != query)
        .map(|&i| (squared_distance(x, data.row(i)), i))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    scored.into_iter().map(|(_, i)| i).collect()
}

fn majority_neighbours(data: &Dataset, i: usize, pool: &[usize], k: usize) -> usize {
    nearest_neighbors(data, i, pool, k)
        .into_iter()
        .filter(|&j| data.label(j) == 0)
        .count()
}

/// RNG for the synthetic points of one source sample.
fn sample_stream(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

/// `counts[s]` points on segments from `sources[s]` towards its nearest
/// members of `pool`, cycling through them nearest-first.
fn synthesize(
    data: &Dataset,
    sources: &[usize],
    pool: &[usize],
    counts: &[usize],
    k: usize,
    seed: u64,
) -> Dataset {
    let d = data.dimension();
    let mut rows = Vec::with_capacity(counts.iter().sum::<usize>() * d);
    for (&i, &count) in sources.iter().zip(counts) {
        if count == 0 {
            continue;
        }
        let neighbours = nearest_neighbors(data, i, pool, k);
        let mut rng = sample_stream(seed, i);
        let x = data.row(i);
        for r in 0..count {
            let u: f64 = rng.gen();
            match neighbours.get(r % neighbours.len().max(1)) {
                Some(&nn) => {
                    let y = data.row(nn);
                    rows.extend(
                        x.iter()
                            .zip(y)
                            .map(|(a, b)| (a + u * (b - a)).clamp(0.0, 1.0)),
                    );
                }
                None => rows.extend_from_slice(x),
            }
        }
    }
    let labels = vec![1u8; rows.len() / d];
    data.with_appended(&rows, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::toy_generate;

    fn on_segment(p: &[f64], a: &[f64], b: &[f64]) -> bool {
        // p = a + u (b - a) for a common u in [0, 1]
        let mut u: Option<f64> = None;
        for j in 0..p.len() {
            let span = b[j] - a[j];
            if span.abs() < 1e-12 {
                if (p[j] - a[j]).abs() > 1e-12 {
                    return false;
                }
                continue;
            }
            let t = (p[j] - a[j]) / span;
            if !(-1e-9..=1.0 + 1e-9).contains(&t) {
                return false;
            }
            if let Some(v) = u {
                if (v - t).abs() > 1e-9 {
                    return false;
                }
            }
            u = Some(t);
        }
        true
    }

    #[test]
    fn duplicate_counts() {
        let data = toy_generate(5, 200, 1);
        let out = duplicate_oversample(&data, 40, 0).unwrap();
        assert_eq!(out.n1(), 200);
        assert_eq!(out.n0(), 200);
        assert_eq!(duplicate_oversample(&data, 1, 0).unwrap(), data);
        for i in data.len()..out.len() {
            assert!((0..data.len()).any(|j| data.label(j) == 1 && data.row(j) == out.row(i)));
        }
    }

    #[test]
    fn smote_points_are_on_minority_segments() {
        let data = toy_generate(8, 100, 3);
        let out = smote(&data, 6, 5, 11).unwrap();
        assert_eq!(out.n1(), 6 * 8);
        assert_eq!(&out.features()[..data.features().len()], data.features());
        let minority: Vec<usize> = (0..data.len()).filter(|&i| data.label(i) == 1).collect();
        for i in data.len()..out.len() {
            let p = out.row(i);
            assert!(minority
                .iter()
                .any(|&a| minority
                    .iter()
                    .any(|&b| on_segment(p, data.row(a), data.row(b)))));
        }
        assert_eq!(smote(&data, 1, 5, 11).unwrap(), data);
        assert_eq!(smote(&data, 6, 5, 11).unwrap(), out);
        assert_ne!(smote(&data, 6, 5, 12).unwrap(), out);
    }

    #[test]
    fn smote_with_one_minority_duplicates() {
        let data = toy_generate(1, 20, 3);
        let out = smote(&data, 4, 5, 0).unwrap();
        assert_eq!(out.n1(), 4);
    }

    #[test]
    fn borderline_falls_back_when_all_safe() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..6 {
            rows.push(vec![0.01 * i as f64, 0.0]);
            labels.push(1);
        }
        for i in 0..20 {
            rows.push(vec![0.9 + 0.005 * i as f64, 1.0]);
            labels.push(0);
        }
        let data = Dataset::from_rows(&rows, labels).unwrap();
        assert_eq!(
            borderline_smote1(&data, 3, 5, 7).unwrap(),
            smote(&data, 3, 5, 7).unwrap()
        );
    }

    #[test]
    fn borderline_uses_only_danger_points() {
        // minority 0 sits among majority (noise), 1..=3 are borderline, 4..=9 are safe
        let mut rows = vec![vec![0.9, 0.9]];
        let mut labels = vec![1u8];
        for i in 0..6 {
            rows.push(vec![0.9 + 0.01 * (i as f64 - 2.5), 0.91]);
            labels.push(0);
        }
        for i in 0..9 {
            rows.push(vec![0.1 + 0.02 * i as f64, 0.1]);
            labels.push(1);
        }
        for i in 0..3 {
            rows.push(vec![0.1 + 0.02 * i as f64, 0.12]);
            labels.push(0);
        }
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let out = borderline_smote1(&data, 3, 5, 1).unwrap();
        assert_eq!(out.n1(), 3 * data.n1());
    }

    #[test]
    fn adasyn_budget_example() {
        assert_eq!(adasyn_budget(200, 5, 40), 195);
        let data = toy_generate(5, 200, 9);
        let out = adasyn(&data, 40, 5, 2).unwrap();
        assert_eq!(out.len() - data.len(), 195);
    }

    #[test]
    fn largest_remainder_hits_total() {
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[0.0, 0.0], 3), vec![2, 1]);
        assert_eq!(largest_remainder(&[0.2, 0.6, 0.2], 5), vec![1, 3, 1]);
        assert_eq!(largest_remainder(&[], 5), Vec::<usize>::new());
    }

    #[test]
    fn neighbours_break_ties_by_index() {
        let rows = vec![vec![0.5], vec![0.25], vec![0.75], vec![0.5], vec![1.0]];
        let data = Dataset::from_rows(&rows, vec![1, 1, 1, 1, 1]).unwrap();
        let pool: Vec<usize> = (0..5).collect();
        assert_eq!(nearest_neighbors(&data, 0, &pool, 3), vec![3, 1, 2]);
        assert_eq!(nearest_neighbors(&data, 0, &pool, 10).len(), 4);
    }

    #[test]
    fn method_names_parse() {
        for m in ResampleMethod::ALL {
            assert_eq!(m.name().parse::<ResampleMethod>().unwrap(), m);
        }
        assert!("spider".parse::<ResampleMethod>().is_err());
    }
}
