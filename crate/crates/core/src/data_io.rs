//! Dataset ingestion: CSV and KEEL `.dat` files, min-max scaling to `[0,1]`,
//! class mapping (label 1 is always the minority class), and the synthetic
//! rectangle example.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Min-max scaling of one raw feature column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub min: f64,
    pub max: f64,
}

impl FeatureScaling {
    pub const IDENTITY: FeatureScaling = FeatureScaling { min: 0.0, max: 1.0 };

    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    /// Map a raw value into `[0,1]`; constant features map to 0.5.
    pub fn scale(&self, raw: f64) -> f64 {
        if self.is_constant() {
            0.5
        } else {
            ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        }
    }

    pub fn unscale(&self, scaled: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            self.min + scaled * (self.max - self.min)
        }
    }
}

/// Binary-labelled samples in `[0,1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dimension: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    scaling: Vec<FeatureScaling>,
}

impl Dataset {
    /// Build from already-scaled row-major features.
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        features: Vec<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput(
                "dataset needs at least one feature".into(),
            ));
        }
        if features.len() != labels.len() * dimension {
            return Err(Error::InvalidInput(format!(
                "{} feature values do not fill {} rows of dimension {dimension}",
                features.len(),
                labels.len()
            )));
        }
        if feature_names.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: feature_names.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidInput(format!("label {bad} is not 0 or 1")));
        }
        if let Some(pos) = features
            .iter()
            .position(|v| !(v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return Err(Error::InvalidInput(format!(
                "row {}, feature {}: value {} outside [0, 1]",
                pos / dimension,
                pos % dimension,
                features[pos]
            )));
        }
        Ok(Self {
            name: name.into(),
            dimension,
            features,
            labels,
            feature_names,
            scaling: vec![FeatureScaling::IDENTITY; dimension],
        })
    }

    /// Build from rows, naming features `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let dimension = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dimension) {
            return Err(Error::InvalidInput("rows have differing lengths".into()));
        }
        let names = (0..dimension).map(|j| format!("x{j}")).collect();
        Self::new("rows", dimension, rows.concat(), labels, names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dimension)
    }

    #[inline]
    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.dimension + feature]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn scaling(&self) -> &[FeatureScaling] {
        &self.scaling
    }

    /// Majority-class count.
    pub fn n0(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 0).count()
    }

    /// Minority-class count.
    pub fn n1(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dimension);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            ..self.clone_header()
        }
    }

    /// Append rows (already in `[0,1]`) to a copy of this dataset.
    pub fn with_appended(&self, rows: &[f64], labels: &[u8]) -> Self {
        debug_assert_eq!(rows.len(), labels.len() * self.dimension);
        let mut out = self.clone();
        out.features.extend_from_slice(rows);
        out.labels.extend_from_slice(labels);
        out
    }

    fn clone_header(&self) -> Self {
        Self {
            name: self.name.clone(),
            dimension: self.dimension,
            features: Vec::new(),
            labels: Vec::new(),
            feature_names: self.feature_names.clone(),
            scaling: self.scaling.clone(),
        }
    }

    /// Raw (unscaled) value of a stored feature.
    pub fn unscaled(&self, i: usize, feature: usize) -> f64 {
        self.scaling[feature].unscale(self.value(i, feature))
    }

    /// Write as CSV: header of feature names plus `class`, one row per sample.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("class");
        out.write_record(&header)?;
        for (row, &y) in self.rows().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(y.to_string());
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Keel,
    /// The synthetic rectangle example; no file is read.
    Toy,
}

/// Declarative description of a benchmark dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default)]
    pub path: PathBuf,
    pub format: DataFormat,
    #[serde(default)]
    pub positive_classes: Vec<String>,
    /// When nonempty, only these labels map to the majority class.
    #[serde(default)]
    pub negative_classes: Vec<String>,
    /// With `negative_classes` set, silently skip rows in neither list
    /// instead of failing.
    #[serde(default)]
    pub drop_other_classes: bool,
    /// Feature columns to remove, by name or zero-based index.
    #[serde(default)]
    pub dropped_columns: Vec<String>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_maj")]
    pub n_maj: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_min() -> usize {
    5
}

fn default_n_maj() -> usize {
    200
}

impl DatasetSpec {
    /// Read a TOML spec; a relative `path` is resolved against the spec's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut spec: DatasetSpec = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if spec.format != DataFormat::Toy && spec.path.is_relative() {
            if let Some(dir) = path.parent() {
                spec.path = dir.join(&spec.path);
            }
        }
        if spec.format != DataFormat::Toy && spec.positive_classes.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: "positive_classes must not be empty".into(),
            });
        }
        Ok(spec)
    }

    /// Spec for a bare data file; the format follows the extension.
    pub fn for_data_file(path: &Path, positive_classes: Vec<String>) -> Self {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("dat") => DataFormat::Keel,
            _ => DataFormat::Csv,
        };
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("data")
            .to_string();
        Self {
            name,
            path: path.to_path_buf(),
            format,
            positive_classes,
            negative_classes: Vec::new(),
            drop_other_classes: false,
            dropped_columns: Vec::new(),
            n_min: default_n_min(),
            n_maj: default_n_maj(),
            seed: 0,
        }
    }

    /// A spec describing the synthetic rectangle example.
    pub fn toy(n_min: usize, n_maj: usize, seed: u64) -> Self {
        Self {
            name: "toy".into(),
            path: PathBuf::new(),
            format: DataFormat::Toy,
            positive_classes: Vec::new(),
            negative_classes: Vec::new(),
            drop_other_classes: false,
            dropped_columns: Vec::new(),
            n_min,
            n_maj,
            seed,
        }
    }
}

/// Unscaled table as read from disk.
#[derive(Debug, Clone)]
struct RawTable {
    names: Vec<String>,
    rows: Vec<Vec<String>>,
    classes: Vec<String>,
}

fn read_csv(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "need at least one feature column and a class column".into(),
        });
    }
    let names = header
        .iter()
        .take(header.len() - 1)
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!(
                    "row {} has {} fields, expected {}",
                    rows.len() + 1,
                    record.len(),
                    header.len()
                ),
            });
        }
        let mut fields: Vec<String> = record.iter().map(String::from).collect();
        classes.push(fields.pop().unwrap_or_default());
        rows.push(fields);
    }
    Ok(RawTable {
        names,
        rows,
        classes,
    })
}

fn read_keel(path: &Path) -> Result<RawTable> {
    let text = fs::read_to_string(path)?;
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    let mut arity = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('@') {
            let mut words = directive.split_whitespace();
            if let Some(keyword) = words.next() {
                if keyword.eq_ignore_ascii_case("attribute") {
                    if let Some(name) = words.next() {
                        attributes.push(name.trim_matches('\'').to_string());
                    }
                }
            }
            continue;
        }
        let mut fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        let expected = *arity.get_or_insert(fields.len());
        if fields.len() != expected || expected < 2 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!(
                    "row {} has {} fields, expected {expected}",
                    rows.len() + 1,
                    fields.len()
                ),
            });
        }
        classes.push(fields.pop().unwrap_or_default());
        rows.push(fields);
    }
    let width = arity.map_or(0, |a| a - 1);
    let names = if attributes.len() == width + 1 {
        attributes.truncate(width);
        attributes
    } else {
        (0..width).map(|j| format!("x{j}")).collect()
    };
    Ok(RawTable {
        names,
        rows,
        classes,
    })
}

fn read_table(spec: &DatasetSpec) -> Result<RawTable> {
    match spec.format {
        DataFormat::Csv => read_csv(&spec.path),
        DataFormat::Keel => read_keel(&spec.path),
        DataFormat::Toy => Err(Error::InvalidInput("toy datasets have no file".into())),
    }
}

/// Parsed numeric features (unscaled) and 0/1 labels.
struct Parsed {
    names: Vec<String>,
    raw: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

fn parse(spec: &DatasetSpec, table: RawTable) -> Result<Parsed> {
    let path = &spec.path;
    let mut keep: Vec<usize> = Vec::new();
    for (j, name) in table.names.iter().enumerate() {
        let dropped = spec
            .dropped_columns
            .iter()
            .any(|c| c == name || c.parse::<usize>().ok() == Some(j));
        if !dropped {
            keep.push(j);
        }
    }
    let names: Vec<String> = keep.iter().map(|&j| table.names[j].clone()).collect();
    let mut raw = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    for (r, (fields, class)) in table.rows.iter().zip(&table.classes).enumerate() {
        let label = if spec.positive_classes.iter().any(|c| c == class) {
            1
        } else if spec.negative_classes.is_empty()
            || spec.negative_classes.iter().any(|c| c == class)
        {
            0
        } else if spec.drop_other_classes {
            continue;
        } else {
            return Err(Error::UnknownClass {
                path: path.clone(),
                row: r + 1,
                label: class.clone(),
            });
        };
        let mut values = Vec::with_capacity(keep.len());
        for &j in &keep {
            let cell = &fields[j];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.clone(),
                row: r + 1,
                column: j,
                value: cell.clone(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.clone(),
                    row: r + 1,
                    column: j,
                    value: cell.clone(),
                });
            }
            values.push(v);
        }
        raw.push(values);
        labels.push(label);
    }
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    if n1 * 2 > labels.len() {
        log::warn!(
            "{}: listed positive classes are the majority ({n1} of {}); swapping so label 1 stays the minority",
            spec.name,
            labels.len()
        );
        for y in &mut labels {
            *y = 1 - *y;
        }
    }
    if n1 == 0 {
        log::warn!("{}: no samples of the positive classes", spec.name);
    }
    Ok(Parsed { names, raw, labels })
}

fn assemble(name: &str, parsed: Parsed, scaling: Vec<FeatureScaling>) -> Result<Dataset> {
    let dimension = parsed.names.len();
    if scaling.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: scaling.len(),
            actual: dimension,
        });
    }
    let mut features = Vec::with_capacity(parsed.raw.len() * dimension);
    for row in &parsed.raw {
        features.extend(row.iter().zip(&scaling).map(|(&v, s)| s.scale(v)));
    }
    let mut ds = Dataset::new(name, dimension, features, parsed.labels, parsed.names)?;
    ds.scaling = scaling;
    Ok(ds)
}

/// Load a dataset and scale every feature to `[0,1]` using its own range.
pub fn load(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.format == DataFormat::Toy {
        return Ok(toy_generate(spec.n_min, spec.n_maj, spec.seed).with_name(&spec.name));
    }
    let parsed = parse(spec, read_table(spec)?)?;
    let dimension = parsed.names.len();
    let mut scaling = vec![
        FeatureScaling {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        dimension
    ];
    for row in &parsed.raw {
        for (s, &v) in scaling.iter_mut().zip(row) {
            s.min = s.min.min(v);
            s.max = s.max.max(v);
        }
    }
    for s in &mut scaling {
        if !s.min.is_finite() {
            *s = FeatureScaling::IDENTITY;
        }
    }
    assemble(&spec.name, parsed, scaling)
}

/// Load a dataset, scaling with a previously fitted range (values outside it
/// are clamped, which leaves tree predictions unchanged).
pub fn load_with_scaling(spec: &DatasetSpec, scaling: &[FeatureScaling]) -> Result<Dataset> {
    if spec.format == DataFormat::Toy {
        return Ok(toy_generate(spec.n_min, spec.n_maj, spec.seed).with_name(&spec.name));
    }
    let parsed = parse(spec, read_table(spec)?)?;
    assemble(&spec.name, parsed, scaling.to_vec())
}

/// Load without rescaling; values must already lie in `[0,1]`.
pub fn load_unscaled(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.format == DataFormat::Toy {
        return Ok(toy_generate(spec.n_min, spec.n_maj, spec.seed).with_name(&spec.name));
    }
    let parsed = parse(spec, read_table(spec)?)?;
    let dimension = parsed.names.len();
    let features = parsed.raw.concat();
    Dataset::new(&spec.name, dimension, features, parsed.labels, parsed.names)
}

/// Minority support of the synthetic example.
pub const TOY_MINORITY_BOX: ([f64; 2], [f64; 2]) = ([0.0, 0.25], [0.75, 0.75]);

/// Two-dimensional example: minority uniform on `[0,0.75]x[0.25,0.75]`,
/// majority uniform on the unit square. Minority rows come first.
pub fn toy_generate(n_min: usize, n_maj: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = TOY_MINORITY_BOX;
    let mut features = Vec::with_capacity(2 * (n_min + n_maj));
    let mut labels = Vec::with_capacity(n_min + n_maj);
    for _ in 0..n_min {
        features.push(rng.gen_range(lo[0]..=hi[0]));
        features.push(rng.gen_range(lo[1]..=hi[1]));
        labels.push(1);
    }
    for _ in 0..n_maj {
        features.push(rng.gen::<f64>());
        features.push(rng.gen::<f64>());
        labels.push(0);
    }
    Dataset::new("toy", 2, features, labels, vec!["x1".into(), "x2".into()])
        .expect("generated values lie in the unit square")
}

/// One informative feature: minority with probability 0.8 when `x > 0.6`,
/// 0.05 otherwise.
pub fn threshold_signal(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let p = if x > 0.6 { 0.8 } else { 0.05 };
        features.push(x);
        labels.push(u8::from(rng.gen::<f64>() < p));
    }
    Dataset::new("signal", 1, features, labels, vec!["signal".into()])
        .expect("uniform draws lie in [0,1]")
}

/// Uniform points in `[0,1]^d`, minority with probability 0.85 inside
/// `[0.2,0.7]x[0.3,0.8]` (first two axes) and 0.05 elsewhere.
pub fn synthetic_boxes(n: usize, d: usize, seed: u64) -> Dataset {
    assert!(d >= 2, "needs at least two features");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        features.extend((0..d).map(|_| rng.gen::<f64>()));
        let (a, b) = (features[start], features[start + 1]);
        let inside = (0.2..=0.7).contains(&a) && (0.3..=0.8).contains(&b);
        let p = if inside { 0.85 } else { 0.05 };
        labels.push(u8::from(rng.gen::<f64>() < p));
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new("synthetic", d, features, labels, names).expect("uniform draws lie in [0,1]")
}

/// Append `count` label-independent uniform features named `redundant_i`.
pub fn add_redundant_features(ds: &Dataset, count: usize, seed: u64) -> Dataset {
    if count == 0 {
        return ds.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ds.dimension + count;
    let mut features = Vec::with_capacity(ds.len() * d);
    for row in ds.rows() {
        features.extend_from_slice(row);
        for _ in 0..count {
            features.push(rng.gen::<f64>());
        }
    }
    let mut names = ds.feature_names.clone();
    names.extend((0..count).map(|i| format!("redundant_{i}")));
    let mut scaling = ds.scaling.clone();
    scaling.extend(std::iter::repeat_n(FeatureScaling::IDENTITY, count));
    Dataset {
        name: ds.name.clone(),
        dimension: d,
        features,
        labels: ds.labels.clone(),
        feature_names: names,
        scaling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn csv_min_max_endpoints() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "two.csv", "a,b,class\n0,3,pos\n10,3,neg\n");
        let ds = load(&DatasetSpec::for_data_file(&path, vec!["pos".into()])).unwrap();
        assert_eq!(ds.row(0), &[0.0, 0.5]);
        assert_eq!(ds.row(1), &[1.0, 0.5]);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn keel_header_and_dropped_columns() {
        let dir = tempfile::tempdir().unwrap();
        let body =
            "@relation toy\n@attribute f1 real [0, 4]\n@attribute f2 real\n@attribute f3 real\n\
                    @attribute Class {a, b}\n@inputs f1, f2, f3\n@outputs Class\n@data\n\
                    1, 5, 0.5, a\n3, 6, 0.5, b\n2, 7, 0.5, b\n";
        let path = write_file(dir.path(), "x.dat", body);
        let mut spec = DatasetSpec::for_data_file(&path, vec!["a".into()]);
        spec.dropped_columns = vec!["f3".into()];
        let ds = load(&spec).unwrap();
        assert_eq!(ds.dimension(), 2);
        assert_eq!(ds.feature_names(), &["f1".to_string(), "f2".to_string()]);
        assert_eq!(ds.n1(), 1);
        assert_eq!(ds.row(1), &[1.0, 0.5]);
    }

    #[test]
    fn headerless_keel_gets_generated_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "p.dat", "0.1,0.2,0\n0.3,0.4,1\n0.2,0.1,0\n");
        let ds = load(&DatasetSpec::for_data_file(&path, vec!["1".into()])).unwrap();
        assert_eq!(ds.feature_names(), &["x0".to_string(), "x1".to_string()]);
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn parse_error_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "bad.csv", "a,b,class\n1,2,x\n3,oops,y\n");
        let err = load(&DatasetSpec::for_data_file(&path, vec!["x".into()])).unwrap_err();
        match err {
            Error::Parse {
                row, column, value, ..
            } => {
                assert_eq!((row, column, value.as_str()), (2, 1, "oops"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_class_with_explicit_negatives() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "c.csv", "a,class\n1,18\n2,9\n3,7\n");
        let mut spec = DatasetSpec::for_data_file(&path, vec!["18".into()]);
        spec.negative_classes = vec!["9".into()];
        assert!(matches!(
            load(&spec),
            Err(Error::UnknownClass { row: 3, .. })
        ));
        spec.drop_other_classes = true;
        let ds = load(&spec).unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn positive_majority_is_swapped() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "s.csv", "a,class\n1,p\n2,p\n3,n\n");
        let ds = load(&DatasetSpec::for_data_file(&path, vec!["p".into()])).unwrap();
        assert_eq!(ds.n1(), 1);
        assert_eq!(ds.labels(), &[0, 0, 1]);
    }

    #[test]
    fn scaling_round_trip() {
        let s = FeatureScaling {
            min: -3.0,
            max: 17.5,
        };
        for raw in [-3.0, 0.0, 4.25, 17.5] {
            assert!((s.unscale(s.scale(raw)) - raw).abs() < 1e-12);
        }
        let c = FeatureScaling { min: 2.0, max: 2.0 };
        assert_eq!(c.scale(2.0), 0.5);
    }

    #[test]
    fn toy_support_and_size() {
        let ds = toy_generate(5, 200, 7);
        assert_eq!(ds.len(), 205);
        for (row, &y) in ds.rows().zip(ds.labels()) {
            if y == 1 {
                assert!((0.0..=0.75).contains(&row[0]));
                assert!((0.25..=0.75).contains(&row[1]));
            }
        }
        assert_eq!(ds, toy_generate(5, 200, 7));
        assert_ne!(ds, toy_generate(5, 200, 8));
        assert_eq!(toy_generate(0, 10, 1).n1(), 0);
    }

    #[test]
    fn redundant_features() {
        let ds = toy_generate(5, 50, 1);
        assert_eq!(add_redundant_features(&ds, 0, 3), ds);
        let wide = add_redundant_features(&ds, 3, 3);
        assert_eq!(wide.dimension(), 5);
        assert_eq!(wide.feature_names()[4], "redundant_2");
        assert_eq!(wide.row(7)[..2], ds.row(7)[..]);
    }

    #[test]
    fn redundant_features_are_uncorrelated_with_label() {
        let ds = toy_generate(600, 1400, 11);
        let wide = add_redundant_features(&ds, 2, 5);
        let n = wide.len() as f64;
        let ys: Vec<f64> = wide.labels().iter().map(|&y| y as f64).collect();
        let my = ys.iter().sum::<f64>() / n;
        for j in 2..4 {
            let xs: Vec<f64> = (0..wide.len()).map(|i| wide.value(i, j)).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            assert!((cov / (vx * vy).sqrt()).abs() < 0.1);
        }
    }

    #[test]
    fn csv_round_trip_through_writer() {
        let ds = toy_generate(3, 7, 2);
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        fs::write(&path, &buf).unwrap();
        let back = load_unscaled(&DatasetSpec::for_data_file(&path, vec!["1".into()])).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
    }
}
