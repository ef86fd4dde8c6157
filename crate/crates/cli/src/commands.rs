use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;
use svrtree::data_io::{self, DataFormat};
use svrtree::evaluation::{lambda_grid, nested_cv};
use svrtree::geometry::grid_surface_oracle;
use svrtree::tree_core::{derive_class_weights, risk};
use svrtree::{
    BenchmarkReport, ClassWeights, CvConfig, Dataset, DatasetSpec, FitConfig, Method, Model,
    NodeKind,
};

use crate::manifest::{self, RunManifest};
use crate::{BenchArgs, DataArgs, FitArgs, InspectArgs, PredictArgs, ToyArgs};

/// Bad invocation: maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn resolve_spec(args: &DataArgs) -> anyhow::Result<DatasetSpec> {
    let path = &args.data;
    if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        DatasetSpec::from_file(path).with_context(|| format!("reading spec {}", path.display()))
    } else {
        Ok(DatasetSpec::for_data_file(path, args.positive.clone()))
    }
}

fn refuse_overwrite(paths: &[PathBuf], force: bool) -> anyhow::Result<()> {
    if force {
        return Ok(());
    }
    match paths.iter().find(|p| p.exists()) {
        Some(p) => Err(usage(format!(
            "{} exists; pass --force to overwrite",
            p.display()
        ))),
        None => Ok(()),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn fit(args: &FitArgs, argv: &[String]) -> anyhow::Result<()> {
    if let Some(l) = args.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(usage(format!("--lambda must be finite and >= 0, got {l}")));
        }
    }
    if args.max_leaves == Some(0) {
        return Err(usage("--max-leaves must be at least 1"));
    }
    if !(args.c0 > 0.0 && args.c0.is_finite()) {
        return Err(usage(format!("--c0 must be positive, got {}", args.c0)));
    }
    if args.alpha == Some(0) {
        return Err(usage("--alpha must be at least 1"));
    }
    let manifest_path = manifest::path_for(&args.out);
    refuse_overwrite(&[args.out.clone(), manifest_path.clone()], args.force)?;

    let spec = resolve_spec(&args.data)?;
    let data =
        data_io::load(&spec).with_context(|| format!("loading {}", args.data.data.display()))?;
    let n = data.len();
    let weights = match args.alpha {
        Some(a) => ClassWeights::new(a, data.n0(), data.n1())?,
        None => derive_class_weights(data.n0(), data.n1())?,
    };
    let lambda = args.lambda.unwrap_or_else(|| lambda_grid(n)[5]);
    let mut config = FitConfig::new(lambda, n).with_feature_selection(args.feature_selection);
    config.c0 = args.c0;
    config.seed = args.seed;
    if let Some(m) = args.max_leaves {
        config = config.with_max_leaves(m);
    }
    let tree = svrtree::fit(&data, weights, config)?;
    let breakdown = risk(&tree, &data)?;
    let summary = json!({
        "samples": n,
        "minority": data.n1(),
        "leaves": tree.leaf_count(),
        "depth": tree.depth(),
        "risk": breakdown,
    });

    let model = Model {
        tree,
        feature_names: Some(data.feature_names().to_vec()),
        scaling: Some(data.scaling().to_vec()),
    };
    write_file(&args.out, &model.to_json()?)?;

    let mut m = RunManifest::new(
        "fit",
        argv,
        json!({ "dataset": spec, "fit": config, "weights": weights }),
        args.seed,
    )?;
    m.inputs.push(args.data.data.clone());
    m.outputs.push(args.out.clone());
    m.summary = Some(summary);
    write_file(&manifest_path, &m.to_json()?)?;

    println!(
        "leaves={} signed_impurity={:.6} svr={:.6} lambda={:.6e} risk={:.6}",
        model.tree.leaf_count(),
        breakdown.signed_impurity,
        breakdown.svr,
        breakdown.lambda,
        breakdown.total
    );
    Ok(())
}

fn load_model(path: &Path) -> anyhow::Result<Model> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    Model::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

pub fn predict(args: &PredictArgs, argv: &[String]) -> anyhow::Result<()> {
    let manifest_path = args.out.as_deref().map(manifest::path_for);
    if let (Some(out), Some(mp)) = (&args.out, &manifest_path) {
        refuse_overwrite(&[out.clone(), mp.clone()], args.force)?;
    }
    let model = load_model(&args.model)?;
    let spec = resolve_spec(&args.data)?;
    let data: Dataset = match &model.scaling {
        Some(s) => data_io::load_with_scaling(&spec, s),
        None => data_io::load_unscaled(&spec),
    }
    .map_err(|e| match e {
        svrtree::Error::DimensionMismatch { expected, actual } => anyhow::anyhow!(
            "model expects {expected} features but {} has {actual}",
            args.data.data.display()
        ),
        other => {
            anyhow::Error::from(other).context(format!("loading {}", args.data.data.display()))
        }
    })?;
    if data.dimension() != model.tree.dimension() {
        anyhow::bail!(
            "model expects {} features but {} has {}",
            model.tree.dimension(),
            args.data.data.display(),
            data.dimension()
        );
    }
    let labels = model.tree.predict_dataset(&data)?;
    let mut out = String::from("row,label\n");
    for (i, y) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i},{y}");
    }
    match (&args.out, &manifest_path) {
        (Some(path), Some(mp)) => {
            write_file(path, &out)?;
            let mut m = RunManifest::new("predict", argv, json!({ "dataset": spec }), args.seed)?;
            m.inputs.push(args.model.clone());
            m.inputs.push(args.data.data.clone());
            m.outputs.push(path.clone());
            m.summary = Some(json!({
                "rows": labels.len(),
                "minority_predictions": labels.iter().filter(|&&y| y == 1).count(),
            }));
            write_file(mp, &m.to_json()?)?;
        }
        _ => {
            std::io::stdout().lock().write_all(out.as_bytes())?;
        }
    }
    Ok(())
}

fn spec_files(path: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("toml"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn bench(args: &BenchArgs, argv: &[String]) -> anyhow::Result<()> {
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|m| m.trim().parse::<Method>().map_err(|e| usage(e.to_string())))
        .collect::<anyhow::Result<_>>()?;
    if methods.is_empty() {
        return Err(usage("--methods is empty"));
    }
    let cv = CvConfig {
        repetitions: args.reps,
        outer_folds: args.outer_folds,
        inner_folds: args.inner_folds,
        fixed_lambda: args.lambda,
        k: args.k,
        c0: args.c0,
        seed: args.seed,
        ..CvConfig::default()
    };
    cv.validate().map_err(|e| usage(e.to_string()))?;

    let csv_path = args.out.join("report.csv");
    let json_path = args.out.join("report.json");
    let table_path = args.out.join("table.txt");
    let manifest_path = args.out.join("manifest.json");
    let outputs = vec![csv_path.clone(), json_path.clone(), table_path.clone()];
    let mut all = outputs.clone();
    all.push(manifest_path.clone());
    refuse_overwrite(&all, args.force)?;

    let mut report = BenchmarkReport::new(cv.clone());
    let mut inputs = Vec::new();
    for file in spec_files(&args.datasets)? {
        let spec = DatasetSpec::from_file(&file)?;
        if spec.format != DataFormat::Toy && !spec.path.exists() {
            log::warn!("skipping {}: {} not found", spec.name, spec.path.display());
            continue;
        }
        let data = data_io::load(&spec)?;
        for &method in &methods {
            log::info!("{} / {method}", spec.name);
            report.results.push(nested_cv(&data, method, &cv)?);
        }
        inputs.push(file);
    }
    if inputs.is_empty() {
        anyhow::bail!(
            "no dataset under {} could be loaded",
            args.datasets.display()
        );
    }

    let table = report.render_table();
    write_file(&csv_path, &report.to_csv())?;
    write_file(&json_path, &report.to_json()?)?;
    write_file(&table_path, &table)?;
    let mut m = RunManifest::new("bench", argv, &cv, args.seed)?;
    m.inputs = inputs;
    m.outputs = outputs;
    write_file(&manifest_path, &m.to_json()?)?;
    print!("{table}");
    Ok(())
}

fn interval_list(lower: &[f64], upper: &[f64]) -> String {
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| format!("[{l}, {u}]"))
        .collect::<Vec<_>>()
        .join(" x ")
}

pub fn svr_inspect(args: &InspectArgs) -> anyhow::Result<()> {
    if args.oracle_resolution == Some(0) {
        return Err(usage("--oracle-resolution must be positive"));
    }
    let model = load_model(&args.model)?;
    let tree = &model.tree;
    let set = tree.decision_set();
    let (s, v, svr) = (set.surface(), set.volume(), set.svr());
    let mut out = String::new();
    if set.is_empty() {
        let _ = writeln!(out, "S={s} V={v} SVR=0 (empty decision set)");
    } else {
        let _ = writeln!(out, "S={s} V={v} SVR={svr}");
    }
    let leaves: Vec<_> = tree.leaf_ids().collect();
    let _ = writeln!(
        out,
        "dimension={} leaves={} minority_leaves={}",
        tree.dimension(),
        leaves.len(),
        set.boxes().len()
    );
    for id in leaves {
        let node = tree.node(id);
        let label = match node.kind {
            NodeKind::Leaf { label } => label,
            NodeKind::Split { .. } => unreachable!("leaf_ids yields leaves"),
        };
        let _ = writeln!(
            out,
            "leaf {id} label={label} {}",
            interval_list(node.region.lower(), node.region.upper())
        );
    }
    if let Some(res) = args.oracle_resolution {
        let oracle = grid_surface_oracle(&set, res);
        let _ = writeln!(
            out,
            "oracle resolution={res} S={oracle} |S-oracle|={:e}",
            (s - oracle).abs()
        );
    }
    print!("{out}");
    Ok(())
}

pub fn toy(args: &ToyArgs, argv: &[String]) -> anyhow::Result<()> {
    let manifest_path = manifest::path_for(&args.out);
    refuse_overwrite(&[args.out.clone(), manifest_path.clone()], args.force)?;
    let data = data_io::toy_generate(args.n_min, args.n_maj, args.seed);
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    write_file(&args.out, std::str::from_utf8(&buf)?)?;
    let mut m = RunManifest::new(
        "toy",
        argv,
        json!({ "n_min": args.n_min, "n_maj": args.n_maj }),
        args.seed,
    )?;
    m.outputs.push(args.out.clone());
    m.summary = Some(json!({ "rows": data.len() }));
    write_file(&manifest_path, &m.to_json()?)?;
    Ok(())
}
