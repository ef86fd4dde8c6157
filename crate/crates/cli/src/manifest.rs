use std::path::{Path, PathBuf};

use serde::Serialize;

/// Written next to every output so a run can be repeated.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub versions: Versions,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
    /// `SOURCE_DATE_EPOCH` when set; omitted otherwise so reruns match byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub svrtree: &'static str,
    pub model_format: &'static str,
}

impl RunManifest {
    pub fn new(
        command: &str,
        arguments: &[String],
        config: impl Serialize,
        seed: u64,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            command: command.to_string(),
            arguments: arguments.to_vec(),
            config: serde_json::to_value(config)?,
            seed,
            versions: Versions {
                svrtree: env!("CARGO_PKG_VERSION"),
                model_format: svrtree::tree_core::MODEL_FORMAT,
            },
            inputs: Vec::new(),
            outputs: Vec::new(),
            summary: None,
            timestamp: std::env::var("SOURCE_DATE_EPOCH")
                .ok()
                .and_then(|s| s.trim().parse().ok()),
        })
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// `model.json` -> `model.manifest.json`.
pub fn path_for(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("output");
    output.with_file_name(format!("{stem}.manifest.json"))
}
