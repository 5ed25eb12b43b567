//! Run manifests: every file-producing run writes a manifest next to its
//! outputs recording the resolved configuration, so re-running from the
//! manifest reproduces them.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub resolved_config: serde_json::Value,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            resolved_config: serde_json::Value::Null,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn config<T: Serialize>(mut self, cfg: &T) -> Self {
        self.resolved_config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
        self
    }

    /// Writes `<primary output>.manifest.json` (or `manifest.json` inside a
    /// directory output).
    pub fn write_alongside(&self, primary_output: &Path) -> CliResult<()> {
        let path: PathBuf = if primary_output.is_dir() {
            primary_output.join("manifest.json")
        } else {
            let mut name = primary_output
                .file_name()
                .unwrap_or_default()
                .to_os_string();
            name.push(".manifest.json");
            primary_output.with_file_name(name)
        };
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        Ok(())
    }
}
