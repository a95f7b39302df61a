//! Output staging and the run manifest.
//!
//! Every command collects its files in memory, then writes them together with
//! an updated `manifest.json`. The manifest holds no timestamps or absolute
//! output paths, so identical inputs and options give identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, InputRecord, RunConfig};
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: serde_json::Value,
    pub options: serde_json::Value,
    pub inputs: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Keyed by command and its options, so re-running a command replaces its entry.
    pub runs: BTreeMap<String, RunRecord>,
}

impl RunManifest {
    fn new() -> Self {
        RunManifest { tool: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into(), runs: BTreeMap::new() }
    }

    fn load_or_new(path: &Path) -> CliResult<Self> {
        match std::fs::read(path) {
            Ok(bytes) => {
                let m: RunManifest = serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                // a manifest from another version is started afresh
                Ok(if m.version == env!("CARGO_PKG_VERSION") { m } else { Self::new() })
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(CliError::io(path, e)),
        }
    }
}

/// `command k=v ...` in key order; unset options show as `-`.
fn run_key(command: &str, options: &serde_json::Value) -> String {
    let mut key = command.to_string();
    if let Some(map) = options.as_object() {
        for (k, v) in map {
            let v = match v {
                serde_json::Value::Null => "-".to_string(),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            key.push_str(&format!(" {k}={v}"));
        }
    }
    key
}

/// Files produced by one command, written on [`Staged::commit`].
pub struct Staged {
    command: String,
    options: serde_json::Value,
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn new(command: &str, options: serde_json::Value) -> Self {
        Staged { command: command.into(), options, files: Vec::new() }
    }

    pub fn add(&mut self, name: String, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes the files and records them in the manifest under `out`.
    pub fn commit(self, config: &RunConfig, inputs: &[InputRecord]) -> CliResult<()> {
        let out = &config.out;
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = out.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            outputs.push(OutputRecord { file: name.clone(), sha256: sha256_hex(bytes) });
        }
        let manifest_path = out.join(MANIFEST_FILE);
        let mut manifest = RunManifest::load_or_new(&manifest_path)?;
        let key = run_key(&self.command, &self.options);
        manifest.runs.insert(
            key,
            RunRecord {
                command: self.command,
                config: serde_json::to_value(config)?,
                options: self.options,
                inputs: serde_json::to_value(inputs)?,
                outputs,
            },
        );
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&manifest_path, bytes).map_err(|e| CliError::io(&manifest_path, e))
    }
}
