use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::output::Outputs;

/// Written beside every output. `config` holds the subcommand's fully
/// resolved arguments, which is enough to run it again with `ccid replay`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seeds: serde_json::Map<String, serde_json::Value>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub duration_s: f64,
}

impl RunManifest {
    pub fn new<T: Serialize>(subcommand: &str, config: &T) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config)?,
            seeds: Default::default(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_s: 0.0,
        })
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value.into());
    }

    /// Fills in outputs and timing, then writes the manifest as an output.
    pub fn write(mut self, path: &Path, outputs: &mut Outputs, started: Instant) -> Result<()> {
        self.outputs = outputs.files().to_vec();
        self.duration_s = started.elapsed().as_secs_f64();
        let path = outputs.file(path)?;
        let text = serde_json::to_string_pretty(&self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// `<file>.manifest.json` for a single-file output.
pub fn beside(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    file.with_file_name(name)
}
