use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What a command did: resolved configuration, outputs and timings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub tool_version: String,
    pub started_unix: f64,
    pub wall_seconds: f64,
}

pub struct ManifestBuilder {
    command: String,
    started: Instant,
    started_unix: f64,
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
        }
    }

    /// Writes `<out>/manifest.json` listing `artifacts`.
    pub fn finish(
        self,
        out: &Path,
        config: serde_json::Value,
        seed: Option<u64>,
        artifacts: Vec<PathBuf>,
    ) -> CliResult<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            args: std::env::args().collect(),
            config,
            seed,
            artifacts,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = out.join(MANIFEST_FILE);
        write_text(&path, &serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::data(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}
