use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct FailedItem {
    pub path: PathBuf,
    pub reason: String,
}

/// Everything needed to replay a run: command, resolved configuration,
/// paths, seed and tool version, plus timing and a success tally.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: u64,
    pub jobs: usize,
    pub duration_ms: f64,
    pub successes: usize,
    pub failures: usize,
    pub failed: Vec<FailedItem>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64, jobs: usize) -> Self {
        Self {
            command: command.to_string(),
            version: crate::VERSION.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            jobs,
            duration_ms: 0.0,
            successes: 0,
            failures: 0,
            failed: Vec::new(),
        }
    }

    pub fn set_duration(&mut self, elapsed: Duration) {
        self.duration_ms = elapsed.as_secs_f64() * 1e3;
    }

    pub fn record_failure(&mut self, path: PathBuf, reason: String) {
        self.failures += 1;
        self.failed.push(FailedItem { path, reason });
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
