//! Run manifest: what was run, from which configuration, what it produced
//! and whether every check passed.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, details: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            details,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub mode: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(mode: &str, config_hash: String, seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            config_hash,
            seed,
            started_unix: unix_now(),
            finished_unix: 0,
            outputs: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_check(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    /// Finalize and write `manifest.json`. Every recorded output must exist
    /// for the manifest to count as passed.
    pub fn finalize(mut self, out_dir: &Path) -> anyhow::Result<(Self, PathBuf)> {
        self.finished_unix = unix_now();
        let outputs_exist = self.outputs.iter().all(|p| Path::new(p).exists());
        self.record_check(CheckResult::new(
            "outputs_exist",
            outputs_exist,
            format!("{} output file(s)", self.outputs.len()),
        ));
        self.passed = self.checks.iter().all(|c| c.passed);
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok((self, path))
    }
}
