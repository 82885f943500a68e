//! Run manifests: written with status `running` before any work and
//! rewritten as `complete` once every output exists.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
struct ManifestFile<'a> {
    command: &'a str,
    version: &'a str,
    status: &'a str,
    started_unix: u64,
    wall_clock_seconds: Option<f64>,
    config: &'a Value,
    outputs: &'a [String],
    summary: &'a Value,
}

pub struct RunManifest {
    dir: PathBuf,
    command: String,
    config: Value,
    started_unix: u64,
    started: Instant,
    outputs: Vec<String>,
    summary: Value,
}

impl RunManifest {
    /// Creates `dir` and writes the initial manifest.
    pub fn begin(dir: &Path, command: &str, config: Value) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let m = RunManifest {
            dir: dir.to_path_buf(),
            command: command.into(),
            config,
            started_unix,
            started: Instant::now(),
            outputs: Vec::new(),
            summary: Value::Null,
        };
        m.write("running", None)?;
        Ok(m)
    }

    /// Path of an output inside the run directory, recorded for the
    /// completion check.
    pub fn output(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.into());
        }
        self.dir.join(name)
    }

    pub fn set_summary(&mut self, summary: Value) {
        self.summary = summary;
    }

    /// Checks that every recorded output exists and marks the run complete.
    pub fn complete(self) -> Result<()> {
        for o in &self.outputs {
            if !self.dir.join(o).exists() {
                bail!("output {o} was recorded but never written");
            }
        }
        let secs = self.started.elapsed().as_secs_f64();
        self.write("complete", Some(secs))
    }

    fn write(&self, status: &str, secs: Option<f64>) -> Result<()> {
        let file = ManifestFile {
            command: &self.command,
            version: env!("CARGO_PKG_VERSION"),
            status,
            started_unix: self.started_unix,
            wall_clock_seconds: secs,
            config: &self.config,
            outputs: &self.outputs,
            summary: &self.summary,
        };
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&file)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}
