use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use ssprofile::verify::Verdict;

/// Record of one command run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub ssprofile: &'static str,
    pub cli: &'static str,
}

/// SHA-256 of the canonical JSON form of a configuration.
pub fn digest<T: Serialize>(config: &T) -> Result<String> {
    let json = serde_json::to_vec(config)?;
    let hash = Sha256::digest(&json);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

pub struct Recorder {
    command: String,
    config_digest: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    verdicts: Vec<Verdict>,
    start: Instant,
}

impl Recorder {
    pub fn new(command: &str, config_digest: String) -> Self {
        Recorder {
            command: command.to_string(),
            config_digest,
            inputs: Vec::new(),
            outputs: Vec::new(),
            verdicts: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn verdicts(&mut self, v: impl IntoIterator<Item = Verdict>) {
        self.verdicts.extend(v);
    }

    /// Write `manifest.json` into `dir`, after checking every named output exists.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        if let Some(missing) = self.outputs.iter().find(|p| !p.exists()) {
            anyhow::bail!("declared output {} was not written", missing.display());
        }
        let path = dir.join("manifest.json");
        self.outputs.push(path.clone());
        let manifest = RunManifest {
            command: self.command,
            config_digest: self.config_digest,
            inputs: self.inputs,
            outputs: self.outputs,
            versions: Versions { ssprofile: ssprofile_version(), cli: env!("CARGO_PKG_VERSION") },
            wall_time_s: self.start.elapsed().as_secs_f64(),
            verdicts: self.verdicts,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn ssprofile_version() -> &'static str {
    // the library and the front end are released together
    env!("CARGO_PKG_VERSION")
}
