//! Run manifests: enough to bit-reproduce any run. Every command writes
//! `manifest.json` into its output directory; `replay` re-executes it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io::write_json;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// The fully resolved command arguments, replayable as-is.
    pub args: serde_json::Value,
    /// sha256 of every input file consumed by the run.
    pub input_digests: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new<A: Serialize>(command: &str, args: &A) -> Result<Self> {
        Ok(Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            args: serde_json::to_value(args)?,
            input_digests: BTreeMap::new(),
            seeds: Vec::new(),
            wall_clock_seconds: 0.0,
        })
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn record_seeds(&mut self, seeds: impl IntoIterator<Item = u64>) {
        self.seeds.extend(seeds);
    }

    pub fn finish(mut self, out_dir: &Path, started: std::time::Instant) -> Result<()> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        write_json(&out_dir.join("manifest.json"), &self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path).map_err(CliError::io(path))?;
        Ok(serde_json::from_str(&body)?)
    }

    /// Re-hashes the recorded inputs; a replay refuses to run on changed
    /// input files.
    pub fn verify_inputs(&self) -> Result<()> {
        for (path, expected) in &self.input_digests {
            let actual = sha256_file(Path::new(path))?;
            if &actual != expected {
                return Err(CliError::Invalid(format!(
                    "input {path} changed since the original run (sha256 {actual} != {expected})"
                )));
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}
