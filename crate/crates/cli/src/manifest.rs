//! Append-only run manifests, one JSON line per run in `manifest.jsonl`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub type Outputs = Vec<PathBuf>;

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_hashes: Vec<(String, String)>,
    pub outputs: Outputs,
    pub wall_seconds: f64,
    #[serde(skip)]
    start: Option<Instant>,
}

impl Manifest {
    pub fn new<T: Serialize>(command: &str, params: &T, seed: Option<u64>, start: Instant) -> Self {
        Manifest {
            command: command.to_string(),
            parameters: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_hashes: Vec::new(),
            outputs: Vec::new(),
            wall_seconds: 0.0,
            start: Some(start),
        }
    }

    pub fn hash_input(&mut self, path: &Path, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.input_hashes.push((path.display().to_string(), hex));
    }

    /// Appends this run to `dir/manifest.jsonl`.
    pub fn finish(&mut self, dir: &Path) -> std::io::Result<()> {
        self.wall_seconds = self.start.map_or(0.0, |s| s.elapsed().as_secs_f64());
        let line = serde_json::to_string(self).map_err(std::io::Error::other)?;
        let mut file = std::fs::OpenOptions::new().create(true).append(true).open(dir.join("manifest.jsonl"))?;
        writeln!(file, "{line}")
    }
}
