use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Map<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub warnings: Vec<String>,
    pub started_at_unix: f64,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects a run's inputs, outputs and warnings.
pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    started: Instant,
    started_at: SystemTime,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    warnings: Vec<String>,
}

impl Run {
    pub fn new(command: &'static str, out_dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        Ok(Self {
            command,
            out_dir: out_dir.to_path_buf(),
            started: Instant::now(),
            started_at: SystemTime::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn finish(self, config: serde_json::Map<String, serde_json::Value>, seed: Option<u64>) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            inputs: self.inputs,
            outputs: self.outputs,
            warnings: self.warnings,
            started_at_unix: self.started_at.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}
