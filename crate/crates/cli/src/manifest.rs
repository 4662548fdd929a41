use std::fs::File;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{output, CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path) -> io::Result<Self> {
        let mut hasher = Sha256::new();
        let bytes = io::copy(&mut File::open(path)?, &mut hasher)?;
        let sha256 = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(FileDigest { path: path.display().to_string(), sha256, bytes })
    }
}

/// Provenance record written next to a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn digest_inputs(paths: &[&Path]) -> CliResult<Vec<FileDigest>> {
    paths.iter().map(|p| FileDigest::of(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))).collect()
}

pub fn digest_outputs(paths: &[&Path]) -> CliResult<Vec<FileDigest>> {
    paths.iter().map(|p| FileDigest::of(p).map_err(|e| output("hashing output", e))).collect()
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| output("manifest", e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| output("writing manifest", e))
    }
}
