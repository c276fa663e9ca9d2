//! Run directories: artifacts are collected in memory and written by a
//! single writer together with the one manifest that lists them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";
/// The effective configuration in config-file form, so a run can be repeated
/// with `--config <dir>/run.conf`.
pub const RUN_CONFIG: &str = "run.conf";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEntry {
    pub experiment: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub root_seed: u64,
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<VerdictEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline; field order follows the structs.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Files of one run, in the order they were produced.
pub struct RunDir {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
    /// Files extended in place rather than replaced.
    appended: Vec<(String, Vec<u8>)>,
}

impl RunDir {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            appended: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn append(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.appended.push((name.into(), bytes));
    }

    /// Writes every artifact, then the manifest hashing their final contents.
    pub fn finish(mut self, command: &str, config: &RunConfig, verdicts: Vec<VerdictEntry>) -> Result<RunManifest> {
        self.files.push((RUN_CONFIG.to_string(), config.to_file().into_bytes()));
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let mut artifacts = Vec::new();
        let write = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = self.dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
        };
        for (name, bytes) in &self.files {
            write(name, bytes)?;
            artifacts.push(artifact(name, bytes));
        }
        for (name, bytes) in &self.appended {
            let path = self.dir.join(name);
            let mut all = match fs::read(&path) {
                Ok(old) => old,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
                Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
            };
            all.extend_from_slice(bytes);
            write(name, &all)?;
            artifacts.push(artifact(name, &all));
        }
        let manifest = RunManifest {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            root_seed: config.seed,
            config: config.clone(),
            artifacts,
            verdicts,
        };
        write(MANIFEST, &to_json(&manifest)?)?;
        Ok(manifest)
    }
}

fn artifact(name: &str, bytes: &[u8]) -> Artifact {
    Artifact {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
