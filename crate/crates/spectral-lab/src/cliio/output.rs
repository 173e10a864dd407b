//! Atomic result persistence with a checksummed run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write via a temp file in the same directory followed by a rename, so
/// readers never observe partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let directory = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(directory)?;
    let mut tmp = PathBuf::from(path);
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    tmp.set_file_name(format!(".{file_name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<ManifestFile>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// A run directory under construction: files accumulate and are written
/// atomically, then `finish` emits the manifest listing all of them.
pub struct RunWriter {
    directory: PathBuf,
    config_sha256: String,
    started_unix: u64,
    files: Vec<ManifestFile>,
}

impl RunWriter {
    pub fn new(directory: &Path, config_json: &str) -> Result<Self> {
        std::fs::create_dir_all(directory)?;
        let mut writer = RunWriter {
            directory: directory.to_path_buf(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            started_unix: unix_now(),
            files: Vec::new(),
        };
        writer.write_file("config.json", config_json.as_bytes())?;
        Ok(writer)
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    pub fn write_file(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.directory.join(name), bytes)?;
        self.files.push(ManifestFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_file(name, text.as_bytes())
    }

    /// Little-endian f64 sequence in parameter-table order.
    pub fn write_params(&mut self, name: &str, values: &[f64]) -> Result<()> {
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.write_file(name, &bytes)
    }

    pub fn finish(self) -> Result<RunManifest> {
        let manifest = RunManifest {
            config_sha256: self.config_sha256,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            finished_unix: unix_now(),
            files: self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.directory.join("manifest.json"), text.as_bytes())?;
        Ok(manifest)
    }
}
