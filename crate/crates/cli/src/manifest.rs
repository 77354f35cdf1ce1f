//! Run manifests: resolved configuration plus input and output digests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timestamp: String,
}

/// SHA-256 of a file, or of a directory as the sorted list of its files'
/// relative names and digests.
pub fn digest_path(path: &Path) -> Result<String> {
    let meta = fs::metadata(path).with_context(|| format!("cannot read {}", path.display()))?;
    if meta.is_file() {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Ok(hex::encode(Sha256::digest(&bytes)));
    }
    let mut entries = Vec::new();
    collect_files(path, path, &mut entries)?;
    entries.sort();
    let mut h = Sha256::new();
    for (name, digest) in entries {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(digest.as_bytes());
        h.update(b"\n");
    }
    Ok(hex::encode(h.finalize()))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let name = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            out.push((name, digest_path(&path)?));
        }
    }
    Ok(())
}

pub fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: digest_path(p)?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        config: Value,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
    ) -> Result<Self> {
        Ok(RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: "termkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config,
            inputs: digests(inputs)?,
            outputs: digests(outputs)?,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}

#[derive(Debug, Serialize)]
pub struct Mismatch {
    pub path: PathBuf,
    pub expected: String,
    pub found: Option<String>,
}

/// Recomputes every recorded digest and lists the ones that differ or whose
/// file is gone.
pub fn verify(manifest: &RunManifest) -> Vec<Mismatch> {
    manifest
        .inputs
        .iter()
        .chain(&manifest.outputs)
        .filter_map(|d| {
            let found = digest_path(&d.path).ok();
            (found.as_deref() != Some(d.sha256.as_str())).then(|| Mismatch {
                path: d.path.clone(),
                expected: d.sha256.clone(),
                found,
            })
        })
        .collect()
}
