//! Trajectory CSV and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use apdiff_core::StepRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t,energy,sup_norm_u,margin,aliased_mass,inversion_iters";

/// One CSV line per record; floats use the shortest round-trip decimal.
pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for r in records {
        let margin = r.margin.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.t, r.energy, r.sup_norm_u, margin, r.aliased_mass, r.inversion_iters
        );
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub wall_time_s: f64,
    /// `ok` or `solver-failure`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Files written into one output directory, tracked for the manifest.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    pub fn finish(mut self, mut manifest: Manifest) -> Result<Manifest, CliError> {
        manifest.files = std::mem::take(&mut self.files);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.root.join(MANIFEST_NAME);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Checks that every file listed in a manifest exists with the recorded
/// hash. Returns the offending paths.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(m.files
        .iter()
        .filter(|f| match std::fs::read(dir.join(&f.path)) {
            Ok(bytes) => sha256_hex(&bytes) != f.sha256,
            Err(_) => true,
        })
        .map(|f| f.path.clone())
        .collect())
}
