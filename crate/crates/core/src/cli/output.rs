//! ROC CSV files and run manifests.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ScenarioFile;
use crate::calibration::fmt_f64;
use crate::detectors::{Detector, Orientation};
use crate::error::{Error, Result};
use crate::roc::{RocCurve, TrialBatch};

pub const CSV_HEADER: &str = "threshold,pfa,pd,excluded_h0,excluded_h1";

/// One row per ROC point; reals with 17 significant digits.
pub fn roc_csv(curve: &RocCurve, batch: &TrialBatch) -> String {
    let mut s = String::with_capacity(64 * (curve.points.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for p in &curve.points {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.threshold),
            fmt_f64(p.pfa),
            fmt_f64(p.pd),
            batch.excluded_h0,
            batch.excluded_h1
        ));
    }
    s
}

/// File name for a detector's ROC: `enp_ed@128x12` → `enp_ed_128x12.csv`.
pub fn csv_file_name(d: &Detector) -> String {
    format!("{}.csv", d.label().replace('@', "_"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

impl FileRef {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&std::fs::read(path)?),
        })
    }

    /// Errors if the file no longer matches the recorded hash.
    pub fn verify(&self) -> Result<()> {
        let now = sha256_hex(&std::fs::read(&self.path)?);
        if now != self.sha256 {
            return Err(Error::Format(format!("{} changed since the manifest was written", self.path)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorEntry {
    pub label: String,
    pub orientation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl DetectorEntry {
    pub fn new(d: &Detector, output: Option<String>) -> Self {
        Self {
            label: d.label(),
            orientation: match d.orientation() {
                Orientation::Direct => "direct".into(),
                Orientation::Complement => "complement".into(),
            },
            output,
        }
    }
}

/// Everything needed to reproduce a command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    pub config: ScenarioFile,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_randomness: Option<bool>,
    pub detectors: Vec<DetectorEntry>,
    #[serde(default)]
    pub profiles: Vec<FileRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<FileRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: ScenarioFile, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            created_unix: None,
            config,
            seed,
            trials: None,
            shared_randomness: None,
            detectors: Vec::new(),
            profiles: Vec::new(),
            input: None,
            threshold: None,
        }
    }

    pub fn stamp_now(&mut self) {
        self.created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("manifest: {e}")))
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
