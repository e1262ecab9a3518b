//! Result records and their JSON persistence.

use std::path::Path;

use anyhow::{Context, Result};
use gaussfrust::optimizer::OptConfig;
use serde::{Deserialize, Serialize};

use crate::output::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    AlphaTilde,
    Beta,
    ChiMin,
    Alpha,
    Conjecture,
    Invariant,
}

/// Enough of the optimizer configuration to regenerate a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
}

impl From<&OptConfig> for Fingerprint {
    fn from(c: &OptConfig) -> Self {
        Self {
            seed: c.seed,
            restarts: c.restarts,
            tol: c.convergence_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: RecordKind,
    pub n: usize,
    pub n_a: usize,
    /// Mean excitations per mode, where the quantity depends on it.
    #[serde(rename = "N")]
    pub energy: Option<f64>,
    pub value: f64,
    pub tolerance_target: Option<f64>,
    /// `restricted` or `general` for `χ^min` and `α`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged_fraction: Option<f64>,
    /// Free-form label, e.g. the name of an invariant check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub config: Fingerprint,
    pub timestamp: String,
    pub version: String,
}

impl ResultRecord {
    pub fn new(kind: RecordKind, n: usize, n_a: usize, value: f64, config: &OptConfig) -> Self {
        Self {
            kind,
            n,
            n_a,
            energy: None,
            value,
            tolerance_target: None,
            mode: None,
            converged_fraction: None,
            detail: None,
            config: config.into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: version_string(),
        }
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance_target = Some(tol);
        self
    }

    pub fn with_mode(mut self, mode: impl ToString) -> Self {
        self.mode = Some(mode.to_string());
        self
    }

    pub fn with_converged_fraction(mut self, f: f64) -> Self {
        self.converged_fraction = Some(f);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

pub fn version_string() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

pub fn records_to_json(records: &[ResultRecord]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

pub fn records_from_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).context("malformed result records")
}

pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_atomic(path, records_to_json(records)?.as_bytes())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    records_from_json(&text)
}
