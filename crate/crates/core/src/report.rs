//! Run reports and their JSON schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::CenterSet;
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    KMeans,
    KMedian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    /// Mean kmeans++ seeding cost over `trials` independent runs.
    Kmeanspp,
    /// Known optimal cost from a ground-truth file.
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub kind: NormalizationKind,
    pub denominator: f64,
    /// Number of kmeans++ trials averaged; 0 for `optimal`.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterReport {
    pub algorithm: String,
    pub objective: Objective,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// `None` for algorithms without an α.
    pub alpha: Option<f64>,
    pub seed: u64,
    /// Human-readable predictor description, if one was used.
    pub predictor: Option<String>,
    /// Objective value of the output centers on the input points.
    pub raw_cost: f64,
    /// `raw_cost / normalization.denominator`.
    pub normalized_cost: f64,
    /// k-means cost of the output partition with each part at its centroid;
    /// `None` for the k-median objective.
    pub partition_cost: Option<f64>,
    pub normalized_partition_cost: Option<f64>,
    pub normalization: Normalization,
    pub centers: CenterSet,
    /// Wall time per phase, in milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
    pub warnings: Vec<Warning>,
    pub inputs: Vec<InputDigest>,
}

fn schema(reason: impl Into<String>) -> Error {
    Error::Syntax {
        what: "cluster report",
        reason: reason.into(),
    }
}

impl ClusterReport {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 || self.d == 0 {
            return Err(schema("k, n and d must be positive"));
        }
        if self.centers.d() != self.d || self.centers.k() > self.k {
            return Err(schema("center matrix shape disagrees with k and d"));
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0 && a < 1.0) {
                return Err(schema(format!("alpha {a} outside (0, 1)")));
            }
        }
        if !(self.raw_cost.is_finite() && self.raw_cost >= 0.0) {
            return Err(schema("raw_cost must be finite and non-negative"));
        }
        let norm = &self.normalization;
        if !(norm.denominator.is_finite() && norm.denominator > 0.0) {
            return Err(schema("normalization denominator must be positive"));
        }
        if norm.kind == NormalizationKind::Kmeanspp && norm.trials == 0 {
            return Err(schema("kmeans++ normalization needs at least one trial"));
        }
        if !(self.normalized_cost.is_finite() && self.normalized_cost >= 0.0) {
            return Err(schema("normalized_cost must be finite and non-negative"));
        }
        for c in [self.partition_cost, self.normalized_partition_cost].into_iter().flatten() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(schema("partition costs must be finite and non-negative"));
            }
        }
        if self.timings_ms.values().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(schema("timings must be finite and non-negative"));
        }
        for input in &self.inputs {
            if input.sha256.len() != 64 || !input.sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(schema(format!("bad digest for {}", input.path)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    /// Parse and validate.
    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        r.validate()?;
        Ok(r)
    }

    /// The report with timing fields cleared, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}
