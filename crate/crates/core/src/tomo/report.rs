//! JSON reconstruction reports.

use crate::density::to_pairs;
use crate::linalg::CMat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    State,
    Process,
    Truthtable,
}

/// Matrices are row-major `[re, im]` pairs. Absent quantities are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomoReport {
    pub schema_version: u32,
    pub kind: ReportKind,
    pub dim: usize,
    /// Free-form run name used to pair reports with reference values.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chi: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_table: Option<Vec<Vec<f64>>>,
    /// Monte-Carlo standard deviation of each truth-table entry.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_table_std: Option<Vec<Vec<f64>>>,
    /// What `fidelity` was computed against.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub linear_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tangle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inquisition: Option<f64>,
    /// Flipping contrast per control setting, keyed by control bits.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub contrasts: BTreeMap<String, f64>,
    /// Reported alongside, never folded into `fidelity`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub success_probability: Option<f64>,
    pub error_bars: BTreeMap<String, f64>,
    /// Source settings of the run that produced the counts, when known.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub conditions: BTreeMap<String, f64>,
    pub seed: u64,
    pub n_samples: usize,
}

impl TomoReport {
    pub fn new(kind: ReportKind, dim: usize, seed: u64, n_samples: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            dim,
            label: None,
            rho: None,
            chi: None,
            truth_table: None,
            truth_table_std: None,
            reference: None,
            fidelity: None,
            linear_entropy: None,
            tangle: None,
            inquisition: None,
            contrasts: BTreeMap::new(),
            success_probability: None,
            error_bars: BTreeMap::new(),
            conditions: BTreeMap::new(),
            seed,
            n_samples,
        }
    }

    pub fn with_rho(mut self, m: &CMat) -> Self {
        self.rho = Some(to_pairs(m));
        self
    }

    pub fn with_chi(mut self, m: &CMat) -> Self {
        self.chi = Some(to_pairs(m));
        self
    }
}
