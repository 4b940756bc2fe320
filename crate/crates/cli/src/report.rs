//! The JSON document written by `analyze` and read back by `correlate`.

use anyhow::{bail, Result};
use ensemble_info::metrics::NormalizedMetrics;
use ensemble_info::study::SystemPoint;
use ensemble_info::MetricReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P0Source {
    Flag,
    Baseline,
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationValue {
    pub n: usize,
    pub value: f64,
}

/// Undefined bounds carry `"value": null` alongside `"defined": false`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub input_sha256: String,
    pub n_instances: usize,
    pub p0_source: P0Source,
    pub report: MetricReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub concentration: Vec<ConcentrationValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<NormalizedMetrics>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ReportDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// The subset of a report `correlate` needs; tolerant of the NaN-as-null
/// encoding of undefined values elsewhere in the document.
#[derive(Debug, Clone, Deserialize)]
pub struct ReportSummary {
    pub schema_version: u32,
    pub report: SummaryMetrics,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SummaryMetrics {
    pub h_y: f64,
    pub ensemble_information: f64,
    pub ensemble_strength: Option<f64>,
    pub error_rate: Option<f64>,
    pub bounds: SummaryBounds,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SummaryBounds {
    pub config: SummaryConfig,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SummaryConfig {
    pub ymax: u32,
}

impl ReportSummary {
    pub fn parse(json: &str) -> Result<Self> {
        let s: ReportSummary = serde_json::from_str(json)?;
        if s.schema_version != SCHEMA_VERSION {
            bail!("schema_version {} is not {SCHEMA_VERSION}", s.schema_version);
        }
        Ok(s)
    }

    pub fn to_point(&self, name: &str) -> Result<SystemPoint> {
        let m = &self.report;
        let (Some(error_rate), Some(strength)) = (m.error_rate, m.ensemble_strength) else {
            bail!("{name}: report has no combined prediction");
        };
        Ok(SystemPoint {
            name: name.to_string(),
            error_rate,
            h_y: m.h_y,
            information: m.ensemble_information,
            strength,
            ymax: m.bounds.config.ymax,
        })
    }
}
