//! Comparing systems against a baseline: error-rate reductions, lower-bound
//! reductions and how well each bound tracks the error.

use serde::{Deserialize, Serialize};

use crate::bounds::{bound_loose, bound_tight, error_rate_reduction, lower_bound_reduction, pearson, BoundConfig};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    LooseInfo,
    TightInfo,
    TightStrength,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::LooseInfo, BoundKind::TightInfo, BoundKind::TightStrength];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::LooseInfo => "loose_info",
            BoundKind::TightInfo => "tight_info",
            BoundKind::TightStrength => "tight_strength",
        }
    }
}

/// What a comparison needs to know about one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemPoint {
    pub name: String,
    pub error_rate: f64,
    pub h_y: f64,
    pub information: f64,
    pub strength: f64,
    pub ymax: u32,
}

impl SystemPoint {
    /// Requires a report computed with a combined column.
    pub fn from_report(name: impl Into<String>, report: &MetricReport) -> Result<Self> {
        let (Some(error_rate), Some(strength)) = (report.error_rate, report.ensemble_strength) else {
            return Err(Error::MissingCombined);
        };
        Ok(Self {
            name: name.into(),
            error_rate,
            h_y: report.h_y,
            information: report.ensemble_information,
            strength,
            ymax: report.bounds.config.ymax,
        })
    }

    /// Bound value at `cfg`, with `None` when the tight bound is undefined.
    pub fn bound(&self, kind: BoundKind, cfg: &BoundConfig) -> Option<f64> {
        match kind {
            BoundKind::LooseInfo => Some(bound_loose(self.information, self.h_y, cfg.ymax)),
            BoundKind::TightInfo => bound_tight(self.information, self.h_y, cfg).value(),
            BoundKind::TightStrength => bound_tight(self.strength, self.h_y, cfg).value(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub name: String,
    pub error_rate: f64,
    /// Percent.
    pub error_rate_reduction: f64,
    pub loose_info: f64,
    pub tight_info: f64,
    pub tight_strength: f64,
}

impl ReductionRow {
    pub fn reduction(&self, kind: BoundKind) -> f64 {
        match kind {
            BoundKind::LooseInfo => self.loose_info,
            BoundKind::TightInfo => self.tight_info,
            BoundKind::TightStrength => self.tight_strength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub bound: BoundKind,
    /// `None` when either column has no variance.
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub config: BoundConfig,
    pub rows: Vec<ReductionRow>,
    pub correlations: Vec<Correlation>,
    pub warnings: Vec<String>,
}

impl Study {
    pub fn correlation(&self, kind: BoundKind) -> Option<f64> {
        self.correlations.iter().find(|c| c.bound == kind).and_then(|c| c.pearson)
    }
}

/// Reductions of every system relative to `baseline`, all bounds
/// evaluated at one `p0` (the baseline error rate unless given).
///
/// An undefined tight bound is taken as 0, the trivial bound, and noted in
/// `warnings`.
pub fn compare_systems(baseline: &SystemPoint, systems: &[SystemPoint], p0: Option<f64>) -> Result<Study> {
    if systems.is_empty() {
        return Err(Error::InvalidConfig("no systems to compare".into()));
    }
    if let Some(s) = systems.iter().find(|s| s.ymax != baseline.ymax) {
        return Err(Error::InvalidConfig(format!(
            "{} has ymax {} but the baseline has {}",
            s.name, s.ymax, baseline.ymax
        )));
    }
    let config = BoundConfig::new(p0.unwrap_or(baseline.error_rate), baseline.ymax)?;
    let mut warnings = Vec::new();
    let mut bound_or_zero = |s: &SystemPoint, kind: BoundKind| {
        s.bound(kind, &config).unwrap_or_else(|| {
            warnings.push(format!("{}: {} undefined, using 0", s.name, kind.name()));
            0.0
        })
    };
    let base: Vec<f64> = BoundKind::ALL.iter().map(|&k| bound_or_zero(baseline, k)).collect();
    let mut rows = Vec::with_capacity(systems.len());
    for s in systems {
        let mut red = [0.0; 3];
        for (i, &k) in BoundKind::ALL.iter().enumerate() {
            red[i] = lower_bound_reduction(base[i], bound_or_zero(s, k))?;
        }
        rows.push(ReductionRow {
            name: s.name.clone(),
            error_rate: s.error_rate,
            error_rate_reduction: error_rate_reduction(baseline.error_rate, s.error_rate)?,
            loose_info: red[0],
            tight_info: red[1],
            tight_strength: red[2],
        });
    }
    let err: Vec<f64> = rows.iter().map(|r| r.error_rate_reduction).collect();
    let correlations = BoundKind::ALL
        .iter()
        .map(|&k| {
            let col: Vec<f64> = rows.iter().map(|r| r.reduction(k)).collect();
            Correlation {
                bound: k,
                pearson: pearson(&err, &col).ok(),
            }
        })
        .collect();
    Ok(Study {
        config,
        rows,
        correlations,
        warnings,
    })
}
