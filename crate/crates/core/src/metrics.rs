//! Relevance, redundancy and combination loss, the ensemble information and
//! strength they add up to, and the n-model concentration.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_loose, bound_tight, tightness_diagnostics, BoundConfig, BoundResult, TightnessDiagnostics};
use crate::error::{Error, Result};
use crate::info::{columns_entropy, conditional_multi_information, estimate_joint, multi_information};
use crate::mti::{mti_conditional_entropy_truth, mti_multi_information_pair, EstimationMode};
use crate::table::{Label, PredictionTable, Var};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerModel {
    pub relev: f64,
    pub redun: f64,
    pub combloss: Option<f64>,
}

/// The three bound values compared for every system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub config: BoundConfig,
    /// `B(I)`.
    pub loose_info: f64,
    /// `B^tight(I)`: the tight bound function ignoring combination loss.
    pub tight_info: BoundResult,
    /// `B^tight(E)`; absent without a combined column.
    pub tight_strength: Option<BoundResult>,
    pub tightness: TightnessDiagnostics,
}

impl BoundSet {
    pub fn compute(h_y: f64, information: f64, strength: Option<f64>, config: BoundConfig) -> Result<Self> {
        Ok(Self {
            config,
            loose_info: bound_loose(information, h_y, config.ymax),
            tight_info: bound_tight(information, h_y, &config),
            tight_strength: strength.map(|e| bound_tight(e, h_y, &config)),
            tightness: tightness_diagnostics(&config)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub h_y: f64,
    pub i_relev: f64,
    pub i_redun: f64,
    pub i_combloss: Option<f64>,
    pub ensemble_information: f64,
    pub ensemble_strength: Option<f64>,
    /// `H(Y|O)`, exact or the subset upper bound depending on `mode`.
    pub h_y_given_o: f64,
    pub h_y_given_combined: Option<f64>,
    pub per_model: PerModel,
    pub n_models: usize,
    pub mode: EstimationMode,
    pub model_order: Vec<usize>,
    /// `Pr[Ŷ ≠ Y]` when a combined column is present.
    pub error_rate: Option<f64>,
    pub bounds: BoundSet,
}

/// Metric values divided by a baseline system's ensemble strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetrics {
    pub baseline_strength: f64,
    pub i_relev: f64,
    pub i_redun: f64,
    pub i_combloss: Option<f64>,
    pub ensemble_information: f64,
    pub ensemble_strength: Option<f64>,
}

impl MetricReport {
    pub fn normalized(&self, baseline_strength: f64) -> Result<NormalizedMetrics> {
        if baseline_strength == 0.0 || !baseline_strength.is_finite() {
            return Err(Error::ZeroBaseline("normalized"));
        }
        let f = |v: f64| v / baseline_strength;
        Ok(NormalizedMetrics {
            baseline_strength,
            i_relev: f(self.i_relev),
            i_redun: f(self.i_redun),
            i_combloss: self.i_combloss.map(f),
            ensemble_information: f(self.ensemble_information),
            ensemble_strength: self.ensemble_strength.map(f),
        })
    }
}

fn entropy_of(table: &PredictionTable, cols: &[&[Label]]) -> f64 {
    columns_entropy(cols, table.ymax(), table.n_instances())
}

fn model_cols(table: &PredictionTable) -> Vec<&[Label]> {
    table.models().iter().map(Vec::as_slice).collect()
}

/// `H(Y|X) = H(X, Y) − H(X)` for raw columns `X`.
fn truth_given(table: &PredictionTable, given: &[&[Label]]) -> f64 {
    let mut with_y = given.to_vec();
    with_y.push(table.truth());
    entropy_of(table, &with_y) - entropy_of(table, given)
}

/// `I(S;Y) = H(S) + H(Y) − H(S,Y)` for raw columns `S`.
fn info_with_truth(table: &PredictionTable, cols: &[&[Label]], h_y: f64) -> f64 {
    let mut with_y = cols.to_vec();
    with_y.push(table.truth());
    (entropy_of(table, cols) + h_y) - entropy_of(table, &with_y)
}

/// `I_relev = Σ_i I(O_i; Y)`.
pub fn relevance(table: &PredictionTable) -> f64 {
    let h_y = entropy_of(table, &[table.truth()]);
    table
        .models()
        .iter()
        .map(|c| info_with_truth(table, &[c.as_slice()], h_y))
        .sum()
}

/// Exact `I_multi(O)` and `I_multi(O|Y)` from the full joint distribution.
fn exact_multi_terms(table: &PredictionTable) -> Result<(f64, f64)> {
    let n = table.n_models();
    if n == 1 {
        return Ok((0.0, 0.0));
    }
    let mut vars: Vec<Var> = (0..n).map(Var::Model).collect();
    vars.push(Var::Truth);
    let joint = estimate_joint(table, &vars)?;
    let models: Vec<usize> = (0..n).collect();
    let multi = multi_information(&joint.marginal(&models)?);
    let conditional = conditional_multi_information(&joint, &models, &[n])?;
    Ok((multi, conditional))
}

fn multi_terms(table: &PredictionTable, mode: EstimationMode) -> Result<(f64, f64)> {
    match mode.validate()?.effective(table.n_models()) {
        EstimationMode::Exact => exact_multi_terms(table),
        EstimationMode::Mti(k) => mti_multi_information_pair(table, k),
    }
}

/// `I_redun = I_multi(O) − I_multi(O|Y)`.
pub fn redundancy(table: &PredictionTable, mode: EstimationMode) -> Result<f64> {
    let (multi, conditional) = multi_terms(table, mode)?;
    Ok(multi - conditional)
}

/// `H(Y|O)` in the requested mode.
pub fn truth_entropy_given_models(table: &PredictionTable, mode: EstimationMode) -> Result<f64> {
    match mode.validate()?.effective(table.n_models()) {
        EstimationMode::Exact => Ok(truth_given(table, &model_cols(table))),
        EstimationMode::Mti(k) => mti_conditional_entropy_truth(table, k),
    }
}

/// `I_combloss = H(Y|Ŷ) − H(Y|O)`.
pub fn combination_loss(table: &PredictionTable, mode: EstimationMode) -> Result<f64> {
    let combined = table.combined().ok_or(Error::MissingCombined)?;
    Ok(truth_given(table, &[combined]) - truth_entropy_given_models(table, mode)?)
}

/// `I(O;Y)` from the full joint.
pub fn ensemble_mutual_information(table: &PredictionTable) -> f64 {
    let h_y = entropy_of(table, &[table.truth()]);
    info_with_truth(table, &model_cols(table), h_y)
}

/// Every metric of the table plus the three bounds.
pub fn analyze(table: &PredictionTable, mode: EstimationMode, bound_cfg: &BoundConfig) -> Result<MetricReport> {
    let mode = mode.validate()?.effective(table.n_models());
    let n = table.n_models();
    let h_y = entropy_of(table, &[table.truth()]);
    let i_relev = relevance(table);
    let i_redun = redundancy(table, mode)?;
    let information = i_relev - i_redun;
    let h_y_given_o = truth_entropy_given_models(table, mode)?;
    let h_y_given_combined = table.combined().map(|c| truth_given(table, &[c]));
    let i_combloss = h_y_given_combined.map(|h| h - h_y_given_o);
    let strength = i_combloss.map(|l| information - l);
    let bounds = BoundSet::compute(h_y, information, strength, *bound_cfg)?;
    let nf = n as f64;
    Ok(MetricReport {
        h_y,
        i_relev,
        i_redun,
        i_combloss,
        ensemble_information: information,
        ensemble_strength: strength,
        h_y_given_o,
        h_y_given_combined,
        per_model: PerModel {
            relev: i_relev / nf,
            redun: i_redun / nf,
            combloss: i_combloss.map(|l| l / nf),
        },
        n_models: n,
        mode,
        model_order: (0..n).collect(),
        error_rate: table.combined_error_rate().ok(),
        bounds,
    })
}

/// `(max_Ω I(Ω;Y) − min_Ω I(Ω;Y)) / I(O;Y)` over all size-`n` model subsets.
pub fn concentration(table: &PredictionTable, n: usize) -> Result<f64> {
    let total_models = table.n_models();
    if n == 0 || n > total_models {
        return Err(Error::InvalidConfig(format!(
            "concentration subset size {n} must lie in 1..={total_models}"
        )));
    }
    let full = ensemble_mutual_information(table);
    if full.abs() <= 1e-12 {
        return Err(Error::UndefinedConcentration);
    }
    let h_y = entropy_of(table, &[table.truth()]);
    let cols = model_cols(table);
    let subsets: Vec<Vec<usize>> = (0..total_models).combinations(n).collect();
    let (lo, hi) = subsets
        .par_iter()
        .map(|s| {
            let sub: Vec<&[Label]> = s.iter().map(|&i| cols[i]).collect();
            let v = info_with_truth(table, &sub, h_y);
            (v, v)
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    Ok((hi - lo) / full)
}
