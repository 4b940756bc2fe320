//! Deterministic test systems: the four toy ensembles of the classic
//! illustration of combination loss, and a seeded generator of synthetic
//! ensembles with tunable accuracy and shared noise.

use serde::{Deserialize, Serialize};

use crate::combiners::CombinerSpec;
use crate::error::{Error, Result};
use crate::metrics::{analyze, MetricReport};
use crate::mti::EstimationMode;
use crate::bounds::BoundConfig;
use crate::rng::{probability_threshold, SplitMix64};
use crate::table::{error_rate, Label, PredictionTable};

pub const DEFAULT_REPETITIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToyVariant {
    /// Five identical, mostly correct models under majority vote.
    A,
    /// Models of unequal accuracy (O_1 best) under majority vote.
    B,
    /// The same models as B, combined by a vote that only listens to O_1.
    C,
    /// Diverse models of equal accuracy; majority vote, with a weighted vote
    /// on O_3..O_5 as the alternative.
    D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyFixture {
    pub variant: ToyVariant,
    /// Combined column filled by `combiner`.
    pub table: PredictionTable,
    pub combiner: CombinerSpec,
    /// Other combiners shown for the same models.
    pub alternatives: Vec<CombinerSpec>,
}

type Row = (&'static str, Label);

fn explicit_rows(variant: ToyVariant) -> ([Row; 3], [Row; 3]) {
    match variant {
        ToyVariant::A => (
            [("11111", 1), ("11111", 1), ("11111", 1)],
            [("00000", 0), ("11111", 0), ("00000", 0)],
        ),
        ToyVariant::B | ToyVariant::C => (
            [("11100", 1), ("11111", 1), ("10011", 1)],
            [("01101", 0), ("00000", 0), ("00011", 0)],
        ),
        ToyVariant::D => (
            [("11100", 1), ("11111", 1), ("00011", 1)],
            [("11100", 0), ("00000", 0), ("00011", 0)],
        ),
    }
}

fn combiners(variant: ToyVariant) -> (CombinerSpec, Vec<CombinerSpec>) {
    let only_first = CombinerSpec::WeightedVote {
        weights: vec![1.0, 0.0, 0.0, 0.0, 0.0],
    };
    let last_three = CombinerSpec::WeightedVote {
        weights: vec![0.0, 0.0, 1.0, 1.0, 1.0],
    };
    match variant {
        ToyVariant::A => (CombinerSpec::MajorityVote, vec![]),
        ToyVariant::B => (CombinerSpec::MajorityVote, vec![only_first]),
        ToyVariant::C => (only_first, vec![CombinerSpec::MajorityVote]),
        ToyVariant::D => (CombinerSpec::MajorityVote, vec![last_three]),
    }
}

fn parse_row(pattern: &str) -> Vec<Label> {
    pattern.bytes().map(|b| (b - b'0') as Label).collect()
}

/// A finite table realising one toy system.
///
/// The six explicit rows appear verbatim. After each block of three, the
/// distinct patterns in that block that every shown combiner gets right are
/// repeated `repetitions` times, standing in for the elided rows. B and C
/// therefore share one model matrix.
pub fn toy_table(variant: ToyVariant, repetitions: usize) -> Result<ToyFixture> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
    }
    let (designated, alternatives) = combiners(variant);
    let all: Vec<&CombinerSpec> = std::iter::once(&designated).chain(&alternatives).collect();
    let correct_everywhere = |pattern: &str, y: Label| -> Result<bool> {
        let t = PredictionTable::new(parse_row(pattern).into_iter().map(|l| vec![l]).collect(), vec![y], None, 2)?;
        for c in &all {
            if c.combine(&t)?[0] != y {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let (first, second) = explicit_rows(variant);
    let mut rows: Vec<Row> = Vec::new();
    for block in [first, second] {
        rows.extend_from_slice(&block);
        let mut filler: Vec<Row> = Vec::new();
        for &(p, y) in &block {
            if !filler.contains(&(p, y)) && correct_everywhere(p, y)? {
                filler.push((p, y));
            }
        }
        for _ in 0..repetitions {
            rows.extend_from_slice(&filler);
        }
    }
    let parsed: Vec<Vec<Label>> = rows.iter().map(|(p, _)| parse_row(p)).collect();
    let cols = (0..5).map(|i| parsed.iter().map(|r| r[i]).collect()).collect();
    let truth: Vec<Label> = rows.iter().map(|r| r.1).collect();
    let bare = PredictionTable::new(cols, truth, None, 2)?;
    let table = bare.with_combined(designated.combine(&bare)?)?;
    Ok(ToyFixture {
        variant,
        table,
        combiner: designated,
        alternatives,
    })
}

/// Parameters of a synthetic ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_models: usize,
    pub n_instances: usize,
    pub ymax: u32,
    pub per_model_error: Vec<f64>,
    /// Probability that an instance's corruption decision is shared by all
    /// models.
    pub shared_noise: f64,
    pub truth_prior: Vec<f64>,
    pub seed: u64,
}

impl SynthConfig {
    /// Uniform prior, the same error for every model.
    pub fn uniform(n_models: usize, n_instances: usize, ymax: u32, error: f64, shared_noise: f64, seed: u64) -> Self {
        Self {
            n_models,
            n_instances,
            ymax,
            per_model_error: vec![error; n_models],
            shared_noise,
            truth_prior: vec![1.0 / ymax as f64; ymax as usize],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_models == 0 || self.n_instances == 0 {
            return bad("need at least one model and one instance".into());
        }
        if self.ymax < 2 {
            return bad(format!("ymax must be at least 2, got {}", self.ymax));
        }
        if self.per_model_error.len() != self.n_models {
            return bad(format!(
                "{} error rates for {} models",
                self.per_model_error.len(),
                self.n_models
            ));
        }
        if let Some(e) = self.per_model_error.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return bad(format!("model error {e} outside [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.shared_noise) {
            return bad(format!("shared_noise {} outside [0, 1]", self.shared_noise));
        }
        if self.truth_prior.len() != self.ymax as usize
            || self.truth_prior.iter().any(|p| !(*p >= 0.0))
            || (self.truth_prior.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("truth_prior must be ymax non-negative probabilities summing to 1".into());
        }
        Ok(())
    }
}

const TRUTH_STREAM: u64 = 1;
const SHARED_STREAM: u64 = 2;
const MODEL_STREAM: u64 = 3;

/// Generates a synthetic ensemble.
///
/// Per instance `j`, the truth is drawn from `truth_prior` on stream
/// `[1, j]`. Stream `[2, j]` decides with probability `shared_noise`
/// whether corruption is shared; if so, one uniform draw `u` and one
/// wrong-label offset serve every model, and model `i` errs iff
/// `u < e_i`. Otherwise model `i` uses its own stream `[3, i, j]`.
/// A corrupted label is `(y + 1 + offset) mod ymax`, uniform over the wrong
/// labels. Models depend only on their own index, so the first `n` models
/// of a larger system form the `n`-model system.
pub fn synth_system(cfg: &SynthConfig) -> Result<PredictionTable> {
    cfg.validate()?;
    let m = cfg.n_instances;
    let wrong = (cfg.ymax - 1) as u64;
    let thresholds: Vec<u64> = cfg.per_model_error.iter().map(|&e| probability_threshold(e)).collect();
    let mut truth = Vec::with_capacity(m);
    let mut models = vec![Vec::with_capacity(m); cfg.n_models];
    for j in 0..m {
        let y = SplitMix64::derive(cfg.seed, &[TRUTH_STREAM, j as u64]).categorical(&cfg.truth_prior) as Label;
        truth.push(y);
        let mut shared = SplitMix64::derive(cfg.seed, &[SHARED_STREAM, j as u64]);
        let is_shared = shared.bernoulli(cfg.shared_noise);
        let shared_u = shared.next_u64();
        let shared_offset = shared.below(wrong);
        for (i, col) in models.iter_mut().enumerate() {
            let mut own = SplitMix64::derive(cfg.seed, &[MODEL_STREAM, i as u64, j as u64]);
            let own_u = own.next_u64();
            let own_offset = own.below(wrong);
            let (u, offset) = if is_shared { (shared_u, shared_offset) } else { (own_u, own_offset) };
            let label = if u < thresholds[i] {
                ((y as u64 + 1 + offset) % cfg.ymax as u64) as Label
            } else {
                y
            };
            col.push(label);
        }
    }
    PredictionTable::new(models, truth, None, cfg.ymax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_models: usize,
    pub error_rate: f64,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub p0: f64,
    pub points: Vec<ScalingPoint>,
}

/// Metrics of nested systems with `n_values` models.
///
/// The largest system is generated once from `template` (whose
/// `per_model_error` must cover the largest N) and each point keeps its
/// first N models. Without `p0`, the first point's error rate anchors the
/// tight bound.
pub fn scaling_sweep(
    template: &SynthConfig,
    n_values: &[usize],
    combiner: &CombinerSpec,
    mode: EstimationMode,
    p0: Option<f64>,
) -> Result<ScalingSeries> {
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) || n_values[0] == 0 {
        return Err(Error::InvalidConfig("n_values must be positive and strictly ascending".into()));
    }
    let n_max = *n_values.last().unwrap();
    let mut cfg = template.clone();
    if cfg.per_model_error.len() < n_max {
        return Err(Error::InvalidConfig(format!(
            "template has {} error rates, sweep needs {n_max}",
            cfg.per_model_error.len()
        )));
    }
    cfg.per_model_error.truncate(n_max);
    cfg.n_models = n_max;
    let full = synth_system(&cfg)?;
    let combined: Vec<(usize, PredictionTable, f64)> = n_values
        .iter()
        .map(|&n| {
            let sub = full.select_models(&(0..n).collect::<Vec<_>>())?;
            let yhat = combiner.combine(&sub)?;
            let er = error_rate(&yhat, sub.truth());
            Ok((n, sub.with_combined(yhat)?, er))
        })
        .collect::<Result<_>>()?;
    let p0 = p0.unwrap_or(combined[0].2);
    let bound = BoundConfig::new(p0, cfg.ymax)?;
    let points = combined
        .into_iter()
        .map(|(n, table, er)| {
            Ok(ScalingPoint {
                n_models: n,
                error_rate: er,
                report: analyze(&table, mode, &bound)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScalingSeries { p0, points })
}
