//! Two-layer stacking with a logistic-regression meta-estimator.
//!
//! The meta-feature rows are the model labels of each instance. Outer
//! l-fold cross-validation yields a label-leak-free prediction for every
//! instance: each fold is predicted by an estimator trained only on the
//! other folds, with the regularisation strength picked by inner
//! cross-validation on those same training folds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{make_fold_plan, FoldPlan};
use super::logreg::{encode_row, predict_logreg, train_logreg, FeatureEncoding, MetaEstimator};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::table::{Label, PredictionTable};

/// C values searched by the inner cross-validation.
pub const DEFAULT_C_GRID: [f64; 5] = [1e-2, 3e-2, 1e-1, 3e-1, 1e0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingConfig {
    pub meta_folds: usize,
    pub inner_folds: usize,
    pub c_grid: Vec<f64>,
    pub seed: u64,
    /// `None` picks raw labels for binary tasks and one-hot otherwise.
    pub encoding: Option<FeatureEncoding>,
}

impl Default for StackingConfig {
    fn default() -> Self {
        Self {
            meta_folds: 4,
            inner_folds: 5,
            c_grid: DEFAULT_C_GRID.to_vec(),
            seed: 0,
            encoding: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingOutcome {
    pub predictions: Vec<Label>,
    pub plan: FoldPlan,
    /// Selected C per outer fold.
    pub chosen_c: Vec<f64>,
    /// Estimator trained on each outer fold's training set.
    pub estimators: Vec<MetaEstimator>,
}

fn fit_and_score(
    features: &[Vec<f64>],
    labels: &[Label],
    train: &[usize],
    test: &[usize],
    ymax: u32,
    c: f64,
    encoding: FeatureEncoding,
) -> Result<usize> {
    let x: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
    let y: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
    let est = train_logreg(&x, &y, ymax, c, encoding)?;
    let mut correct = 0;
    for &i in test {
        if predict_logreg(&est, &features[i])? == labels[i] {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Picks the C with the most correct inner-CV predictions over `train`;
/// ties go to the earliest grid entry.
fn select_c(
    features: &[Vec<f64>],
    labels: &[Label],
    train: &[usize],
    ymax: u32,
    cfg: &StackingConfig,
    encoding: FeatureEncoding,
    fold: usize,
) -> Result<f64> {
    let inner_seed = SplitMix64::derive(cfg.seed, &[0x1AAE, fold as u64]).next_u64();
    let plan = make_fold_plan(train.len(), cfg.inner_folds, inner_seed)?;
    let mut best = (0usize, cfg.c_grid[0]);
    let mut first = true;
    for &c in &cfg.c_grid {
        let mut correct = 0;
        for f in 0..cfg.inner_folds {
            let inner_train: Vec<usize> = plan.train_indices(f).into_iter().map(|i| train[i]).collect();
            let inner_test: Vec<usize> = plan.test_indices(f).into_iter().map(|i| train[i]).collect();
            correct += fit_and_score(features, labels, &inner_train, &inner_test, ymax, c, encoding)?;
        }
        if first || correct > best.0 {
            best = (correct, c);
            first = false;
        }
    }
    Ok(best.1)
}

/// Full stacking run, returning the fold plan and per-fold estimators.
pub fn stacking_run(table: &PredictionTable, cfg: &StackingConfig) -> Result<StackingOutcome> {
    let m = table.n_instances();
    if cfg.meta_folds < 2 || cfg.inner_folds < 2 {
        return Err(Error::InvalidConfig("stacking needs at least 2 outer and 2 inner folds".into()));
    }
    if cfg.c_grid.is_empty() || cfg.c_grid.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::InvalidConfig("C grid must be non-empty and positive".into()));
    }
    if m < 2 * cfg.meta_folds {
        return Err(Error::TooFewInstances(format!(
            "{m} instances for {} meta folds (need at least {})",
            cfg.meta_folds,
            2 * cfg.meta_folds
        )));
    }
    let ymax = table.ymax().max(2);
    let encoding = cfg.encoding.unwrap_or_else(|| FeatureEncoding::default_for(ymax));
    let features = (0..m)
        .map(|j| encode_row(&table.row(j), ymax, encoding))
        .collect::<Result<Vec<_>>>()?;
    let labels = table.truth();
    let plan = make_fold_plan(m, cfg.meta_folds, cfg.seed)?;
    let smallest_train = m - plan.fold_sizes().into_iter().max().unwrap_or(0);
    if smallest_train < cfg.inner_folds {
        return Err(Error::TooFewInstances(format!(
            "outer training folds of {smallest_train} instances cannot be split into {} inner folds",
            cfg.inner_folds
        )));
    }

    type FoldOutcome = (f64, MetaEstimator, Vec<(usize, Label)>);
    let per_fold = (0..cfg.meta_folds)
        .into_par_iter()
        .map(|f| -> Result<FoldOutcome> {
            let train = plan.train_indices(f);
            let c = select_c(&features, labels, &train, ymax, cfg, encoding, f)?;
            let x: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
            let y: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            let est = train_logreg(&x, &y, ymax, c, encoding)?;
            let preds = plan
                .test_indices(f)
                .into_iter()
                .map(|i| predict_logreg(&est, &features[i]).map(|p| (i, p)))
                .collect::<Result<Vec<_>>>()?;
            Ok((c, est, preds))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut predictions = vec![0; m];
    let mut chosen_c = Vec::with_capacity(cfg.meta_folds);
    let mut estimators = Vec::with_capacity(cfg.meta_folds);
    for (c, est, preds) in per_fold {
        for (i, p) in preds {
            predictions[i] = p;
        }
        chosen_c.push(c);
        estimators.push(est);
    }
    Ok(StackingOutcome {
        predictions,
        plan,
        chosen_c,
        estimators,
    })
}

/// Label-leak-free stacked predictions for every instance.
pub fn stacking_combine(table: &PredictionTable, cfg: &StackingConfig) -> Result<Vec<Label>> {
    stacking_run(table, cfg).map(|o| o.predictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiners::majority_vote;
    use crate::table::error_rate;

    fn noisy_table(seed: u64) -> PredictionTable {
        let mut r = SplitMix64::new(seed);
        let y: Vec<Label> = (0..120).map(|_| r.below(2) as Label).collect();
        let models = [0.1, 0.35, 0.4]
            .iter()
            .map(|&e| y.iter().map(|&v| if r.bernoulli(e) { 1 - v } else { v }).collect())
            .collect();
        PredictionTable::new(models, y, None, 2).unwrap()
    }

    #[test]
    fn perfect_model_gives_zero_error() {
        let t = noisy_table(1);
        let mut models = t.models().to_vec();
        models.push(t.truth().to_vec());
        let t = PredictionTable::new(models, t.truth().to_vec(), None, 2).unwrap();
        let weak = StackingConfig {
            c_grid: vec![1.0],
            ..StackingConfig::default()
        };
        assert_eq!(stacking_combine(&t, &weak).unwrap(), t.truth());
        // heavier shrinkage can let the three noisy votes outweigh it
        let p = stacking_combine(&t, &StackingConfig::default()).unwrap();
        assert!(error_rate(&p, t.truth()) < 0.05);
    }

    #[test]
    fn identical_models_match_voting() {
        let t = noisy_table(2);
        let t = PredictionTable::new(vec![t.model(0).to_vec(); 3], t.truth().to_vec(), None, 2).unwrap();
        let p = stacking_combine(&t, &StackingConfig::default()).unwrap();
        assert_eq!(p, majority_vote(&t));
    }

    #[test]
    fn deterministic() {
        let t = noisy_table(3);
        let cfg = StackingConfig { seed: 17, ..Default::default() };
        assert_eq!(stacking_run(&t, &cfg).unwrap(), stacking_run(&t, &cfg).unwrap());
    }

    #[test]
    fn fold_predictions_ignore_their_own_labels() {
        let t = noisy_table(4);
        let cfg = StackingConfig { seed: 5, ..Default::default() };
        let base = stacking_run(&t, &cfg).unwrap();
        for f in 0..cfg.meta_folds {
            let held_out = base.plan.test_indices(f);
            let mut y = t.truth().to_vec();
            for &i in &held_out {
                y[i] = 1 - y[i];
            }
            let perturbed = PredictionTable::new(t.models().to_vec(), y, None, 2).unwrap();
            let out = stacking_run(&perturbed, &cfg).unwrap();
            assert_eq!(out.plan, base.plan);
            for &i in &held_out {
                assert_eq!(out.predictions[i], base.predictions[i]);
            }
        }
    }

    #[test]
    fn too_few_instances() {
        let t = PredictionTable::new(vec![vec![0, 1, 0, 1, 1, 0, 1]], vec![0, 1, 0, 1, 1, 0, 1], None, 2).unwrap();
        assert!(matches!(stacking_combine(&t, &StackingConfig::default()), Err(Error::TooFewInstances(_))));
        let cfg = StackingConfig { c_grid: vec![], ..Default::default() };
        assert!(stacking_combine(&noisy_table(1), &cfg).is_err());
    }
}
