//! Combination functions mapping model outputs O to a final prediction Ŷ.

mod folds;
mod logreg;
mod stacking;
mod vote;

use serde::{Deserialize, Serialize};

pub use folds::{make_fold_plan, FoldPlan};
pub use logreg::{
    encode_row, group_weight, ovr_objective, predict_logreg, train_logreg, FeatureEncoding, MetaEstimator,
    GRADIENT_TOLERANCE, MAX_ITERATIONS,
};
pub use stacking::{stacking_combine, stacking_run, StackingConfig, StackingOutcome, DEFAULT_C_GRID};
pub use vote::{accuracy_weighted_vote, log_odds_weights, majority_vote, weighted_vote};

use crate::error::Result;
use crate::table::{Label, PredictionTable};

/// A combiner that can be applied to any table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CombinerSpec {
    MajorityVote,
    /// Fixed per-model weights; tables with fewer models use the leading
    /// entries.
    WeightedVote { weights: Vec<f64> },
    /// Weighted vote with in-sample log-odds weights.
    AccuracyWeightedVote,
    Stacking(StackingConfig),
}

impl CombinerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CombinerSpec::MajorityVote => "vote",
            CombinerSpec::WeightedVote { .. } => "weighted-vote",
            CombinerSpec::AccuracyWeightedVote => "accuracy-weighted-vote",
            CombinerSpec::Stacking(_) => "stacking",
        }
    }

    pub fn combine(&self, table: &PredictionTable) -> Result<Vec<Label>> {
        match self {
            CombinerSpec::MajorityVote => Ok(majority_vote(table)),
            CombinerSpec::WeightedVote { weights } => {
                let n = table.n_models().min(weights.len());
                weighted_vote(table, &weights[..n])
            }
            CombinerSpec::AccuracyWeightedVote => Ok(accuracy_weighted_vote(table)),
            CombinerSpec::Stacking(cfg) => stacking_combine(table, cfg),
        }
    }
}
