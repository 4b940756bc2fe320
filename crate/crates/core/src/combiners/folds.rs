use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Assignment of instances to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub assignments: Vec<usize>,
    pub n_folds: usize,
    pub seed: u64,
}

/// Shuffles `0..m` with a seeded SplitMix64 stream and deals the shuffled
/// order round-robin, so fold sizes differ by at most one.
pub fn make_fold_plan(m: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if m < folds {
        return Err(Error::TooFewInstances(format!("{m} instances for {folds} folds")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    SplitMix64::derive(seed, &[0xF01D, m as u64, folds as u64]).shuffle(&mut order);
    let mut assignments = vec![0; m];
    for (pos, &idx) in order.iter().enumerate() {
        assignments[idx] = pos % folds;
    }
    Ok(FoldPlan {
        assignments,
        n_folds: folds,
        seed,
    })
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}
