use crate::error::{Error, Result};
use crate::table::{Label, PredictionTable};

/// Per instance, the most frequent model label; ties go to the smallest label.
pub fn majority_vote(table: &PredictionTable) -> Vec<Label> {
    let ymax = table.ymax() as usize;
    let mut counts = vec![0usize; ymax];
    (0..table.n_instances())
        .map(|j| {
            counts.iter_mut().for_each(|c| *c = 0);
            for col in table.models() {
                counts[col[j] as usize] += 1;
            }
            argmax_first(&counts)
        })
        .collect()
}

/// Per instance, the label with the largest summed model weight; ties go to
/// the smallest label.
pub fn weighted_vote(table: &PredictionTable, weights: &[f64]) -> Result<Vec<Label>> {
    if weights.len() != table.n_models() {
        return Err(Error::Dimension {
            expected: table.n_models(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidConfig("vote weights must be finite and non-negative".into()));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidConfig("vote weights are all zero".into()));
    }
    let ymax = table.ymax() as usize;
    let mut score = vec![0.0f64; ymax];
    Ok((0..table.n_instances())
        .map(|j| {
            score.iter_mut().for_each(|s| *s = 0.0);
            for (col, &w) in table.models().iter().zip(weights) {
                score[col[j] as usize] += w;
            }
            argmax_first(&score)
        })
        .collect())
}

/// Weighted vote with in-sample log-odds weights
/// `max(0, ln(acc·(ymax−1)/(1−acc)))`, using add-half smoothed accuracies.
/// Falls back to the majority vote when every weight is zero.
pub fn accuracy_weighted_vote(table: &PredictionTable) -> Vec<Label> {
    let weights = log_odds_weights(table);
    weighted_vote(table, &weights).unwrap_or_else(|_| majority_vote(table))
}

pub fn log_odds_weights(table: &PredictionTable) -> Vec<f64> {
    let m = table.n_instances() as f64;
    let others = (table.ymax().max(2) - 1) as f64;
    table
        .models()
        .iter()
        .map(|col| {
            let correct = col.iter().zip(table.truth()).filter(|(a, b)| a == b).count() as f64;
            let acc = (correct + 0.5) / (m + 1.0);
            (acc * others / (1.0 - acc)).ln().max(0.0)
        })
        .collect()
}

pub(crate) fn argmax_first<T: PartialOrd + Copy>(values: &[T]) -> Label {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best as Label
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(rows: &[&str], y: &[Label]) -> PredictionTable {
        let n = rows[0].len();
        let cols = (0..n)
            .map(|i| rows.iter().map(|r| (r.as_bytes()[i] - b'0') as Label).collect())
            .collect();
        PredictionTable::new(cols, y.to_vec(), None, 2).unwrap()
    }

    #[test]
    fn majority_examples() {
        let t = rows(&["11111", "01101", "00011"], &[1, 0, 0]);
        assert_eq!(majority_vote(&t), vec![1, 1, 0]);
        let t = rows(&["01", "10"], &[0, 0]);
        assert_eq!(majority_vote(&t), vec![0, 0]);
    }

    #[test]
    fn weighted_examples() {
        let t = rows(&["01101", "11100"], &[0, 1]);
        assert_eq!(weighted_vote(&t, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), vec![0, 1]);
        let t = rows(&["10", "01"], &[1, 0]);
        assert_eq!(weighted_vote(&t, &[2.0, 1.0]).unwrap(), vec![1, 0]);
        assert_eq!(weighted_vote(&t, &[1.0, 1.0]).unwrap(), majority_vote(&t));
    }

    #[test]
    fn weighted_errors() {
        let t = rows(&["10"], &[1]);
        assert!(weighted_vote(&t, &[0.0, 0.0]).is_err());
        assert!(weighted_vote(&t, &[1.0]).is_err());
        assert!(weighted_vote(&t, &[-1.0, 2.0]).is_err());
        assert!(weighted_vote(&t, &[f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn log_odds_prefers_accurate_models() {
        let t = rows(&["10", "01", "00", "11"], &[1, 0, 0, 1]);
        let w = log_odds_weights(&t);
        assert!(w[0] > 0.0);
        assert_eq!(w[1], 0.0);
        assert_eq!(accuracy_weighted_vote(&t), vec![1, 0, 0, 1]);
    }
}
