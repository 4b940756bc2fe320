//! Prediction tables: N model label columns, a truth column and an optional
//! combined column over M instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 0-based class index, always `< ymax` of the owning table.
pub type Label = u32;

/// Selects one discrete variable of a [`PredictionTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Model(usize),
    Truth,
    Combined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionTable {
    model_labels: Vec<Vec<Label>>,
    truth: Vec<Label>,
    combined: Option<Vec<Label>>,
    ymax: u32,
}

impl PredictionTable {
    /// Builds a table, checking every shape and label-range invariant.
    pub fn new(
        model_labels: Vec<Vec<Label>>,
        truth: Vec<Label>,
        combined: Option<Vec<Label>>,
        ymax: u32,
    ) -> Result<Self> {
        if ymax == 0 {
            return Err(Error::InvalidTable("ymax must be positive".into()));
        }
        if model_labels.is_empty() {
            return Err(Error::InvalidTable("at least one model column is required".into()));
        }
        let m = truth.len();
        if m == 0 {
            return Err(Error::InvalidTable("at least one instance is required".into()));
        }
        for (i, col) in model_labels.iter().enumerate() {
            if col.len() != m {
                return Err(Error::InvalidTable(format!(
                    "model {i} has {} labels, truth has {m}",
                    col.len()
                )));
            }
        }
        if let Some(c) = &combined {
            if c.len() != m {
                return Err(Error::InvalidTable(format!(
                    "combined column has {} labels, truth has {m}",
                    c.len()
                )));
            }
        }
        let check = |name: &str, col: &[Label]| -> Result<()> {
            match col.iter().position(|&l| l >= ymax) {
                Some(j) => Err(Error::InvalidTable(format!(
                    "{name} label {} at instance {j} is not below ymax = {ymax}",
                    col[j]
                ))),
                None => Ok(()),
            }
        };
        check("truth", &truth)?;
        for (i, col) in model_labels.iter().enumerate() {
            check(&format!("model {i}"), col)?;
        }
        if let Some(c) = &combined {
            check("combined", c)?;
        }
        Ok(Self {
            model_labels,
            truth,
            combined,
            ymax,
        })
    }

    pub fn n_models(&self) -> usize {
        self.model_labels.len()
    }

    pub fn n_instances(&self) -> usize {
        self.truth.len()
    }

    pub fn ymax(&self) -> u32 {
        self.ymax
    }

    pub fn truth(&self) -> &[Label] {
        &self.truth
    }

    pub fn model(&self, i: usize) -> &[Label] {
        &self.model_labels[i]
    }

    pub fn models(&self) -> &[Vec<Label>] {
        &self.model_labels
    }

    pub fn combined(&self) -> Option<&[Label]> {
        self.combined.as_deref()
    }

    /// Model labels of instance `j`, in column order.
    pub fn row(&self, j: usize) -> Vec<Label> {
        self.model_labels.iter().map(|c| c[j]).collect()
    }

    pub fn column(&self, var: Var) -> Result<&[Label]> {
        match var {
            Var::Model(i) => self
                .model_labels
                .get(i)
                .map(Vec::as_slice)
                .ok_or(Error::ModelIndex {
                    index: i,
                    n_models: self.n_models(),
                }),
            Var::Truth => Ok(&self.truth),
            Var::Combined => self.combined().ok_or(Error::MissingCombined),
        }
    }

    /// Returns a copy of the table with `combined` replaced.
    pub fn with_combined(&self, combined: Vec<Label>) -> Result<Self> {
        Self::new(
            self.model_labels.clone(),
            self.truth.clone(),
            Some(combined),
            self.ymax,
        )
    }

    /// Returns a table restricted to the listed models (in the given order).
    pub fn select_models(&self, indices: &[usize]) -> Result<Self> {
        let cols = indices
            .iter()
            .map(|&i| self.column(Var::Model(i)).map(<[Label]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cols, self.truth.clone(), self.combined.clone(), self.ymax)
    }

    /// Returns a table with the same columns but a different class count.
    pub fn with_ymax(&self, ymax: u32) -> Result<Self> {
        Self::new(
            self.model_labels.clone(),
            self.truth.clone(),
            self.combined.clone(),
            ymax,
        )
    }

    /// Fraction of instances where the combined column disagrees with truth.
    pub fn combined_error_rate(&self) -> Result<f64> {
        let c = self.combined().ok_or(Error::MissingCombined)?;
        Ok(error_rate(c, &self.truth))
    }
}

/// Fraction of positions where `pred` and `truth` differ.
pub fn error_rate(pred: &[Label], truth: &[Label]) -> f64 {
    debug_assert_eq!(pred.len(), truth.len());
    let wrong = pred.iter().zip(truth).filter(|(p, t)| p != t).count();
    wrong as f64 / truth.len() as f64
}
