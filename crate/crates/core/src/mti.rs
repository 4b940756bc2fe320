//! Subset approximations for quantities that depend on the full model
//! output vector O.
//!
//! Each prefix term `I(O_i; O_{1:i-1})` is replaced by the best size-k
//! subset of the prefix, and `H(Y|O)` by the best size-k subset of all
//! models. Subset search is exhaustive; with k = 3 and N ≤ 30 there are at
//! most C(29, 3) = 3654 subsets per term.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::columns_entropy;
use crate::table::{Label, PredictionTable};

/// How quantities involving the full O are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "snake_case")]
pub enum EstimationMode {
    Exact,
    Mti(usize),
}

impl EstimationMode {
    pub fn validate(self) -> Result<Self> {
        match self {
            EstimationMode::Mti(0) => Err(Error::InvalidSubsetSize(0)),
            m => Ok(m),
        }
    }

    /// Clamps the subset size to `n_models`; `Mti(k)` with `k ≥ N` makes
    /// every subset the full prefix.
    pub fn effective(self, n_models: usize) -> Self {
        match self {
            EstimationMode::Mti(k) => EstimationMode::Mti(k.min(n_models)),
            m => m,
        }
    }
}

struct Columns<'a> {
    models: Vec<&'a [Label]>,
    truth: &'a [Label],
    radix: u32,
    m: usize,
}

impl<'a> Columns<'a> {
    fn new(table: &'a PredictionTable) -> Self {
        Self {
            models: table.models().iter().map(Vec::as_slice).collect(),
            truth: table.truth(),
            radix: table.ymax(),
            m: table.n_instances(),
        }
    }

    fn h(&self, models: &[usize], extra: Option<usize>, with_truth: bool) -> f64 {
        let mut cols: Vec<&[Label]> = models.iter().map(|&i| self.models[i]).collect();
        if let Some(e) = extra {
            cols.push(self.models[e]);
        }
        if with_truth {
            cols.push(self.truth);
        }
        columns_entropy(&cols, self.radix, self.m)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidSubsetSize(0))
    } else {
        Ok(())
    }
}

/// Best subset information for each prefix term, unconditional and
/// conditioned on Y: `(Σ_i max_Ω I(O_i; Ω), Σ_i max_Ω I(O_i; Ω | Y))`.
///
/// Both sums share the per-subset joint entropies.
pub fn mti_multi_information_pair(table: &PredictionTable, k: usize) -> Result<(f64, f64)> {
    check_k(k)?;
    let cols = Columns::new(table);
    let n = table.n_models();
    let h_y = cols.h(&[], None, true);
    let mut multi = 0.0;
    let mut conditional = 0.0;
    for i in 1..n {
        let size = k.min(i);
        let h_i = cols.h(&[], Some(i), false);
        let h_iy = cols.h(&[], Some(i), true);
        let subsets: Vec<Vec<usize>> = (0..i).combinations(size).collect();
        let (best, best_cond) = subsets
            .par_iter()
            .map(|omega| {
                let h_o = cols.h(omega, None, false);
                let h_oi = cols.h(omega, Some(i), false);
                let h_oy = cols.h(omega, None, true);
                let h_oiy = cols.h(omega, Some(i), true);
                let mi = (h_i + h_o) - h_oi;
                let cmi = (h_iy + h_oy) - h_oiy - h_y;
                (mi, cmi)
            })
            .reduce(
                || (f64::NEG_INFINITY, f64::NEG_INFINITY),
                |a, b| (a.0.max(b.0), a.1.max(b.1)),
            );
        multi += best;
        conditional += best_cond;
    }
    Ok((multi, conditional))
}

/// `Σ_{i≥2} max_{|Ω| = min(k, i−1), Ω ⊆ O_{1:i−1}} I(O_i; Ω)`.
pub fn mti_multi_information(table: &PredictionTable, k: usize) -> Result<f64> {
    mti_multi_information_pair(table, k).map(|p| p.0)
}

/// `Σ_{i≥2} max_{|Ω| = min(k, i−1), Ω ⊆ O_{1:i−1}} I(O_i; Ω | Y)`.
pub fn mti_conditional_multi_information(table: &PredictionTable, k: usize) -> Result<f64> {
    mti_multi_information_pair(table, k).map(|p| p.1)
}

/// `min_{|Ω| = min(k, N)} H(Y|Ω)`, an upper bound on `H(Y|O)`.
pub fn mti_conditional_entropy_truth(table: &PredictionTable, k: usize) -> Result<f64> {
    check_k(k)?;
    let cols = Columns::new(table);
    let n = table.n_models();
    let subsets: Vec<Vec<usize>> = (0..n).combinations(k.min(n)).collect();
    Ok(subsets
        .par_iter()
        .map(|omega| cols.h(omega, None, true) - cols.h(omega, None, false))
        .reduce(|| f64::INFINITY, f64::min))
}
