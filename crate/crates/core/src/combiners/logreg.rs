//! One-vs-rest L2-regularised logistic regression used as the stacking
//! meta-estimator.
//!
//! Each class `c` gets its own sigmoid `p_c = σ(w⁰_c + Σ_m wᵐ_c x_m)` and
//! the predicted class is the one with the largest `p_c`. Per class the
//! objective is the mean logistic loss plus `‖w‖² / (2 C M)` (the intercept
//! is unpenalised), which has the same minimiser as `½‖w‖² + C Σ loss`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::vote::argmax_first;
use crate::error::{Error, Result};
use crate::table::Label;

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureEncoding {
    /// One feature per model, the raw label in {0, 1}; binary tasks only.
    RawBinary,
    /// `ymax` indicator features per model.
    OneHot,
}

impl FeatureEncoding {
    pub fn default_for(ymax: u32) -> Self {
        if ymax == 2 {
            FeatureEncoding::RawBinary
        } else {
            FeatureEncoding::OneHot
        }
    }
}

/// Feature vector for one instance's model labels.
pub fn encode_row(labels: &[Label], ymax: u32, encoding: FeatureEncoding) -> Result<Vec<f64>> {
    match encoding {
        FeatureEncoding::RawBinary => {
            if ymax != 2 {
                return Err(Error::InvalidConfig("raw binary encoding needs ymax = 2".into()));
            }
            Ok(labels.iter().map(|&l| l as f64).collect())
        }
        FeatureEncoding::OneHot => {
            let k = ymax as usize;
            let mut out = vec![0.0; labels.len() * k];
            for (m, &l) in labels.iter().enumerate() {
                out[m * k + l as usize] = 1.0;
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaEstimator {
    /// Per-class `w⁰_c`; `-inf` for classes absent from the training labels.
    pub intercepts: Vec<f64>,
    /// Per-class × per-feature `wᵐ_c`.
    pub weights: Vec<Vec<f64>>,
    pub feature_encoding: FeatureEncoding,
    pub c_reg: f64,
    /// Training labels held a single class; the estimator predicts it always.
    pub degenerate: bool,
    /// Newton iterations used per trained class.
    pub iterations: Vec<usize>,
}

impl MetaEstimator {
    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.intercepts.len()
    }

    /// `l_c = w⁰_c + Σ_m wᵐ_c x_m` for every class.
    pub fn logits(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(self
            .intercepts
            .iter()
            .zip(&self.weights)
            .map(|(&b, w)| b + w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>())
            .collect())
    }
}

/// Argmax over classes of `σ(l_c)`, ties to the smallest label. `σ` is
/// strictly increasing, so the logits are compared directly; this keeps
/// saturated probabilities from producing spurious ties.
pub fn predict_logreg(est: &MetaEstimator, row: &[f64]) -> Result<Label> {
    Ok(argmax_first(&est.logits(row)?))
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Distinct feature rows with their positive/negative counts for one class.
struct Grouped<'a> {
    rows: Vec<&'a [f64]>,
    pos: Vec<f64>,
    total: Vec<f64>,
    m: f64,
}

/// Regularised one-vs-rest objective for a single class, as minimised by
/// [`train_logreg`]. Exposed so that training can be checked against an
/// independent search.
pub fn ovr_objective(features: &[Vec<f64>], targets: &[bool], c_reg: f64, intercept: f64, weights: &[f64]) -> f64 {
    let m = features.len() as f64;
    let loss: f64 = features
        .iter()
        .zip(targets)
        .map(|(x, &t)| {
            let z = intercept + weights.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            if t {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    loss / m + weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * c_reg * m)
}

impl Grouped<'_> {
    fn objective(&self, theta: &[f64], lambda: f64) -> f64 {
        let mut loss = 0.0;
        for ((x, &p), &n) in self.rows.iter().zip(&self.pos).zip(&self.total) {
            let z = linear(theta, x);
            loss += p * softplus(-z) + (n - p) * softplus(z);
        }
        loss / self.m + 0.5 * lambda * theta[1..].iter().map(|w| w * w).sum::<f64>()
    }

    fn gradient_hessian(&self, theta: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
        let d = theta.len();
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d * d];
        for ((x, &p), &n) in self.rows.iter().zip(&self.pos).zip(&self.total) {
            let s = sigmoid(linear(theta, x));
            let r = (n * s - p) / self.m;
            let wgt = n * s * (1.0 - s) / self.m;
            let xt = |i: usize| if i == 0 { 1.0 } else { x[i - 1] };
            for i in 0..d {
                let xi = xt(i);
                if xi == 0.0 {
                    continue;
                }
                g[i] += r * xi;
                for j in 0..=i {
                    h[i * d + j] += wgt * xi * xt(j);
                }
            }
        }
        for i in 1..d {
            g[i] += lambda * theta[i];
            h[i * d + i] += lambda;
        }
        for i in 0..d {
            for j in 0..i {
                h[j * d + i] = h[i * d + j];
            }
        }
        (g, h)
    }
}

fn linear(theta: &[f64], x: &[f64]) -> f64 {
    theta[0] + theta[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

/// Solves `H d = b` for symmetric positive definite `H` (row-major, n×n).
fn cholesky_solve(h: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

/// Damped Newton with Armijo backtracking from θ = 0. Stops when the
/// gradient norm drops to [`GRADIENT_TOLERANCE`] or after
/// [`MAX_ITERATIONS`] steps.
fn fit_class(data: &Grouped<'_>, d: usize, lambda: f64) -> (Vec<f64>, usize) {
    let mut theta = vec![0.0; d + 1];
    let mut f = data.objective(&theta, lambda);
    for iter in 0..MAX_ITERATIONS {
        let (g, mut h) = data.gradient_hessian(&theta, lambda);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= GRADIENT_TOLERANCE {
            return (theta, iter);
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut dir = cholesky_solve(&h, &neg_g);
        if dir.is_none() {
            for i in 0..=d {
                h[i * (d + 1) + i] += 1e-8;
            }
            dir = cholesky_solve(&h, &neg_g);
        }
        let dir = dir.unwrap_or(neg_g);
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, v)| t + step * v).collect();
            let ft = data.objective(&trial, lambda);
            if ft <= f + 1e-4 * step * slope {
                theta = trial;
                f = ft;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return (theta, iter + 1);
        }
    }
    (theta, MAX_ITERATIONS)
}

/// Trains one sigmoid per class on `features` (rows) and `labels`.
pub fn train_logreg(
    features: &[Vec<f64>],
    labels: &[Label],
    ymax: u32,
    c_reg: f64,
    encoding: FeatureEncoding,
) -> Result<MetaEstimator> {
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: features.len(),
        });
    }
    if features.is_empty() {
        return Err(Error::TooFewInstances("no training rows".into()));
    }
    if !(c_reg > 0.0) || !c_reg.is_finite() {
        return Err(Error::InvalidConfig(format!("c_reg must be positive, got {c_reg}")));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= ymax) {
        return Err(Error::InvalidConfig(format!("label {l} is not below ymax = {ymax}")));
    }
    let d = features[0].len();
    if let Some(r) = features.iter().find(|r| r.len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: r.len(),
        });
    }
    let k = ymax as usize;
    let m = features.len();

    let mut groups: BTreeMap<Vec<u64>, (usize, Vec<f64>)> = BTreeMap::new();
    for (i, (row, &y)) in features.iter().zip(labels).enumerate() {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        let entry = groups.entry(key).or_insert_with(|| (i, vec![0.0; k]));
        entry.1[y as usize] += 1.0;
    }
    let rows: Vec<&[f64]> = groups.values().map(|(i, _)| features[*i].as_slice()).collect();
    let total: Vec<f64> = groups.values().map(|(_, c)| c.iter().sum()).collect();
    let class_count: Vec<f64> = (0..k)
        .map(|c| groups.values().map(|(_, cnt)| cnt[c]).sum())
        .collect();
    let present: Vec<bool> = class_count.iter().map(|&c| c > 0.0).collect();
    let n_present = present.iter().filter(|&&p| p).count();

    let mut intercepts = vec![f64::NEG_INFINITY; k];
    let mut weights = vec![vec![0.0; d]; k];
    let mut iterations = vec![0; k];
    if n_present == 1 {
        let c = present.iter().position(|&p| p).unwrap();
        intercepts[c] = 0.0;
        return Ok(MetaEstimator {
            intercepts,
            weights,
            feature_encoding: encoding,
            c_reg,
            degenerate: true,
            iterations,
        });
    }

    let lambda = 1.0 / (c_reg * m as f64);
    let fit = |c: usize| {
        let data = Grouped {
            rows: rows.clone(),
            pos: groups.values().map(|(_, cnt)| cnt[c]).collect(),
            total: total.clone(),
            m: m as f64,
        };
        fit_class(&data, d, lambda)
    };
    if k == 2 {
        // The class-0 problem is the class-1 problem with every sign flipped.
        let (theta, it) = fit(1);
        intercepts = vec![-theta[0], theta[0]];
        weights = vec![theta[1..].iter().map(|w| -w).collect(), theta[1..].to_vec()];
        iterations = vec![it, it];
    } else {
        for c in (0..k).filter(|&c| present[c]) {
            let (theta, it) = fit(c);
            intercepts[c] = theta[0];
            weights[c] = theta[1..].to_vec();
            iterations[c] = it;
        }
    }
    Ok(MetaEstimator {
        intercepts,
        weights,
        feature_encoding: encoding,
        c_reg,
        degenerate: false,
        iterations,
    })
}

/// Per-group `W_t = Σ_{m ∈ M_t} |wᵐ_{c=1}|` for a binary raw-label estimator.
/// `groups[m]` is the group id of model `m`; the result is indexed by id.
pub fn group_weight(est: &MetaEstimator, groups: &[usize]) -> Result<Vec<f64>> {
    if est.n_classes() != 2 || est.feature_encoding != FeatureEncoding::RawBinary {
        return Err(Error::InvalidConfig(
            "group weights need a binary estimator on raw labels".into(),
        ));
    }
    if groups.len() != est.n_features() {
        return Err(Error::Dimension {
            expected: est.n_features(),
            got: groups.len(),
        });
    }
    let n_groups = groups.iter().max().map_or(0, |g| g + 1);
    let mut out = vec![0.0; n_groups];
    for (&g, w) in groups.iter().zip(&est.weights[1]) {
        out[g] += w.abs();
    }
    Ok(out)
}
