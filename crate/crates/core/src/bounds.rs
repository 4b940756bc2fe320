//! Fano-derived error-rate lower bounds, tightness diagnostics and the
//! reduction/correlation arithmetic used to compare systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature of the tangent quadratic that upper-bounds `H2` at `p0`.
/// `H2'' ≤ −4/ln 2 < −4`, so 4 is admissible.
pub const CURVATURE: f64 = 4.0;

fn check_unit(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value: p,
            domain: "[0, 1]",
        })
    }
}

fn check_open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value: p,
            domain: "(0, 1)",
        })
    }
}

/// `H2(p) = −p log2 p − (1−p) log2 (1−p)`, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_unit("p", p)?;
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// `U(p) = H2(p) + p log2 (ymax − 1)`, the Fano upper bound on `H(Y|Ŷ)`.
pub fn u_func(p: f64, ymax: u32) -> Result<f64> {
    check_ymax(ymax)?;
    Ok(binary_entropy(p)? + p * log2_classes_minus_one(ymax))
}

/// `U'(p) = log2 ((1−p)/p) + log2 (ymax − 1)`; undefined at 0 and 1.
pub fn u_prime(p: f64, ymax: u32) -> Result<f64> {
    check_ymax(ymax)?;
    check_open_unit("p", p)?;
    Ok(((1.0 - p) / p).log2() + log2_classes_minus_one(ymax))
}

fn log2_classes_minus_one(ymax: u32) -> f64 {
    ((ymax - 1) as f64).log2()
}

fn check_ymax(ymax: u32) -> Result<()> {
    if ymax >= 2 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name: "ymax",
            value: ymax as f64,
            domain: "integers >= 2",
        })
    }
}

/// Loose bound `B(I) = (H(Y) − I − 1) / log2 ymax`, returned unclamped.
pub fn bound_loose(info: f64, h_y: f64, ymax: u32) -> f64 {
    (h_y - info - 1.0) / (ymax as f64).log2()
}

/// Anchor error rate and class count for the tight bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub p0: f64,
    pub ymax: u32,
}

impl BoundConfig {
    pub fn new(p0: f64, ymax: u32) -> Result<Self> {
        check_open_unit("p0", p0)?;
        check_ymax(ymax)?;
        Ok(Self { p0, ymax })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDiagnostic {
    Ok,
    NegativeDiscriminant,
    ZeroSlopeHandled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// The bound; NaN when undefined.
    pub value: f64,
    pub defined: bool,
    pub diagnostic: BoundDiagnostic,
}

impl BoundResult {
    pub fn value(&self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}

/// Tight bound `B^tight_{p0}(E)`.
///
/// Fano gives `H(Y) − E ≤ U(p_err)`, and the tangent quadratic at `p0`
/// with curvature 4 upper-bounds `U`, so every feasible `x = p_err − p0`
/// satisfies `2x² − U'(p0)·x + (H(Y) − E − U(p0)) ≤ 0`. The bound is `p0`
/// plus the smaller root. The root is computed in a cancellation-free form
/// that stays finite when `U'(p0) = 0`.
pub fn bound_tight(strength: f64, h_y: f64, cfg: &BoundConfig) -> BoundResult {
    let u0 = u_func(cfg.p0, cfg.ymax).expect("validated config");
    let slope = u_prime(cfg.p0, cfg.ymax).expect("validated config");
    let c = h_y - strength - u0;
    let a = CURVATURE / 2.0;
    let disc = slope * slope - 4.0 * a * c;
    if disc < 0.0 || disc.is_nan() {
        return BoundResult {
            value: f64::NAN,
            defined: false,
            diagnostic: BoundDiagnostic::NegativeDiscriminant,
        };
    }
    let sq = disc.sqrt();
    let x = if slope > 0.0 {
        // product of roots is c/a; the larger root is (slope + sq)/(2a)
        2.0 * c / (slope + sq)
    } else {
        (slope - sq) / (2.0 * a)
    };
    let diagnostic = if slope == 0.0 {
        BoundDiagnostic::ZeroSlopeHandled
    } else {
        BoundDiagnostic::Ok
    };
    BoundResult {
        value: cfg.p0 + x,
        defined: true,
        diagnostic,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P0Regime {
    /// `p0 ≤ (ymax−1)/(2ymax−1)`: tightness holds while the bound stays
    /// below `p0 + Δ−`.
    MildP0,
    /// Tightness holds while the bound stays above `p0 + Δ−`.
    LargeP0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessDiagnostics {
    pub tau: f64,
    /// `1 − c / (2τ²)`; negative (or −∞ at τ = 0) when there are no crossovers.
    pub radicand: f64,
    /// Offsets Δ (ascending) from `p0` at which `B^tight = B`; `None` when
    /// `always_tight`.
    pub delta_roots: Option<(f64, f64)>,
    pub regime: P0Regime,
    /// `B^tight ≥ B` for every E.
    pub always_tight: bool,
}

/// Where the tight bound beats the loose one.
///
/// With `x = B^tight(E) − p0`, `B^tight(E) ≥ B(E)` is equivalent to
/// `2x² − 4τx + c ≥ 0`, where
/// `τ = (H2'(p0) − log2 (ymax/(ymax−1))) / 4` and
/// `c = 1 − H2(p0) + p0 log2 (ymax/(ymax−1))`.
/// Its roots are `Δ = τ(1 ± sqrt(1 − c/(2τ²)))`.
pub fn tightness_diagnostics(cfg: &BoundConfig) -> Result<TightnessDiagnostics> {
    check_open_unit("p0", cfg.p0)?;
    check_ymax(cfg.ymax)?;
    let p0 = cfg.p0;
    let ymax = cfg.ymax as f64;
    let gain = (ymax / (ymax - 1.0)).log2();
    let h2_slope = ((1.0 - p0) / p0).log2();
    let tau = (h2_slope - gain) / 4.0;
    let c = 1.0 - binary_entropy(p0)? + p0 * gain;
    let radicand = if tau == 0.0 {
        f64::NEG_INFINITY
    } else {
        1.0 - c / (2.0 * tau * tau)
    };
    let delta_roots = (radicand >= 0.0).then(|| {
        let s = radicand.sqrt();
        let (a, b) = (tau * (1.0 - s), tau * (1.0 + s));
        (a.min(b), a.max(b))
    });
    let threshold = (ymax - 1.0) / (2.0 * ymax - 1.0);
    let regime = if p0 <= threshold {
        P0Regime::MildP0
    } else {
        P0Regime::LargeP0
    };
    Ok(TightnessDiagnostics {
        tau,
        radicand,
        delta_roots,
        regime,
        always_tight: delta_roots.is_none(),
    })
}

/// `(er_baseline − er_system) / er_baseline × 100`.
pub fn error_rate_reduction(er_baseline: f64, er_system: f64) -> Result<f64> {
    if er_baseline == 0.0 {
        return Err(Error::ZeroBaseline("error_rate_reduction"));
    }
    Ok((er_baseline - er_system) / er_baseline * 100.0)
}

/// `(lb_baseline − lb_system) / |lb_baseline| × 100`.
pub fn lower_bound_reduction(lb_baseline: f64, lb_system: f64) -> Result<f64> {
    if lb_baseline == 0.0 {
        return Err(Error::ZeroBaseline("lower_bound_reduction"));
    }
    Ok((lb_baseline - lb_system) / lb_baseline.abs() * 100.0)
}

/// Product-moment correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("pearson needs at least two points".into()));
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
