//! Spectral initializers.
//!
//! Each initializer builds a weighted data matrix `(1/n) Σ w_k α_k α_k*`,
//! takes its leading eigenvector `ν` by power iteration and returns
//! `z₀ = λ₀ ν`, where `λ₀` is a norm estimate. The variants differ only in
//! the weights and in how `λ₀` is estimated.

use crate::ensemble::{estimate_norm, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{power_leading, HermitianQMatrix, DEFAULT_POWER_ITERS};
use crate::quat::QVector;
use crate::solvers::Algorithm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    /// `ψ_k^γ` on the `|S|` largest amplitudes, zero elsewhere.
    WeightedMaxCorr,
    /// `ψ_k` restricted to `α_ℓ λ₀ < ψ_k < α_u λ₀`.
    Truncated,
    /// `γ − exp(−ψ_k²/λ₀²)` on every row.
    Exponential,
    /// `ψ_k²` on every row.
    Plain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub kind: InitKind,
    /// Exponent for `WeightedMaxCorr`, offset for `Exponential`.
    pub gamma: f64,
    /// Subset size for `WeightedMaxCorr`.
    pub card_s: usize,
    pub alpha_l: f64,
    pub alpha_u: f64,
    pub power_iters: usize,
}

/// Default subset size `⌊3n/13⌋`, at least one row.
pub fn default_card_s(n: usize) -> usize {
    (3 * n / 13).clamp(1, n.max(1))
}

impl InitConfig {
    pub fn weighted_max_corr(n: usize) -> Self {
        Self {
            kind: InitKind::WeightedMaxCorr,
            gamma: 0.5,
            card_s: default_card_s(n),
            alpha_l: 0.0,
            alpha_u: f64::INFINITY,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    pub fn truncated() -> Self {
        Self {
            kind: InitKind::Truncated,
            gamma: 0.0,
            card_s: 0,
            alpha_l: 1.0,
            alpha_u: 5.0,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    pub fn exponential() -> Self {
        Self {
            kind: InitKind::Exponential,
            gamma: 0.5,
            card_s: 0,
            alpha_l: 0.0,
            alpha_u: f64::INFINITY,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    pub fn plain() -> Self {
        Self {
            kind: InitKind::Plain,
            gamma: 0.0,
            card_s: 0,
            alpha_l: 0.0,
            alpha_u: f64::INFINITY,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    /// The initializer each algorithm is paired with.
    ///
    /// QTAF uses unweighted maximal correlation over the `⌈n/6⌉` largest
    /// amplitudes.
    pub fn for_algorithm(algo: Algorithm, n: usize) -> Self {
        match algo {
            Algorithm::Qwf => Self::plain(),
            Algorithm::Qrwf => Self::truncated(),
            Algorithm::Qpaf => Self::exponential(),
            Algorithm::Qtaf => Self {
                gamma: 0.0,
                card_s: n.div_ceil(6).clamp(1, n.max(1)),
                ..Self::weighted_max_corr(n)
            },
            Algorithm::Qraf | Algorithm::Qiraf | Algorithm::Qaraf | Algorithm::Qadraf => Self::weighted_max_corr(n),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.power_iters == 0 {
            return Err(Error::InvalidParameter("power_iters must be >= 1".into()));
        }
        match self.kind {
            InitKind::WeightedMaxCorr if self.card_s == 0 || self.card_s > n => Err(Error::InvalidParameter(
                format!("subset size |S| = {} outside 1..={n}", self.card_s),
            )),
            InitKind::Truncated if !(self.alpha_l < self.alpha_u) => Err(Error::InvalidParameter(format!(
                "truncation thresholds need alpha_l < alpha_u, got {} and {}",
                self.alpha_l, self.alpha_u
            ))),
            _ => Ok(()),
        }
    }
}

/// Dispatches on `cfg.kind`.
pub fn initialize(ens: &MeasurementEnsemble, cfg: &InitConfig) -> Result<QVector> {
    match cfg.kind {
        InitKind::WeightedMaxCorr => init_weighted_max_corr(ens, cfg),
        InitKind::Truncated => init_truncated(ens, cfg),
        InitKind::Exponential => init_exponential(ens, cfg),
        InitKind::Plain => init_plain(ens, cfg),
    }
}

fn leading_direction(ens: &MeasurementEnsemble, weights: &[f64], iters: usize) -> Result<QVector> {
    let s = HermitianQMatrix::from_weighted_rows(&ens.a, weights, 1.0 / ens.n() as f64)?;
    Ok(power_leading(&s, iters)?.vector)
}

/// Indices of the `count` largest amplitudes; ties go to the lower index.
pub fn top_indices(psi: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..psi.len()).collect();
    idx.sort_by(|&i, &j| psi[j].total_cmp(&psi[i]).then(i.cmp(&j)));
    idx.truncate(count);
    idx
}

/// Weighted maximal-correlation initialization.
pub fn init_weighted_max_corr(ens: &MeasurementEnsemble, cfg: &InitConfig) -> Result<QVector> {
    cfg.validate(ens.n())?;
    if ens.psi.iter().all(|&p| p == 0.0) {
        return Err(Error::ZeroAmplitudes);
    }
    let mut weights = vec![0.0; ens.n()];
    for k in top_indices(&ens.psi, cfg.card_s) {
        weights[k] = ens.psi[k].powf(cfg.gamma);
    }
    let lambda0 = estimate_norm(&ens.psi)?;
    Ok(leading_direction(ens, &weights, cfg.power_iters)?.scale(lambda0))
}

/// Truncated spectral initialization with the `ℓ₁`-based norm estimate
/// `λ₀ = (nd / Σ_k ‖α_k‖₁) · mean(ψ)`, where `‖α_k‖₁` sums entry moduli.
///
/// An empty truncation window falls back to the untruncated weights.
pub fn init_truncated(ens: &MeasurementEnsemble, cfg: &InitConfig) -> Result<QVector> {
    cfg.validate(ens.n())?;
    let (n, d) = (ens.n(), ens.d());
    let l1: f64 = ens.a.as_slice().iter().map(|q| q.abs()).sum();
    if !(l1 > 0.0) {
        return Err(Error::InvalidParameter("sensing matrix has zero l1 mass".into()));
    }
    let mean_psi = ens.psi.iter().sum::<f64>() / n as f64;
    let lambda0 = (n * d) as f64 / l1 * mean_psi;
    let (lo, hi) = (cfg.alpha_l * lambda0, cfg.alpha_u * lambda0);
    let mut weights: Vec<f64> = ens.psi.iter().map(|&y| if lo < y && y < hi { y } else { 0.0 }).collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights = ens.psi.clone();
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::ZeroAmplitudes);
    }
    Ok(leading_direction(ens, &weights, cfg.power_iters)?.scale(lambda0))
}

/// Exponentially reweighted initialization; weights may be negative.
pub fn init_exponential(ens: &MeasurementEnsemble, cfg: &InitConfig) -> Result<QVector> {
    cfg.validate(ens.n())?;
    let lambda0 = estimate_norm(&ens.psi)?;
    if lambda0 == 0.0 {
        return Err(Error::ZeroAmplitudes);
    }
    let l2 = lambda0 * lambda0;
    let weights: Vec<f64> = ens.psi.iter().map(|&p| cfg.gamma - (-p * p / l2).exp()).collect();
    Ok(leading_direction(ens, &weights, cfg.power_iters)?.scale(lambda0))
}

/// Intensity-weighted initialization (`w_k = ψ_k²`), used for the QWF baseline.
pub fn init_plain(ens: &MeasurementEnsemble, cfg: &InitConfig) -> Result<QVector> {
    cfg.validate(ens.n())?;
    if ens.psi.iter().all(|&p| p == 0.0) {
        return Err(Error::ZeroAmplitudes);
    }
    let weights: Vec<f64> = ens.psi.iter().map(|&p| p * p).collect();
    let lambda0 = estimate_norm(&ens.psi)?;
    Ok(leading_direction(ens, &weights, cfg.power_iters)?.scale(lambda0))
}
