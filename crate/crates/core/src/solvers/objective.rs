//! Distances, objective values and gradients.
//!
//! Every gradient has the shape `(1/|B|) Σ_{k∈B} c_k α_k (α_k* z)` over a set
//! `B` of measurement rows, with a real coefficient `c_k` that depends only
//! on `|α_k* z|` and `ψ_k`. The product is always grouped as
//! `α_k · ⟨α_k, z⟩`; quaternion products do not commute, so the order is part
//! of the definition.

use crate::ensemble::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::quat::{inner, inner_slice, QMatrix, QVector, Quaternion};

/// `min_{|w|=1} ‖z − x w‖`, attained at `w = sign(⟨x, z⟩)`.
pub fn dist(z: &QVector, x: &QVector) -> Result<f64> {
    let w = inner(x, z)?.sign();
    Ok(z.sub(&x.mul_right(w))?.norm())
}

/// `min(‖z + ω‖, ‖z − ω‖)`.
pub fn dist_pure(omega: &QVector, z: &QVector) -> Result<f64> {
    Ok(z.add(omega)?.norm().min(z.sub(omega)?.norm()))
}

/// Per-row coefficient rule of a gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientRule {
    /// Reweighted amplitude flow, `ω_k = r_k / (r_k + β)` with `r_k = |α_k* z| / ψ_k`.
    Reweighted { beta: f64 },
    /// Reshaped Wirtinger flow (`ω ≡ 1`).
    Reshaped,
    /// Truncated amplitude flow: keep row `k` iff `|α_k* z| ≥ ψ_k / (1 + γ)`.
    Truncated { gamma: f64 },
    /// Perturbed amplitude flow with `ε_k = √σ ψ_k`.
    Perturbed { sigma: f64 },
    /// Intensity-based Wirtinger flow.
    Intensity,
}

impl GradientRule {
    /// Coefficient `c_k` for a row with `|α_k* z| = m` and amplitude `psi`.
    ///
    /// Rows with `m = 0` are dropped by the amplitude rules. A zero amplitude
    /// gets weight one and residual factor one.
    #[inline]
    pub fn coefficient(self, m: f64, psi: f64) -> f64 {
        match self {
            GradientRule::Reweighted { beta } => {
                if m == 0.0 {
                    return 0.0;
                }
                if psi == 0.0 {
                    return 1.0;
                }
                let r = m / psi;
                let w = r / (r + beta);
                w * (1.0 - psi / m)
            }
            GradientRule::Reshaped => {
                if m == 0.0 {
                    0.0
                } else {
                    1.0 - psi / m
                }
            }
            GradientRule::Truncated { gamma } => {
                if m == 0.0 || m < psi / (1.0 + gamma) {
                    0.0
                } else {
                    1.0 - psi / m
                }
            }
            GradientRule::Perturbed { sigma } => {
                let eps2 = sigma * psi * psi;
                let den = (m * m + eps2).sqrt();
                if den == 0.0 {
                    0.0
                } else {
                    1.0 - (psi * psi + eps2).sqrt() / den
                }
            }
            GradientRule::Intensity => m * m - psi * psi,
        }
    }
}

/// Accumulates `Σ_{k∈rows} c_k α_k ⟨α_k, z⟩` into `out` (overwritten) and
/// divides by the number of rows visited.
pub(crate) fn accumulate_gradient<I>(
    a: &QMatrix,
    psi: &[f64],
    z: &[Quaternion],
    rows: I,
    rule: GradientRule,
    out: &mut [Quaternion],
) where
    I: Iterator<Item = usize>,
{
    out.fill(Quaternion::ZERO);
    let mut count = 0usize;
    for k in rows {
        count += 1;
        let row = a.row(k);
        let p = inner_slice(row, z);
        let c = rule.coefficient(p.abs(), psi[k]);
        if c == 0.0 {
            continue;
        }
        let cp = p.scale(c);
        for (o, &alpha) in out.iter_mut().zip(row) {
            *o += alpha * cp;
        }
    }
    if count > 0 {
        let s = 1.0 / count as f64;
        for o in out.iter_mut() {
            *o = o.scale(s);
        }
    }
}

fn check_dims(ens: &MeasurementEnsemble, z: &QVector) -> Result<()> {
    if z.len() != ens.d() {
        return Err(Error::DimensionMismatch { expected: ens.d(), found: z.len() });
    }
    Ok(())
}

/// Full-batch gradient under `rule`.
pub fn gradient(ens: &MeasurementEnsemble, z: &QVector, rule: GradientRule) -> Result<QVector> {
    check_dims(ens, z)?;
    let mut out = vec![Quaternion::ZERO; ens.d()];
    accumulate_gradient(&ens.a, &ens.psi, z.as_slice(), 0..ens.n(), rule, &mut out);
    Ok(QVector(out))
}

pub fn grad_qraf(ens: &MeasurementEnsemble, z: &QVector, beta: f64) -> Result<QVector> {
    gradient(ens, z, GradientRule::Reweighted { beta })
}

pub fn grad_qrwf(ens: &MeasurementEnsemble, z: &QVector) -> Result<QVector> {
    gradient(ens, z, GradientRule::Reshaped)
}

pub fn grad_qtaf(ens: &MeasurementEnsemble, z: &QVector, gamma_trunc: f64) -> Result<QVector> {
    gradient(ens, z, GradientRule::Truncated { gamma: gamma_trunc })
}

pub fn grad_qpaf(ens: &MeasurementEnsemble, z: &QVector, sigma: f64) -> Result<QVector> {
    gradient(ens, z, GradientRule::Perturbed { sigma })
}

pub fn grad_qwf(ens: &MeasurementEnsemble, z: &QVector) -> Result<QVector> {
    gradient(ens, z, GradientRule::Intensity)
}

fn row_moduli(ens: &MeasurementEnsemble, z: &QVector) -> Result<Vec<f64>> {
    check_dims(ens, z)?;
    Ok((0..ens.n()).map(|k| inner_slice(ens.a.row(k), z.as_slice()).abs()).collect())
}

/// `(1/n) Σ (|α_k* z| − ψ_k)²`.
pub fn loss_amplitude(ens: &MeasurementEnsemble, z: &QVector) -> Result<f64> {
    let m = row_moduli(ens, z)?;
    Ok(m.iter().zip(&ens.psi).map(|(m, p)| (m - p).powi(2)).sum::<f64>() / ens.n() as f64)
}

/// `(1/n) Σ (|α_k* z|² − ψ_k²)²`.
pub fn loss_intensity(ens: &MeasurementEnsemble, z: &QVector) -> Result<f64> {
    let m = row_moduli(ens, z)?;
    Ok(m.iter().zip(&ens.psi).map(|(m, p)| (m * m - p * p).powi(2)).sum::<f64>() / ens.n() as f64)
}

/// `(1/n) Σ (√(|α_k* z|² + ε_k²) − √(ψ_k² + ε_k²))²`.
pub fn loss_perturbed(ens: &MeasurementEnsemble, z: &QVector, eps: &[f64]) -> Result<f64> {
    if eps.len() != ens.n() {
        return Err(Error::DimensionMismatch { expected: ens.n(), found: eps.len() });
    }
    let m = row_moduli(ens, z)?;
    Ok(m
        .iter()
        .zip(&ens.psi)
        .zip(eps)
        .map(|((m, p), e)| ((m * m + e * e).sqrt() - (p * p + e * e).sqrt()).powi(2))
        .sum::<f64>()
        / ens.n() as f64)
}

/// `ε = √σ ψ`.
pub fn perturbation(psi: &[f64], sigma: f64) -> Vec<f64> {
    let s = sigma.sqrt();
    psi.iter().map(|p| s * p).collect()
}
