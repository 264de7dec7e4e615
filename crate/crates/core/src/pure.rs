//! Pure-quaternion signals: the phase-factor projection and the periodic
//! projection wrapper around every solver.
//!
//! A vector recovered up to a right unit factor `w` is generally not pure.
//! The projection looks for the unit `q` that makes `z·q̄` as close to pure
//! as possible, which is a 4×4 symmetric eigenproblem, and keeps the
//! imaginary part.

use crate::ensemble::{MeasurementEnsemble, RngStream};
use crate::error::{Error, Result};
use crate::init::{initialize, InitConfig};
use crate::linalg::sym4_smallest;
use crate::quat::{QVector, Quaternion};
use crate::solvers::{run_projected, RunRecord, SolverConfig};

/// A quaternion vector split into its four real components, one row per
/// entry: `[Re, P^i, P^j, P^k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitMatrix {
    pub rows: Vec<[f64; 4]>,
}

impl SplitMatrix {
    pub fn from_vector(z: &QVector) -> Self {
        Self { rows: z.iter().map(|q| q.to_array()).collect() }
    }

    pub fn to_vector(&self) -> QVector {
        QVector(self.rows.iter().map(|&r| Quaternion::from_array(r)).collect())
    }

    /// `MᵀM`.
    pub fn gram(&self) -> [[f64; 4]; 4] {
        let mut w = [[0.0; 4]; 4];
        for r in &self.rows {
            for p in 0..4 {
                for q in p..4 {
                    w[p][q] += r[p] * r[q];
                }
            }
        }
        for p in 0..4 {
            for q in 0..p {
                w[p][q] = w[q][p];
            }
        }
        w
    }
}

/// Unit factor `q` minimizing `‖Re(z·q̄)‖`, with the minimum value squared.
/// `None` for the zero vector.
pub fn qpfe_factor_with_residual(z: &QVector) -> Option<(Quaternion, f64)> {
    if z.norm_sqr() == 0.0 {
        return None;
    }
    let (lambda, v) = sym4_smallest(&SplitMatrix::from_vector(z).gram());
    Some((Quaternion::from_array(v), lambda.max(0.0)))
}

pub fn qpfe_factor(z: &QVector) -> Option<Quaternion> {
    qpfe_factor_with_residual(z).map(|(q, _)| q)
}

/// `Im(z·q̄)` for the optimal factor `q`; the zero vector is returned as is.
pub fn qpfe(z: &QVector) -> QVector {
    match qpfe_factor(z) {
        Some(q) => z.mul_right(q.conj()).imag(),
        None => z.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PureConfig {
    /// Projection period in completed updates.
    pub t_p: usize,
}

pub const DEFAULT_PROJECTION_PERIOD: usize = 10;

impl Default for PureConfig {
    fn default() -> Self {
        Self { t_p: DEFAULT_PROJECTION_PERIOD }
    }
}

impl PureConfig {
    pub fn validate(&self, max_iters: usize) -> Result<()> {
        if self.t_p == 0 || self.t_p > max_iters {
            return Err(Error::InvalidParameter(format!(
                "projection period {} outside 1..={max_iters}",
                self.t_p
            )));
        }
        Ok(())
    }
}

/// Spectral initialization followed by [`run_pure_from`].
pub fn run_pure(
    ens: &MeasurementEnsemble,
    cfg: &SolverConfig,
    pure_cfg: &PureConfig,
    rng: RngStream,
) -> Result<RunRecord> {
    let start = std::time::Instant::now();
    let z0 = initialize(ens, &InitConfig::for_algorithm(cfg.algo, ens.n()))?;
    let mut rec = run_pure_from(ens, z0, cfg, pure_cfg, rng)?;
    rec.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

/// The base solver loop with a projection after every `t_p` completed
/// updates. With `t_p = max_iters` the only projection happens after the
/// last update, so the returned estimate is always pure. Errors are
/// measured with `dist_pure`.
pub fn run_pure_from(
    ens: &MeasurementEnsemble,
    z0: QVector,
    cfg: &SolverConfig,
    pure_cfg: &PureConfig,
    rng: RngStream,
) -> Result<RunRecord> {
    pure_cfg.validate(cfg.max_iters)?;
    run_projected(ens, z0, cfg, Some(pure_cfg.t_p), rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_round_trip() {
        let z = QVector(vec![Quaternion::new(1.0, -2.0, 3.0, 0.5), Quaternion::new(0.0, 0.25, -1.0, 7.0)]);
        let m = SplitMatrix::from_vector(&z);
        assert_eq!(m.rows[1], [0.0, 0.25, -1.0, 7.0]);
        assert_eq!(m.to_vector(), z);
    }

    #[test]
    fn real_scalar_maps_to_minus_i() {
        let z = QVector(vec![Quaternion::ONE]);
        assert_eq!(qpfe_factor(&z).unwrap(), Quaternion::I);
        assert_eq!(qpfe(&z), QVector(vec![Quaternion::new(0.0, -1.0, 0.0, 0.0)]));
    }

    #[test]
    fn zero_vector_unchanged() {
        let z = QVector::zeros(3);
        assert_eq!(qpfe(&z), z);
        assert!(qpfe_factor(&z).is_none());
    }

    #[test]
    fn rotated_pure_vector_is_recovered() {
        let p = QVector(vec![Quaternion::pure(0.3, 0.1, 0.8), Quaternion::pure(0.5, 0.9, 0.2), Quaternion::pure(0.7, 0.4, 0.6)]);
        let w = Quaternion::new(0.4, -0.3, 0.8, 0.1).sign();
        let (q, res) = qpfe_factor_with_residual(&p.mul_right(w)).unwrap();
        assert!(res < 1e-14);
        let omega = qpfe(&p.mul_right(w));
        assert!(omega.iter().all(|e| e.a == 0.0));
        let e = omega.sub(&p).unwrap().norm().min(omega.add(&p).unwrap().norm());
        assert!(e < 1e-12, "{e} {q}");
    }

    #[test]
    fn period_bounds() {
        assert!(PureConfig { t_p: 0 }.validate(10).is_err());
        assert!(PureConfig { t_p: 11 }.validate(10).is_err());
        assert!(PureConfig { t_p: 10 }.validate(10).is_ok());
    }
}
