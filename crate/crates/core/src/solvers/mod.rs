//! The gradient-descent family and its configuration.

mod driver;
mod objective;

use std::fmt;
use std::str::FromStr;

use crate::ensemble::MeasurementEnsemble;
use crate::error::{Error, Result};

pub use driver::{run, solve, solve_with_init, write_trace_csv, RunRecord, SolverState};
pub(crate) use driver::run_projected;
pub use objective::{
    dist, dist_pure, grad_qpaf, grad_qraf, grad_qrwf, grad_qtaf, grad_qwf, gradient, loss_amplitude,
    loss_intensity, loss_perturbed, perturbation, GradientRule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Qwf,
    Qrwf,
    Qtaf,
    Qpaf,
    Qraf,
    Qiraf,
    Qaraf,
    Qadraf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Qwf,
        Algorithm::Qrwf,
        Algorithm::Qtaf,
        Algorithm::Qpaf,
        Algorithm::Qraf,
        Algorithm::Qiraf,
        Algorithm::Qaraf,
        Algorithm::Qadraf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qwf => "qwf",
            Algorithm::Qrwf => "qrwf",
            Algorithm::Qtaf => "qtaf",
            Algorithm::Qpaf => "qpaf",
            Algorithm::Qraf => "qraf",
            Algorithm::Qiraf => "qiraf",
            Algorithm::Qaraf => "qaraf",
            Algorithm::Qadraf => "qadraf",
        }
    }

    /// True for the algorithms whose every step uses all `n` rows.
    pub fn is_full_batch(self) -> bool {
        self != Algorithm::Qiraf
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm `{s}`")))
    }
}

/// Step sizes and model parameters of one solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub algo: Algorithm,
    /// Explicit step size. `None` selects the algorithm default, which for
    /// QWF depends on the data (`0.2 n / Σ ψ_k`).
    pub eta: Option<f64>,
    pub beta: f64,
    pub gamma_trunc: f64,
    pub sigma: f64,
    /// Momentum for QARAF, decay for QAdRAF.
    pub mu: f64,
    pub alpha_ad: f64,
    pub eps_ad: f64,
    /// QIRAF batch: the smallest power of two above `n/4 − 1` when set,
    /// otherwise `n` rows drawn with replacement.
    pub batch_exp_rule: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub trace: bool,
    /// Stop as soon as the relative error drops below `tol`. Turn off to
    /// record the full error curve.
    pub stop_on_tol: bool,
}

pub const DEFAULT_MAX_ITERS: usize = 1500;
pub const DEFAULT_TOL: f64 = 1e-5;
/// Relative iterate change that ends a run without ground truth.
pub const STALL_TOL: f64 = 1e-12;

impl SolverConfig {
    /// Defaults for `algo`.
    pub fn new(algo: Algorithm) -> Self {
        let mu = match algo {
            Algorithm::Qadraf => 1.0,
            _ => 0.8,
        };
        Self {
            algo,
            eta: None,
            beta: 5.0,
            gamma_trunc: 0.8,
            sigma: 2.0,
            mu,
            alpha_ad: 0.009,
            eps_ad: 1e-6,
            batch_exp_rule: true,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            trace: false,
            stop_on_tol: true,
        }
    }

    /// The fixed step size of `algo`, or `None` when it depends on data
    /// (QWF) or is adaptive (QAdRAF).
    pub fn default_eta(algo: Algorithm) -> Option<f64> {
        match algo {
            Algorithm::Qwf | Algorithm::Qadraf => None,
            Algorithm::Qrwf => Some(0.8),
            Algorithm::Qtaf => Some(1.2),
            Algorithm::Qpaf => Some(2.5),
            Algorithm::Qraf | Algorithm::Qiraf | Algorithm::Qaraf => Some(6.0),
        }
    }

    /// Step size when it does not depend on the data; `None` for the QWF
    /// default.
    pub fn fixed_eta(&self) -> Option<f64> {
        match (self.eta, self.algo) {
            (Some(e), _) => Some(e),
            (None, Algorithm::Qwf) => None,
            (None, Algorithm::Qadraf) => Some(self.alpha_ad / self.eps_ad.sqrt()),
            (None, a) => Self::default_eta(a),
        }
    }

    /// Step size for this ensemble. For QAdRAF this is the initial step
    /// `α / √ε`.
    pub fn resolved_eta(&self, ens: &MeasurementEnsemble) -> f64 {
        if let Some(eta) = self.eta {
            return eta;
        }
        match self.algo {
            Algorithm::Qwf => {
                let s: f64 = ens.psi.iter().sum();
                if s > 0.0 {
                    0.2 * ens.n() as f64 / s
                } else {
                    0.2
                }
            }
            Algorithm::Qadraf => self.alpha_ad / self.eps_ad.sqrt(),
            a => Self::default_eta(a).unwrap_or(1.0),
        }
    }

    /// QIRAF batch size for `n` measurements.
    pub fn batch_size(&self, n: usize) -> usize {
        if !self.batch_exp_rule {
            return n.max(1);
        }
        let target = n as f64 / 4.0 - 1.0;
        let mut b = 1usize;
        while (b as f64) <= target {
            b *= 2;
        }
        b
    }

    /// Gradient rule used by the update.
    pub fn rule(&self) -> GradientRule {
        match self.algo {
            Algorithm::Qwf => GradientRule::Intensity,
            Algorithm::Qrwf => GradientRule::Reshaped,
            Algorithm::Qtaf => GradientRule::Truncated { gamma: self.gamma_trunc },
            Algorithm::Qpaf => GradientRule::Perturbed { sigma: self.sigma },
            Algorithm::Qraf | Algorithm::Qiraf | Algorithm::Qaraf | Algorithm::Qadraf => {
                GradientRule::Reweighted { beta: self.beta }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return bad("eta must be positive and finite");
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if !(self.gamma_trunc > 0.0) {
            return bad("gamma_trunc must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad("mu must lie in [0, 1]");
        }
        if !(self.alpha_ad > 0.0 && self.eps_ad > 0.0) {
            return bad("alpha_ad and eps_ad must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}
