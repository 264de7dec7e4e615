use std::io::Write;
use std::time::Instant;

use super::objective::{accumulate_gradient, dist, dist_pure};
use super::{Algorithm, SolverConfig, STALL_TOL};
use crate::ensemble::{MeasurementEnsemble, RngStream};
use crate::error::{Error, Result};
use crate::init::{initialize, InitConfig};
use crate::pure::qpfe_factor;
use crate::quat::{QVector, Quaternion};

/// Outcome of one solver run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub converged: bool,
    /// A non-finite iterate ended the run.
    pub diverged: bool,
    /// Updates applied before the relative error first fell below `tol`,
    /// or the number of updates executed when it never did.
    pub iters_used: usize,
    /// Relative error of the returned estimate; NaN without ground truth.
    pub final_rel_error: f64,
    pub wall_time_ms: f64,
    /// `(iteration, relative error)` pairs, when tracing was requested.
    pub trace: Option<Vec<(usize, f64)>>,
    pub z: QVector,
}

/// Iterate and algorithm-private state of a running solver.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub z: QVector,
    pub iter: usize,
    /// Previous iterate; the momentum partner is `z + μ(z − prev)`.
    prev: QVector,
    /// Running squared-gradient average of the adaptive step.
    s_acc: f64,
    eta: f64,
    batch: usize,
    rng: RngStream,
    grad: Vec<Quaternion>,
    work: Vec<Quaternion>,
}

impl SolverState {
    pub fn new(ens: &MeasurementEnsemble, z0: QVector, cfg: &SolverConfig, rng: RngStream) -> Result<Self> {
        cfg.validate()?;
        if z0.len() != ens.d() {
            return Err(Error::DimensionMismatch { expected: ens.d(), found: z0.len() });
        }
        let d = ens.d();
        Ok(Self {
            prev: z0.clone(),
            z: z0,
            iter: 0,
            s_acc: 0.0,
            eta: cfg.resolved_eta(ens),
            batch: cfg.batch_size(ens.n()),
            rng,
            grad: vec![Quaternion::ZERO; d],
            work: vec![Quaternion::ZERO; d],
        })
    }

    /// Current step size; for the adaptive rule, the step of the last update.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn accumulator(&self) -> f64 {
        self.s_acc
    }

    /// Applies one update of `cfg.algo`.
    pub fn step(&mut self, ens: &MeasurementEnsemble, cfg: &SolverConfig) {
        let rule = cfg.rule();
        let n = ens.n();
        let Self { z, prev, s_acc, eta, batch, rng, grad, work, .. } = self;
        match cfg.algo {
            Algorithm::Qiraf => {
                let rows = (0..*batch).map(|_| rng.index(n));
                accumulate_gradient(&ens.a, &ens.psi, z.as_slice(), rows, rule, grad);
                descend(&mut z.0, grad, *eta);
            }
            Algorithm::Qaraf => {
                for ((w, &zi), &pi) in work.iter_mut().zip(z.iter()).zip(prev.iter()) {
                    *w = zi + (zi - pi).scale(cfg.mu);
                }
                accumulate_gradient(&ens.a, &ens.psi, work, 0..n, rule, grad);
                descend(work, grad, *eta);
                std::mem::swap(&mut prev.0, &mut z.0);
                z.0.copy_from_slice(work);
            }
            Algorithm::Qadraf => {
                accumulate_gradient(&ens.a, &ens.psi, z.as_slice(), 0..n, rule, grad);
                let g2: f64 = grad.iter().map(|g| g.norm_sqr()).sum();
                *s_acc = cfg.mu * *s_acc + (1.0 - cfg.mu) * g2;
                *eta = cfg.alpha_ad / (*s_acc + cfg.eps_ad).sqrt();
                descend(&mut z.0, grad, *eta);
            }
            _ => {
                accumulate_gradient(&ens.a, &ens.psi, z.as_slice(), 0..n, rule, grad);
                descend(&mut z.0, grad, *eta);
            }
        }
        self.iter += 1;
    }

    /// Replaces the iterate by its phase-factor projection. The previous
    /// iterate is carried into the same phase frame so momentum stays
    /// consistent.
    pub fn project(&mut self) {
        if let Some(q) = qpfe_factor(&self.z) {
            let qb = q.conj();
            self.z = self.z.mul_right(qb).imag();
            self.prev = self.prev.mul_right(qb);
        }
    }
}

fn descend(z: &mut [Quaternion], g: &[Quaternion], eta: f64) {
    for (zi, gi) in z.iter_mut().zip(g) {
        *zi -= gi.scale(eta);
    }
}

/// Runs `cfg.algo` from `z0`.
///
/// With ground truth the relative error `dist(z, x)/‖x‖` is checked before
/// every update; without it the run stops after `max_iters` updates or once
/// the relative iterate change drops below `1e-12`.
pub fn run(ens: &MeasurementEnsemble, z0: QVector, cfg: &SolverConfig, rng: RngStream) -> Result<RunRecord> {
    run_projected(ens, z0, cfg, None, rng)
}

/// The shared loop. `period` enables phase-factor projection after every
/// `period` completed updates, and switches the error to `dist_pure`.
pub(crate) fn run_projected(
    ens: &MeasurementEnsemble,
    z0: QVector,
    cfg: &SolverConfig,
    period: Option<usize>,
    rng: RngStream,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut state = SolverState::new(ens, z0, cfg, rng)?;
    let truth = ens.x_true.as_ref();
    let x_norm = truth.map(|x| x.norm()).filter(|&v| v > 0.0).unwrap_or(1.0);
    let rel_error = |z: &QVector| -> Result<f64> {
        let x = truth.expect("checked by caller");
        let e = if period.is_some() { dist_pure(x, z)? } else { dist(z, x)? };
        Ok(e / x_norm)
    };

    let mut trace = cfg.trace.then(Vec::new);
    let mut first_hit: Option<usize> = None;
    let mut diverged = false;
    let mut stopped_early = false;

    for i in 0..cfg.max_iters {
        if truth.is_some() {
            let e = rel_error(&state.z)?;
            if let Some(t) = trace.as_mut() {
                t.push((i, e));
            }
            if e < cfg.tol && first_hit.is_none() {
                first_hit = Some(i);
                if cfg.stop_on_tol {
                    stopped_early = true;
                    break;
                }
            }
        }
        let before = if truth.is_none() { Some(state.z.clone()) } else { None };
        state.step(ens, cfg);
        if let Some(tp) = period {
            if (i + 1) % tp == 0 {
                state.project();
            }
        }
        if !state.z.is_finite() {
            diverged = true;
            break;
        }
        if let Some(b) = before {
            let zn = b.norm();
            let change = state.z.sub(&b)?.norm();
            if zn > 0.0 && change / zn < STALL_TOL {
                stopped_early = true;
                break;
            }
        }
    }

    let final_rel_error = if diverged || truth.is_none() {
        f64::NAN
    } else {
        let e = rel_error(&state.z)?;
        if !stopped_early {
            if let Some(t) = trace.as_mut() {
                t.push((state.iter, e));
            }
            if e < cfg.tol && first_hit.is_none() {
                first_hit = Some(state.iter);
            }
        }
        e
    };
    let converged = !diverged && final_rel_error < cfg.tol;
    let iters_used = match first_hit {
        Some(i) if converged => i,
        _ => state.iter,
    };
    Ok(RunRecord {
        converged,
        diverged,
        iters_used,
        final_rel_error,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        trace,
        z: state.z,
    })
}

/// Spectral initialization paired with `cfg.algo`, then [`run`]. The wall
/// time covers both.
pub fn solve(ens: &MeasurementEnsemble, cfg: &SolverConfig, rng: RngStream) -> Result<RunRecord> {
    let init = InitConfig::for_algorithm(cfg.algo, ens.n());
    solve_with_init(ens, cfg, &init, rng)
}

pub fn solve_with_init(
    ens: &MeasurementEnsemble,
    cfg: &SolverConfig,
    init: &InitConfig,
    rng: RngStream,
) -> Result<RunRecord> {
    let start = Instant::now();
    let z0 = initialize(ens, init)?;
    let mut rec = run(ens, z0, cfg, rng)?;
    rec.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

/// Writes `iter,rel_error` rows.
pub fn write_trace_csv<W: Write>(w: &mut W, trace: &[(usize, f64)]) -> Result<()> {
    writeln!(w, "iter,rel_error")?;
    for (i, e) in trace {
        writeln!(w, "{i},{e:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_instance, SignalKind};

    fn instance(seed: u64) -> MeasurementEnsemble {
        let mut rng = RngStream::new(seed, 0);
        make_instance(16, 8.0, &mut rng, SignalKind::Full).unwrap()
    }

    #[test]
    fn truth_start_converges_immediately() {
        let ens = instance(1);
        let x = ens.x_true.clone().unwrap();
        for algo in Algorithm::ALL {
            let cfg = SolverConfig { trace: true, ..SolverConfig::new(algo) };
            let rec = run(&ens, x.clone(), &cfg, RngStream::new(2, 0)).unwrap();
            assert!(rec.converged, "{algo}");
            assert_eq!(rec.iters_used, 0);
            assert_eq!(rec.final_rel_error, 0.0, "{algo}");
            assert_eq!(rec.trace.unwrap(), vec![(0, 0.0)]);
        }
    }

    #[test]
    fn small_instance_recovers() {
        let ens = instance(3);
        for algo in [Algorithm::Qraf, Algorithm::Qaraf, Algorithm::Qrwf] {
            let rec = solve(&ens, &SolverConfig::new(algo), RngStream::new(4, 0)).unwrap();
            assert!(rec.converged, "{algo}: {}", rec.final_rel_error);
            assert!(rec.final_rel_error < 1e-5);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let ens = instance(5);
        let cfg = SolverConfig { eta: Some(1e6), ..SolverConfig::new(Algorithm::Qwf) };
        let rec = solve(&ens, &cfg, RngStream::new(6, 0)).unwrap();
        assert!(rec.diverged && !rec.converged);
        assert!(rec.final_rel_error.is_nan());
    }

    #[test]
    fn no_truth_runs_to_budget_or_stall() {
        let ens = instance(7).without_truth();
        let cfg = SolverConfig { max_iters: 40, ..SolverConfig::new(Algorithm::Qraf) };
        let rec = solve(&ens, &cfg, RngStream::new(8, 0)).unwrap();
        assert!(!rec.converged);
        assert!(rec.iters_used <= 40);
        assert!(rec.final_rel_error.is_nan());
    }

    #[test]
    fn rejects_wrong_start() {
        let ens = instance(9);
        let cfg = SolverConfig::new(Algorithm::Qraf);
        assert!(run(&ens, QVector::zeros(3), &cfg, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn trace_csv_format() {
        let mut out = Vec::new();
        write_trace_csv(&mut out, &[(0, 0.5), (1, 0.25)]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "iter,rel_error\n0,5.0000000000000000e-1\n1,2.5000000000000000e-1\n");
    }
}
