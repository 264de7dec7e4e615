//! Experiment harness: success-rate sweeps over `n/d`, `(d, n/d)` grids,
//! the iteration/time comparison table and convergence traces.
//!
//! Every trial draws its instance from a stream keyed by
//! `(seed, d, ratio, trial)` and not by the algorithm, so all algorithms in
//! a sweep see the same instances. Trials run in parallel on the current
//! rayon pool; aggregation does not depend on execution order.

use std::io::Write;

use rayon::prelude::*;

use crate::ensemble::{make_instance, splitmix64, MeasurementEnsemble, RngStream, SignalKind};
use crate::error::{Error, Result};
use crate::pure::{run_pure, PureConfig};
use crate::solvers::{solve, Algorithm, RunRecord, SolverConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};

/// Optional replacements for the per-algorithm defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamOverrides {
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_trunc: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: Option<f64>,
    pub alpha_ad: Option<f64>,
    pub eps_ad: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if self.eta.is_some() {
            cfg.eta = self.eta;
        }
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { cfg.$f = v; } )*};
        }
        set!(beta, gamma_trunc, sigma, mu, alpha_ad, eps_ad);
        cfg
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub algos: Vec<Algorithm>,
    pub d_values: Vec<usize>,
    pub ratio_values: Vec<f64>,
    pub trials: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub signal_kind: SignalKind,
    /// Projection period for pure signals; `None` runs the plain solvers.
    pub pure: Option<PureConfig>,
    pub overrides: ParamOverrides,
}

impl SweepSpec {
    pub fn new(algos: Vec<Algorithm>, d_values: Vec<usize>, ratio_values: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            algos,
            d_values,
            ratio_values,
            trials,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            seed,
            signal_kind: SignalKind::Full,
            pure: None,
            overrides: ParamOverrides::default(),
        }
    }

    pub fn solver_config(&self, algo: Algorithm) -> SolverConfig {
        let cfg = SolverConfig { max_iters: self.max_iters, tol: self.tol, ..SolverConfig::new(algo) };
        self.overrides.apply(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.algos.is_empty() {
            return bad("at least one algorithm is required");
        }
        if self.d_values.is_empty() || self.d_values.contains(&0) {
            return bad("dimensions must be a non-empty list of positive sizes");
        }
        if self.ratio_values.is_empty() {
            return bad("ratio grid is empty");
        }
        if self.ratio_values.iter().any(|r| !(*r >= 1.0)) {
            return bad("ratios must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        for &a in &self.algos {
            self.solver_config(a).validate()?;
        }
        if let Some(p) = &self.pure {
            p.validate(self.max_iters)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub algo: String,
    pub d: usize,
    pub ratio: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over converged trials only; NaN when none converged.
    pub mean_iters: f64,
    pub mean_time_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn find(&self, algo: &str, d: usize, ratio: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.algo == algo && r.d == d && r.ratio == ratio)
    }
}

/// Expands `start:step:end` (inclusive, as far as `end` is reached within
/// rounding), a comma-separated list, or a single value.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        t.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number `{t}` in `{s}`")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        3 => {
            let (start, step, end) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || end < start {
                return Err(Error::InvalidParameter(format!("range `{s}` needs step > 0 and end >= start")));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(Error::InvalidParameter(format!("range `{s}` is not start:step:end"))),
    }
}

/// Integer form of [`parse_range`].
pub fn parse_usize_range(s: &str) -> Result<Vec<usize>> {
    parse_range(s)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParameter(format!("`{s}` must list positive integers")))
            }
        })
        .collect()
}

/// Instance stream of one trial.
pub fn trial_stream(seed: u64, d: usize, ratio: f64, trial: usize) -> RngStream {
    let key = splitmix64(seed ^ splitmix64(d as u64 ^ splitmix64(ratio.to_bits())));
    RngStream::new(key, trial as u64)
}

/// The instance of one trial, with the stream positioned after it.
pub fn trial_instance(spec: &SweepSpec, d: usize, ratio: f64, trial: usize) -> Result<(MeasurementEnsemble, RngStream)> {
    let mut rng = trial_stream(spec.seed, d, ratio, trial);
    let ens = make_instance(d, ratio, &mut rng, spec.signal_kind)?;
    Ok((ens, rng))
}

fn run_on(ens: &MeasurementEnsemble, cfg: &SolverConfig, pure: Option<&PureConfig>, rng: RngStream) -> Result<RunRecord> {
    match pure {
        Some(p) => run_pure(ens, cfg, p, rng),
        None => solve(ens, cfg, rng),
    }
}

/// One trial; wall time covers initialization and iterations but not
/// instance generation.
pub fn run_trial(spec: &SweepSpec, algo: Algorithm, d: usize, ratio: f64, trial: usize) -> Result<RunRecord> {
    let (ens, rng) = trial_instance(spec, d, ratio, trial)?;
    run_on(&ens, &spec.solver_config(algo), spec.pure.as_ref(), rng.fork(1))
}

fn algo_label(algo: Algorithm, pure: bool) -> String {
    if pure {
        format!("pq{}", &algo.name()[1..])
    } else {
        algo.name().to_string()
    }
}

/// Aggregates run records of one cell.
pub fn aggregate(algo: &str, d: usize, ratio: f64, records: &[RunRecord]) -> SweepRow {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.converged).collect();
    let mean = |f: &dyn Fn(&RunRecord) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    SweepRow {
        algo: algo.to_string(),
        d,
        ratio,
        trials: records.len(),
        successes: ok.len(),
        success_rate: ok.len() as f64 / records.len().max(1) as f64,
        mean_iters: mean(&|r| r.iters_used as f64),
        mean_time_ms: mean(&|r| r.wall_time_ms),
    }
}

/// Runs every `(algo, d, ratio)` cell of the spec.
pub fn success_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &algo in &spec.algos {
        for &d in &spec.d_values {
            for &ratio in &spec.ratio_values {
                cells.push((algo, d, ratio));
            }
        }
    }
    let tasks: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..spec.trials).map(move |t| (c, t))).collect();
    let records = tasks
        .par_iter()
        .map(|&(c, t)| {
            let (algo, d, ratio) = cells[c];
            run_trial(spec, algo, d, ratio, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cells
        .iter()
        .enumerate()
        .map(|(c, &(algo, d, ratio))| {
            let recs = &records[c * spec.trials..(c + 1) * spec.trials];
            aggregate(&algo_label(algo, spec.pure.is_some()), d, ratio, recs)
        })
        .collect();
    Ok(SweepResult { rows })
}

/// Sweep over the Cartesian `(d, ratio)` grid; identical to
/// [`success_sweep`], named for the surface-plot use.
pub fn grid_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    success_sweep(spec)
}

/// Iteration and time comparison at one oversampling ratio.
pub fn compete_table(algos: &[Algorithm], d_values: &[usize], ratio: f64, trials: usize, seed: u64) -> Result<SweepResult> {
    success_sweep(&SweepSpec::new(algos.to_vec(), d_values.to_vec(), vec![ratio], trials, seed))
}

/// Error curves of several algorithms on one shared instance (trial 0 of
/// the `(seed, d, ratio)` key). The runs do not stop at `tol`.
pub fn convergence_trace(spec: &SweepSpec, d: usize, ratio: f64) -> Result<Vec<(String, Vec<(usize, f64)>)>> {
    spec.validate()?;
    let (ens, rng) = trial_instance(spec, d, ratio, 0)?;
    spec.algos
        .par_iter()
        .map(|&algo| {
            let cfg = SolverConfig { trace: true, stop_on_tol: false, ..spec.solver_config(algo) };
            let rec = run_on(&ens, &cfg, spec.pure.as_ref(), rng.fork(1))?;
            Ok((algo_label(algo, spec.pure.is_some()), rec.trace.unwrap_or_default()))
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(w: &mut W, result: &SweepResult) -> Result<()> {
    writeln!(w, "algo,d,ratio,trials,successes,success_rate,mean_iters,mean_time_ms")?;
    for r in &result.rows {
        writeln!(
            w,
            "{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
            r.algo, r.d, r.ratio, r.trials, r.successes, r.success_rate, r.mean_iters, r.mean_time_ms
        )?;
    }
    Ok(())
}

pub fn write_traces_csv<W: Write>(w: &mut W, traces: &[(String, Vec<(usize, f64)>)]) -> Result<()> {
    writeln!(w, "algo,iter,rel_error")?;
    for (algo, t) in traces {
        for (i, e) in t {
            writeln!(w, "{algo},{i},{e:.16e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("3:0.5:13").unwrap();
        assert_eq!(r.len(), 21);
        assert_eq!(r[0], 3.0);
        assert_eq!(*r.last().unwrap(), 13.0);
        assert_eq!(parse_range("3:1:13").unwrap().len(), 11);
        assert_eq!(parse_range("9").unwrap(), vec![9.0]);
        assert_eq!(parse_range("3,5.5").unwrap(), vec![3.0, 5.5]);
        assert_eq!(parse_range("0.2:0.2:1").unwrap().len(), 5);
        assert!(parse_range("3:0:5").is_err());
        assert!(parse_range("5:1:3").is_err());
        assert!(parse_range("a:1:3").is_err());
        assert_eq!(parse_usize_range("30:30:300").unwrap().len(), 10);
        assert!(parse_usize_range("2.5").is_err());
    }

    #[test]
    fn pure_labels() {
        assert_eq!(algo_label(Algorithm::Qraf, true), "pqraf");
        assert_eq!(algo_label(Algorithm::Qwf, true), "pqwf");
        assert_eq!(algo_label(Algorithm::Qadraf, false), "qadraf");
    }

    #[test]
    fn aggregation_skips_failures() {
        let rec = |c: bool, it: usize, t: f64| RunRecord {
            converged: c,
            diverged: false,
            iters_used: it,
            final_rel_error: if c { 0.0 } else { 1.0 },
            wall_time_ms: t,
            trace: None,
            z: crate::quat::QVector::zeros(1),
        };
        let row = aggregate("qraf", 4, 9.0, &[rec(true, 10, 1.0), rec(false, 1500, 9.0), rec(true, 20, 3.0)]);
        assert_eq!(row.successes, 2);
        assert!((row.success_rate - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(row.mean_iters, 15.0);
        assert_eq!(row.mean_time_ms, 2.0);
        assert!(aggregate("qraf", 4, 9.0, &[rec(false, 3, 1.0)]).mean_iters.is_nan());
    }

    #[test]
    fn overrides_apply() {
        let o = ParamOverrides { eta: Some(2.0), beta: Some(1.0), ..Default::default() };
        let c = o.apply(SolverConfig::new(Algorithm::Qraf));
        assert_eq!(c.eta, Some(2.0));
        assert_eq!(c.beta, 1.0);
        assert_eq!(c.mu, 0.8);
    }

    #[test]
    fn spec_validation() {
        let spec = SweepSpec::new(vec![Algorithm::Qraf], vec![8], vec![9.0], 1, 0);
        assert!(spec.validate().is_ok());
        assert!(SweepSpec { trials: 0, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { ratio_values: vec![], ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { algos: vec![], ..spec }.validate().is_err());
    }
}
