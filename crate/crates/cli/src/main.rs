//! `quatflow` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quatflow::bench::{
    convergence_trace, parse_range, parse_usize_range, success_sweep, write_sweep_csv, write_traces_csv,
    ParamOverrides, SweepSpec,
};
use quatflow::imaging::{
    decompose, load_png, raf_conc, raf_mono, real_raf_config, recover_image, save_png, write_metrics_csv,
    ConcSampling, SignMode,
};
use quatflow::init::InitConfig;
use quatflow::solvers::{write_trace_csv, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use quatflow::{
    make_instance, run, Algorithm, MeasurementEnsemble, PureConfig, RngStream, SignalKind, SolverConfig,
};

const DEFAULTS: &str = "\
Algorithm defaults:
  qwf     eta = 0.2 n / sum(psi), plain spectral init
  qrwf    eta = 0.8, truncated init with alpha_l = 1, alpha_u = 5
  qtaf    eta = 1.2, gamma = 0.8, unweighted init over the top ceil(n/6) rows
  qpaf    eta = 2.5, sigma = 2, exponential init with gamma = 0.5
  qraf    eta = 6, beta = 5, init over |S| = floor(3n/13) rows with exponent 0.5
  qiraf   eta = 6, beta = 5, batch = smallest power of two above n/4 - 1
  qaraf   eta = 6, beta = 5, mu = 0.8
  qadraf  alpha = 0.009, mu = 1, eps = 1e-6, beta = 5
  all     T = 1500, tol = 1e-5, projection period T_p = 10

Prefix an algorithm with `pq` (or pass --pure) for the pure-quaternion
variant. A config file given with --config holds key=value lines using the
long flag names; flags on the command line take precedence.";

#[derive(Parser, Debug)]
#[command(name = "quatflow", version, about = "Quaternion phase retrieval toolkit", after_help = DEFAULTS)]
struct Cli {
    /// key=value file with default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recover one random signal.
    #[command(after_help = DEFAULTS, args_override_self = true)]
    Recover(RecoverArgs),
    /// Success rate over a ratio grid.
    #[command(after_help = DEFAULTS, args_override_self = true)]
    Sweep(SweepArgs),
    /// Success rate over a (d, ratio) grid.
    #[command(after_help = DEFAULTS, args_override_self = true)]
    Grid(SweepArgs),
    /// Iteration and time comparison, optionally with convergence traces.
    #[command(after_help = DEFAULTS, args_override_self = true)]
    Bench(BenchArgs),
    /// Recover an RGB PNG block by block.
    #[command(after_help = DEFAULTS, args_override_self = true)]
    Image(ImageArgs),
}

#[derive(Args, Debug, Clone)]
struct Params {
    /// Step size (overrides the algorithm default).
    #[arg(long)]
    eta: Option<f64>,
    /// Reweighting offset [default: 5].
    #[arg(long)]
    beta: Option<f64>,
    /// Truncation level of qtaf [default: 0.8].
    #[arg(long)]
    gamma_trunc: Option<f64>,
    /// Perturbation coefficient of qpaf [default: 2].
    #[arg(long)]
    sigma: Option<f64>,
    /// Momentum of qaraf [default: 0.8] or decay of qadraf [default: 1].
    #[arg(long)]
    mu: Option<f64>,
    /// Adaptive step numerator of qadraf [default: 0.009].
    #[arg(long)]
    alpha_ad: Option<f64>,
    /// Adaptive step floor of qadraf [default: 1e-6].
    #[arg(long)]
    eps_ad: Option<f64>,
}

impl Params {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            eta: self.eta,
            beta: self.beta,
            gamma_trunc: self.gamma_trunc,
            sigma: self.sigma,
            mu: self.mu,
            alpha_ad: self.alpha_ad,
            eps_ad: self.eps_ad,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Full,
    Pure,
    Real,
}

impl From<Kind> for SignalKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Full => SignalKind::Full,
            Kind::Pure => SignalKind::Pure,
            Kind::Real => SignalKind::Real,
        }
    }
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[arg(long, default_value = "qraf", value_parser = parse_algo)]
    algo: AlgoSpec,
    /// Use the pure-quaternion wrapper.
    #[arg(long)]
    pure: bool,
    #[arg(long, default_value_t = 100)]
    d: usize,
    #[arg(long, default_value_t = 9.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Projection period of the pure wrapper.
    #[arg(long, default_value_t = 10)]
    tp: usize,
    /// Signal kind [default: pure with --pure, else full].
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Write the error curve as `iter,rel_error`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    save_instance: Option<PathBuf>,
    /// Use a saved instance instead of drawing one.
    #[arg(long)]
    load_instance: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "qraf", value_parser = parse_algos)]
    algos: AlgoList,
    /// Dimension list or start:step:end range.
    #[arg(long, default_value = "100", value_parser = usize_list)]
    d: List<usize>,
    /// Ratio list or start:step:end range.
    #[arg(long, default_value = "3:0.5:13", value_parser = f64_list)]
    ratios: List<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long)]
    pure: bool,
    #[arg(long, default_value_t = 10)]
    tp: usize,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value = "qwf,qrwf,qtaf,qpaf,qraf,qiraf,qaraf,qadraf", value_parser = parse_algos)]
    algos: AlgoList,
    #[arg(long, default_value = "64,100", value_parser = usize_list)]
    d: List<usize>,
    #[arg(long, default_value_t = 9.0)]
    ratio: f64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long)]
    pure: bool,
    #[arg(long, default_value_t = 10)]
    tp: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `algo,iter,rel_error` curves on a shared instance at the
    /// first dimension.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sign {
    Truth,
    Deployment,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sampling {
    Stacked,
    PerBlock,
}

#[derive(Args, Debug)]
struct ImageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    block: u32,
    #[arg(long, default_value_t = 9.0)]
    ratio: f64,
    /// A quaternionic algorithm (run with projection) or raf-mono / raf-conc.
    #[arg(long, default_value = "pqraf", value_parser = parse_image_algo)]
    algo: ImageAlgo,
    #[arg(long, default_value_t = 300)]
    iters: usize,
    #[arg(long, default_value_t = 10)]
    tp: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sign resolution: against the input, or by non-negative mean colour.
    #[arg(long, value_enum, default_value_t = Sign::Truth)]
    sign: Sign,
    /// Measurement count of raf-conc.
    #[arg(long, value_enum, default_value_t = Sampling::PerBlock)]
    conc_sampling: Sampling,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

type AppResult<T> = Result<T, Box<dyn std::error::Error>>;

/// An algorithm and whether the pure wrapper was requested by prefix.
type AlgoSpec = (Algorithm, bool);
type AlgoList = (Vec<Algorithm>, bool);

#[derive(Clone, Copy, Debug, PartialEq)]
enum ImageAlgo {
    Quaternion(Algorithm),
    Mono,
    Conc,
}

/// `qraf` or `pqraf` into the algorithm and the pure flag.
fn parse_algo(s: &str) -> Result<AlgoSpec, String> {
    let lower = s.trim().to_ascii_lowercase();
    if let Ok(a) = lower.parse::<Algorithm>() {
        return Ok((a, false));
    }
    if let Some(rest) = lower.strip_prefix('p') {
        if let Ok(a) = rest.parse::<Algorithm>() {
            return Ok((a, true));
        }
    }
    Err(format!("unknown algorithm `{s}` (expected one of qwf, qrwf, qtaf, qpaf, qraf, qiraf, qaraf, qadraf)"))
}

fn parse_algos(s: &str) -> Result<AlgoList, String> {
    let mut out = Vec::new();
    let mut pure = false;
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (a, p) = parse_algo(part)?;
        pure |= p;
        out.push(a);
    }
    if out.is_empty() {
        return Err("no algorithms given".into());
    }
    Ok((out, pure))
}

fn parse_image_algo(s: &str) -> Result<ImageAlgo, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "raf-mono" => Ok(ImageAlgo::Mono),
        "raf-conc" => Ok(ImageAlgo::Conc),
        other => parse_algo(other).map(|(a, _)| ImageAlgo::Quaternion(a)),
    }
}

/// A parsed list or range; wrapped so clap treats it as one value.
#[derive(Clone, Debug, PartialEq)]
struct List<T>(Vec<T>);

fn f64_list(s: &str) -> Result<List<f64>, String> {
    parse_range(s).map(List).map_err(|e| e.to_string())
}

fn usize_list(s: &str) -> Result<List<usize>, String> {
    parse_usize_range(s).map(List).map_err(|e| e.to_string())
}

fn describe(cfg: &SolverConfig, eta: Option<f64>) -> String {
    let eta = match eta {
        Some(e) => format!("{e}"),
        None => "0.2n/sum(psi)".into(),
    };
    format!(
        "algo={} eta={} beta={} gamma_trunc={} sigma={} mu={} alpha_ad={} eps_ad={} batch_exp_rule={} max_iters={} tol={:e}",
        cfg.algo,
        eta,
        cfg.beta,
        cfg.gamma_trunc,
        cfg.sigma,
        cfg.mu,
        cfg.alpha_ad,
        cfg.eps_ad,
        cfg.batch_exp_rule,
        cfg.max_iters,
        cfg.tol
    )
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| format!("cannot create {}: {e}", path.display()).into())
}

fn output(path: Option<&PathBuf>) -> AppResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_recover(a: RecoverArgs) -> AppResult<()> {
    let (algo, prefixed) = a.algo;
    let pure = a.pure || prefixed;
    let kind: SignalKind = a.kind.map(Into::into).unwrap_or(if pure { SignalKind::Pure } else { SignalKind::Full });
    let cfg = a.params.overrides().apply(SolverConfig {
        max_iters: a.max_iters,
        tol: a.tol,
        trace: a.trace.is_some(),
        ..SolverConfig::new(algo)
    });
    cfg.validate()?;
    let pure_cfg = PureConfig { t_p: a.tp };
    if pure {
        pure_cfg.validate(cfg.max_iters)?;
    }
    let mut rng = RngStream::new(a.seed, 0);
    let ens = match &a.load_instance {
        Some(p) => MeasurementEnsemble::load(p)?,
        None => make_instance(a.d, a.ratio, &mut rng, kind)?,
    };
    if let Some(p) = &a.save_instance {
        ens.save(p)?;
    }
    eprintln!(
        "resolved: {} pure={} tp={} d={} n={} kind={} seed={}",
        describe(&cfg, Some(cfg.resolved_eta(&ens))),
        pure,
        a.tp,
        ens.d(),
        ens.n(),
        ens.kind,
        a.seed
    );
    let solver_rng = rng.fork(1);
    let z0 = quatflow::init::initialize(&ens, &InitConfig::for_algorithm(algo, ens.n()))?;
    let rec = if pure {
        quatflow::pure::run_pure_from(&ens, z0, &cfg, &pure_cfg, solver_rng)?
    } else {
        run(&ens, z0, &cfg, solver_rng)?
    };
    if let (Some(p), Some(t)) = (&a.trace, &rec.trace) {
        let mut w = create(p)?;
        write_trace_csv(&mut w, t)?;
        w.flush()?;
    }
    println!(
        "converged={} diverged={} iters={} rel_error={:.6e} time_ms={:.3}",
        rec.converged, rec.diverged, rec.iters_used, rec.final_rel_error, rec.wall_time_ms
    );
    Ok(())
}

fn sweep_spec(
    (algos, prefixed): AlgoList,
    d_values: Vec<usize>,
    ratios: Vec<f64>,
    trials: usize,
    seed: u64,
    (tol, max_iters, pure_flag, tp): (f64, usize, bool, usize),
    params: &Params,
) -> AppResult<SweepSpec> {
    let pure = pure_flag || prefixed;
    let mut spec = SweepSpec::new(algos, d_values, ratios, trials, seed);
    spec.tol = tol;
    spec.max_iters = max_iters;
    spec.overrides = params.overrides();
    if pure {
        spec.pure = Some(PureConfig { t_p: tp });
        spec.signal_kind = SignalKind::Pure;
    }
    spec.validate()?;
    for &algo in &spec.algos {
        let cfg = spec.solver_config(algo);
        eprintln!("resolved: {} pure={pure} tp={tp} seed={seed}", describe(&cfg, cfg.fixed_eta()));
    }
    eprintln!("resolved: d={:?} ratios={:?} trials={}", spec.d_values, spec.ratio_values, spec.trials);
    Ok(spec)
}

fn cmd_sweep(a: SweepArgs) -> AppResult<()> {
    let spec = sweep_spec(
        a.algos,
        a.d.0,
        a.ratios.0,
        a.trials,
        a.seed,
        (a.tol, a.max_iters, a.pure, a.tp),
        &a.params,
    )?;
    let result = success_sweep(&spec)?;
    let mut w = output(a.out.as_ref())?;
    write_sweep_csv(&mut w, &result)?;
    w.flush()?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> AppResult<()> {
    let spec = sweep_spec(
        a.algos,
        a.d.0,
        vec![a.ratio],
        a.trials,
        a.seed,
        (a.tol, a.max_iters, a.pure, a.tp),
        &a.params,
    )?;
    let result = success_sweep(&spec)?;
    let mut w = output(a.out.as_ref())?;
    write_sweep_csv(&mut w, &result)?;
    w.flush()?;
    if let Some(p) = &a.trace {
        let traces = convergence_trace(&spec, spec.d_values[0], a.ratio)?;
        let mut w = create(p)?;
        write_traces_csv(&mut w, &traces)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_image(a: ImageArgs) -> AppResult<()> {
    let img = load_png(&a.input)?;
    let job = decompose(&img, a.block)?;
    let mode = match a.sign {
        Sign::Truth => SignMode::Truth,
        Sign::Deployment => SignMode::Deployment,
    };
    let base = |cfg: SolverConfig| {
        a.params.overrides().apply(SolverConfig { max_iters: a.iters, tol: a.tol, ..cfg })
    };
    let (out, metrics) = match a.algo {
        ImageAlgo::Mono | ImageAlgo::Conc => {
            let cfg = base(real_raf_config());
            cfg.validate()?;
            let sampling = match a.conc_sampling {
                Sampling::Stacked => ConcSampling::Stacked,
                Sampling::PerBlock => ConcSampling::PerBlock,
            };
            eprintln!(
                "resolved: {} baseline={:?} conc_sampling={sampling:?} block={} ratio={} seed={}",
                describe(&cfg, cfg.fixed_eta()),
                a.algo,
                a.block,
                a.ratio,
                a.seed
            );
            if a.algo == ImageAlgo::Mono {
                raf_mono(&job, a.ratio, &cfg, a.seed, mode)?
            } else {
                raf_conc(&job, a.ratio, sampling, &cfg, a.seed, mode)?
            }
        }
        ImageAlgo::Quaternion(algo) => {
            let cfg = base(SolverConfig::new(algo));
            cfg.validate()?;
            let pure_cfg = PureConfig { t_p: a.tp };
            pure_cfg.validate(cfg.max_iters)?;
            eprintln!(
                "resolved: {} pure=true tp={} block={} ratio={} seed={}",
                describe(&cfg, cfg.fixed_eta()),
                a.tp,
                a.block,
                a.ratio,
                a.seed
            );
            recover_image(&job, a.ratio, &cfg, &pure_cfg, a.seed, mode)?
        }
    };
    save_png(&out, &a.out)?;
    if let Some(p) = &a.metrics {
        let mut w = create(p)?;
        write_metrics_csv(&mut w, &metrics)?;
        w.flush()?;
    }
    let defective = metrics.per_block.iter().filter(|b| !b.converged).count();
    println!("psnr={:.4} ssim={:.6} blocks={} unconverged={}", metrics.psnr, metrics.ssim, metrics.per_block.len(), defective);
    Ok(())
}

/// Turns `key=value` lines into `--key value` arguments. Blank lines and
/// lines starting with `#` are skipped; `true` / `false` values toggle
/// switches.
fn config_args(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", no + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        match v.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

const SUBCOMMANDS: [&str; 5] = ["recover", "sweep", "grid", "bench", "image"];

/// Splices config-file arguments right after the subcommand so that flags
/// given on the command line override them.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let extra = config_args(&text)?;
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Recover(a) => cmd_recover(a),
        Command::Sweep(a) | Command::Grid(a) => cmd_sweep(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Image(a) => cmd_image(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
