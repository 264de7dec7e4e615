//! Seeded quaternionic Gaussian measurement ensembles.
//!
//! Every random draw goes through an [`RngStream`], a ChaCha8 generator keyed
//! by a `(seed, stream)` pair, so independent trials never share state and a
//! trial can be regenerated from its key alone.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quat::{inner_slice, QMatrix, QVector, Quaternion};

/// Deterministic random source for one trial.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng, spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// An independent stream derived from this key and `tag`.
    pub fn fork(&self, tag: u64) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5151))), self.stream)
    }

    /// Uniform on `(0, 1]`.
    fn unit_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; the second variate of each pair is
    /// cached for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// SplitMix64 finaliser, used to turn structured keys into seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One draw from `½(N(0,1) + N(0,1)i + N(0,1)j + N(0,1)k)`, so `E|q|² = 1`.
pub fn sample_quaternion_gaussian(rng: &mut RngStream) -> Quaternion {
    let a = rng.normal();
    let b = rng.normal();
    let c = rng.normal();
    let d = rng.normal();
    Quaternion::new(0.5 * a, 0.5 * b, 0.5 * c, 0.5 * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalKind {
    /// General quaternion signal; errors are measured modulo a right unit phase.
    Full,
    /// Zero real part; errors are measured modulo sign.
    Pure,
    /// Real signal with real Gaussian measurements (real-valued baselines).
    Real,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Full => "full",
            SignalKind::Pure => "pure",
            SignalKind::Real => "real",
        })
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SignalKind::Full),
            "pure" => Ok(SignalKind::Pure),
            "real" => Ok(SignalKind::Real),
            other => Err(Error::InvalidParameter(format!("unknown signal kind `{other}`"))),
        }
    }
}

/// Sensing matrix plus amplitudes for one problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementEnsemble {
    pub a: QMatrix,
    pub psi: Vec<f64>,
    pub x_true: Option<QVector>,
    pub kind: SignalKind,
    pub seed: u64,
    pub stream: u64,
}

impl MeasurementEnsemble {
    /// Measures `x` with `a`; `ψ_k = |⟨α_k, x⟩|`.
    pub fn from_signal(a: QMatrix, x: QVector, kind: SignalKind) -> Result<Self> {
        let psi = measure(&a, &x)?;
        Ok(Self { a, psi, x_true: Some(x), kind, seed: 0, stream: 0 })
    }

    /// Amplitudes only, as in deployment where the signal is unknown.
    pub fn from_amplitudes(a: QMatrix, psi: Vec<f64>, kind: SignalKind) -> Result<Self> {
        if psi.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: psi.len() });
        }
        if psi.is_empty() || a.cols() == 0 {
            return Err(Error::EmptyMeasurements);
        }
        Ok(Self { a, psi, x_true: None, kind, seed: 0, stream: 0 })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    /// Same measurements with the signal hidden.
    pub fn without_truth(&self) -> Self {
        Self { x_true: None, ..self.clone() }
    }

    /// Writes the instance as text: a header line, then the matrix entries,
    /// amplitudes and (optionally) the signal, one quaternion or real per
    /// line, using shortest round-trip float formatting.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "quatflow-instance 1")?;
        writeln!(
            w,
            "n={} d={} kind={} seed={} stream={} truth={}",
            self.n(),
            self.d(),
            self.kind,
            self.seed,
            self.stream,
            self.x_true.is_some() as u8
        )?;
        for q in self.a.as_slice() {
            writeln!(w, "{:e} {:e} {:e} {:e}", q.a, q.b, q.c, q.d)?;
        }
        for p in &self.psi {
            writeln!(w, "{p:e}")?;
        }
        if let Some(x) = &self.x_true {
            for q in x.iter() {
                writeln!(w, "{:e} {:e} {:e} {:e}", q.a, q.b, q.c, q.d)?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| Error::Format("unexpected end of file".into()))?.map_err(Error::from)
        };
        if next()?.trim() != "quatflow-instance 1" {
            return Err(Error::Format("missing `quatflow-instance 1` header".into()));
        }
        let header = next()?;
        let field = |key: &str| -> Result<&str> {
            header
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Format(format!("header lacks `{key}`")))
        };
        let parse_u64 = |key: &str| -> Result<u64> {
            field(key)?.parse().map_err(|_| Error::Format(format!("bad `{key}`")))
        };
        let n = parse_u64("n")? as usize;
        let d = parse_u64("d")? as usize;
        let kind: SignalKind = field("kind")?.parse()?;
        let seed = parse_u64("seed")?;
        let stream = parse_u64("stream")?;
        let truth = parse_u64("truth")? == 1;

        let quat = |line: String| -> Result<Quaternion> {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{t}`"))))
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(Error::Format(format!("expected 4 components, got {}", v.len())));
            }
            Ok(Quaternion::new(v[0], v[1], v[2], v[3]))
        };
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n * d {
            data.push(quat(next()?)?);
        }
        let mut psi = Vec::with_capacity(n);
        for _ in 0..n {
            let line = next()?;
            psi.push(line.trim().parse().map_err(|_| Error::Format(format!("bad amplitude `{line}`")))?);
        }
        let x_true = if truth {
            let mut x = Vec::with_capacity(d);
            for _ in 0..d {
                x.push(quat(next()?)?);
            }
            Some(QVector(x))
        } else {
            None
        };
        Ok(Self { a: QMatrix::from_vec(n, d, data)?, psi, x_true, kind, seed, stream })
    }
}

/// `n = round(ratio · d)`.
pub fn measurement_count(d: usize, ratio: f64) -> usize {
    (ratio * d as f64).round() as usize
}

/// Draws a unit-norm signal of the given kind followed by an `n × d`
/// quaternionic Gaussian sensing matrix, and measures the signal.
///
/// The signal is drawn first, entry by entry, four standard normals per
/// entry (the real part is discarded for pure signals), then the matrix in
/// row-major order.
pub fn make_instance(d: usize, ratio: f64, rng: &mut RngStream, kind: SignalKind) -> Result<MeasurementEnsemble> {
    if d == 0 {
        return Err(Error::InvalidParameter("signal dimension must be >= 1".into()));
    }
    if !(ratio >= 1.0) {
        return Err(Error::InvalidParameter(format!("oversampling ratio must be >= 1, got {ratio}")));
    }
    let n = measurement_count(d, ratio);
    let x = match kind {
        SignalKind::Real => QVector((0..d).map(|_| Quaternion::real(rng.normal())).collect()),
        SignalKind::Full | SignalKind::Pure => QVector(
            (0..d)
                .map(|_| {
                    let q = Quaternion::new(rng.normal(), rng.normal(), rng.normal(), rng.normal());
                    if kind == SignalKind::Pure {
                        q.imag()
                    } else {
                        q
                    }
                })
                .collect(),
        ),
    };
    let x = x.scale(1.0 / x.norm());
    let a = sample_matrix(n, d, rng, kind);
    let mut ens = MeasurementEnsemble::from_signal(a, x, kind)?;
    ens.seed = rng.seed();
    ens.stream = rng.stream();
    Ok(ens)
}

/// Gaussian sensing matrix; real `N(0,1)` entries for [`SignalKind::Real`],
/// quaternionic `N_H` otherwise. Both give `E[α α*] = I`.
pub fn sample_matrix(n: usize, d: usize, rng: &mut RngStream, kind: SignalKind) -> QMatrix {
    let data = (0..n * d)
        .map(|_| match kind {
            SignalKind::Real => Quaternion::real(rng.normal()),
            _ => sample_quaternion_gaussian(rng),
        })
        .collect();
    QMatrix::from_vec(n, d, data).expect("n*d entries")
}

/// Norm estimate `λ₀ = ((1/n) Σ ψ_k²)^{1/2}`.
pub fn estimate_norm(psi: &[f64]) -> Result<f64> {
    if psi.is_empty() {
        return Err(Error::EmptyMeasurements);
    }
    Ok((psi.iter().map(|p| p * p).sum::<f64>() / psi.len() as f64).sqrt())
}

/// Amplitudes `|⟨α_k, z⟩|` for every row of `a`.
pub fn measure(a: &QMatrix, z: &QVector) -> Result<Vec<f64>> {
    if a.cols() != z.len() {
        return Err(Error::DimensionMismatch { expected: a.cols(), found: z.len() });
    }
    Ok((0..a.rows()).map(|k| inner_slice(a.row(k), z.as_slice()).abs()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(1, 0);
        let draws: Vec<Quaternion> = (0..100_000).map(|_| sample_quaternion_gaussian(&mut rng)).collect();
        let mean_sq = draws.iter().map(|q| q.norm_sqr()).sum::<f64>() / draws.len() as f64;
        assert!((mean_sq - 1.0).abs() < 0.02, "{mean_sq}");
        for comp in 0..4 {
            let var = draws.iter().map(|q| q.to_array()[comp].powi(2)).sum::<f64>() / draws.len() as f64;
            assert!((var - 0.25).abs() < 0.01, "component {comp}: {var}");
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = sample_quaternion_gaussian(&mut RngStream::new(1, 0));
        let b = sample_quaternion_gaussian(&mut RngStream::new(1, 0));
        let c = sample_quaternion_gaussian(&mut RngStream::new(1, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn instance_shape_and_kinds() {
        let mut rng = RngStream::new(3, 0);
        let ens = make_instance(4, 9.0, &mut rng, SignalKind::Full).unwrap();
        assert_eq!((ens.n(), ens.d()), (36, 4));
        assert_eq!(ens.psi.len(), 36);
        assert!(ens.psi.iter().all(|&p| p >= 0.0));
        assert!((ens.x_true.as_ref().unwrap().norm() - 1.0).abs() < 1e-14);

        let pure = make_instance(16, 3.0, &mut RngStream::new(3, 1), SignalKind::Pure).unwrap();
        assert!(pure.x_true.unwrap().iter().all(|q| q.a == 0.0));

        assert!(make_instance(0, 3.0, &mut RngStream::new(0, 0), SignalKind::Full).is_err());
        assert!(make_instance(4, 0.5, &mut RngStream::new(0, 0), SignalKind::Full).is_err());
    }

    #[test]
    fn norm_estimate() {
        assert_eq!(estimate_norm(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert_eq!(estimate_norm(&[0.0; 5]).unwrap(), 0.0);
        assert!(matches!(estimate_norm(&[]), Err(Error::EmptyMeasurements)));
    }

    #[test]
    fn measure_cases() {
        let mut rng = RngStream::new(5, 0);
        let ens = make_instance(6, 4.0, &mut rng, SignalKind::Full).unwrap();
        assert!(measure(&ens.a, &QVector::zeros(6)).unwrap().iter().all(|&p| p == 0.0));
        let a = QMatrix::from_rows(&[QVector::basis(3, 0)]).unwrap();
        let z = QVector(vec![Quaternion::I, Quaternion::ZERO, Quaternion::ZERO]);
        assert_eq!(measure(&a, &z).unwrap(), vec![1.0]);
        assert!(measure(&a, &QVector::zeros(2)).is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let mut rng = RngStream::new(8, 2);
        let ens = make_instance(3, 2.0, &mut rng, SignalKind::Pure).unwrap();
        let mut buf = Vec::new();
        ens.write_to(&mut buf).unwrap();
        let back = MeasurementEnsemble::read_from(&buf[..]).unwrap();
        assert_eq!(back, ens);

        let hidden = ens.without_truth();
        let mut buf = Vec::new();
        hidden.write_to(&mut buf).unwrap();
        assert_eq!(MeasurementEnsemble::read_from(&buf[..]).unwrap(), hidden);

        assert!(MeasurementEnsemble::read_from(&b"nonsense\n"[..]).is_err());
        let truncated = &buf[..buf.len() / 2];
        assert!(MeasurementEnsemble::read_from(truncated).is_err());
    }
}
