//! Eigen-machinery for quaternion Hermitian matrices.
//!
//! The solvers only ever need the leading standard eigenvector of a weighted
//! sum of rank-one terms `Σ w_k α_k α_k*`, which [`power_leading`] provides.
//! [`complex_adjoint_eig`] is an independent dense route through the complex
//! adjoint representation and exists for cross-checking. [`sym4_smallest`]
//! solves the 4×4 real symmetric problem behind the pure-quaternion
//! projection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::{inner_slice, QMatrix, QVector, Quaternion};

/// Default number of power iterations used by every spectral initializer.
pub const DEFAULT_POWER_ITERS: usize = 100;

/// A dense quaternion matrix with `A* = A`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianQMatrix {
    inner: QMatrix,
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: QVector,
}

impl HermitianQMatrix {
    /// Validates `m* = m` to within `1e-10` relative to the largest entry.
    pub fn new(m: QMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::ShapeMismatch { expected: (m.rows(), m.rows()), found: (m.rows(), m.cols()) });
        }
        let scale = m.as_slice().iter().map(|q| q.abs()).fold(1.0, f64::max);
        let dev = m.max_abs_diff(&m.adjoint());
        if dev > 1e-10 * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { inner: m })
    }

    /// `scale · Σ_k w_k α_k α_k*` over the rows `α_k` of `a` with nonzero
    /// weight. Only the upper triangle is accumulated; the lower one is
    /// mirrored, so the result is exactly Hermitian.
    pub fn from_weighted_rows(a: &QMatrix, weights: &[f64], scale: f64) -> Result<Self> {
        if weights.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: weights.len() });
        }
        let d = a.cols();
        let mut m = QMatrix::zeros(d, d);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = a.row(k);
            for r in 0..d {
                let ar = row[r].scale(w);
                for c in r..d {
                    // (α α*)_{rc} = α_r conj(α_c)
                    let prod = ar * row[c].conj();
                    m[(r, c)] += prod;
                }
            }
        }
        for r in 0..d {
            m[(r, r)] = Quaternion::real(m[(r, r)].a * scale);
            for c in r + 1..d {
                let v = m[(r, c)].scale(scale);
                m[(r, c)] = v;
                m[(c, r)] = v.conj();
            }
        }
        Ok(Self { inner: m })
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.inner
    }

    pub fn apply(&self, v: &QVector) -> Result<QVector> {
        self.inner.mat_vec(v)
    }

    /// Rayleigh quotient `Re⟨v, S v⟩ / ‖v‖²`.
    pub fn rayleigh(&self, v: &QVector) -> Result<f64> {
        let sv = self.apply(v)?;
        Ok(inner_slice(v.as_slice(), sv.as_slice()).a / v.norm_sqr())
    }
}

/// Leading standard eigenpair by plain power iteration.
///
/// Starts from `(1, …, 1)/√d` and performs exactly `iters` normalised
/// multiplications. The eigenvector is only defined up to a right unit
/// quaternion factor.
pub fn power_leading(s: &HermitianQMatrix, iters: usize) -> Result<EigenPair> {
    power_leading_traced(s, iters).map(|(pair, _)| pair)
}

/// [`power_leading`] that also returns the Rayleigh quotient of every iterate
/// (start vector included).
pub fn power_leading_traced(s: &HermitianQMatrix, iters: usize) -> Result<(EigenPair, Vec<f64>)> {
    if iters == 0 {
        return Err(Error::InvalidParameter("power iteration count must be >= 1".into()));
    }
    let d = s.dim();
    if d == 0 || s.matrix().as_slice().iter().all(|q| q.norm_sqr() == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let mut v = start_vector(s, d)?;
    let mut trace = Vec::with_capacity(iters + 1);
    let mut sv = s.apply(&v)?;
    trace.push(inner_slice(v.as_slice(), sv.as_slice()).a);
    for _ in 0..iters {
        let nrm = sv.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        v = sv.scale(1.0 / nrm);
        sv = s.apply(&v)?;
        trace.push(inner_slice(v.as_slice(), sv.as_slice()).a);
    }
    let value = *trace.last().unwrap();
    Ok((EigenPair { value, vector: v }, trace))
}

// The all-ones start can be annihilated by S; fall back to the standard basis.
fn start_vector(s: &HermitianQMatrix, d: usize) -> Result<QVector> {
    let ones = QVector(vec![Quaternion::real(1.0 / (d as f64).sqrt()); d]);
    if s.apply(&ones)?.norm_sqr() > 0.0 {
        return Ok(ones);
    }
    for k in 0..d {
        let e = QVector::basis(d, k);
        if s.apply(&e)?.norm_sqr() > 0.0 {
            return Ok(e);
        }
    }
    Err(Error::ZeroMatrix)
}

/// Complex adjoint `[[A₁, A₂], [−conj(A₂), conj(A₁)]]` of `A = A₁ + A₂ j`.
fn complex_adjoint(s: &HermitianQMatrix) -> Vec<Vec<Complex64>> {
    let d = s.dim();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); 2 * d]; 2 * d];
    for r in 0..d {
        for c in 0..d {
            let q = s.matrix()[(r, c)];
            let z1 = Complex64::new(q.a, q.b);
            let z2 = Complex64::new(q.c, q.d);
            h[r][c] = z1;
            h[r][c + d] = z2;
            h[r + d][c] = -z2.conj();
            h[r + d][c + d] = z1.conj();
        }
    }
    h
}

/// Cyclic Jacobi for a complex Hermitian matrix. Returns eigenvalues and the
/// eigenvector matrix (columns), both unsorted.
fn hermitian_jacobi(mut h: Vec<Vec<Complex64>>) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = h.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![vec![zero; n]; n];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = Complex64::new(1.0, 0.0);
    }
    let total: f64 = h.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| h[p][q].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[p][q];
                let mag = hpq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = hpq / mag; // e^{iφ}
                let app = h[p][p].re;
                let aqq = h[q][q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = D R with D_q = e^{-iφ}; only the (p,q) block differs from I.
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;
                for row in h.iter_mut() {
                    let (hp, hq) = (row[p], row[q]);
                    row[p] = hp * upp + hq * uqp;
                    row[q] = hp * upq + hq * uqq;
                }
                for k in 0..n {
                    let (hp, hq) = (h[p][k], h[q][k]);
                    h[p][k] = upp.conj() * hp + uqp.conj() * hq;
                    h[q][k] = upq.conj() * hp + uqq.conj() * hq;
                }
                h[p][q] = zero;
                h[q][p] = zero;
                h[p][p] = Complex64::new(h[p][p].re, 0.0);
                h[q][q] = Complex64::new(h[q][q].re, 0.0);
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = vp * upp + vq * uqp;
                    row[q] = vp * upq + vq * uqq;
                }
            }
        }
    }
    ((0..n).map(|k| h[k][k].re).collect(), v)
}

/// Spectrum of the complex adjoint of `s`, sorted ascending.
///
/// Each standard eigenvalue of `s` appears twice. Intended as a dense
/// reference for small matrices (`dim ≤ 64`).
pub fn complex_adjoint_eig(s: &HermitianQMatrix) -> Vec<f64> {
    let (mut values, _) = hermitian_jacobi(complex_adjoint(s));
    values.sort_by(f64::total_cmp);
    values
}

/// Leading eigenpair of `s` recovered through the complex adjoint.
///
/// An eigenvector `[u; v]` of the adjoint maps back to the quaternion vector
/// `u + (−conj v) j`.
pub fn complex_adjoint_leading(s: &HermitianQMatrix) -> EigenPair {
    let d = s.dim();
    let (values, vectors) = hermitian_jacobi(complex_adjoint(s));
    let top = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let x: Vec<Quaternion> = (0..d)
        .map(|k| {
            let u = vectors[k][top];
            let w = -vectors[k + d][top].conj();
            Quaternion::new(u.re, u.im, w.re, w.im)
        })
        .collect();
    let x = QVector(x);
    let nrm = x.norm();
    EigenPair { value: values[top], vector: x.scale(1.0 / nrm) }
}

/// Smallest eigenpair of a real symmetric 4×4 matrix.
///
/// Cyclic Jacobi on the upper triangle. Ties in the smallest eigenvalue go to
/// the lowest index, and the returned vector has its first nonzero component
/// positive, so degenerate inputs still give a fixed answer (`I ↦ e₁`).
pub fn sym4_smallest(w: &[[f64; 4]; 4]) -> (f64, [f64; 4]) {
    let mut a = *w;
    for r in 0..4 {
        for c in 0..r {
            a[r][c] = a[c][r];
        }
    }
    let mut v = [[0.0; 4]; 4];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..64 {
        let off: f64 = (0..4).flat_map(|p| (p + 1..4).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        if off.sqrt() <= 1e-17 * scale || off == 0.0 {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut best = 0;
    for k in 1..4 {
        if a[k][k] < a[best][best] {
            best = k;
        }
    }
    let mut vec = [v[0][best], v[1][best], v[2][best], v[3][best]];
    let nrm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in vec.iter_mut() {
        *x /= nrm;
    }
    if let Some(first) = vec.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            for x in vec.iter_mut() {
                *x = -*x;
            }
        }
    }
    (a[best][best], vec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::outer;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }

    fn random_qvec(d: usize, seed: &mut u64) -> QVector {
        QVector((0..d).map(|_| Quaternion::new(lcg(seed), lcg(seed), lcg(seed), lcg(seed))).collect())
    }

    #[test]
    fn diagonal_power_iteration() {
        let mut m = QMatrix::zeros(2, 2);
        m[(0, 0)] = Quaternion::real(2.0);
        m[(1, 1)] = Quaternion::real(1.0);
        let s = HermitianQMatrix::new(m).unwrap();
        let pair = power_leading(&s, DEFAULT_POWER_ITERS).unwrap();
        assert!((pair.value - 2.0).abs() < 1e-12);
        assert!((pair.vector[0].abs() - 1.0).abs() < 1e-12);
        assert!(pair.vector[1].abs() < 1e-12);
    }

    #[test]
    fn rank_one_power_iteration() {
        let mut seed = 7;
        let alpha = random_qvec(5, &mut seed);
        let alpha = alpha.scale(1.0 / alpha.norm());
        let s = HermitianQMatrix::new(outer(&alpha, &alpha)).unwrap();
        let pair = power_leading(&s, 100).unwrap();
        assert!((pair.value - 1.0).abs() < 1e-12);
        // |⟨α, v⟩| = 1 means v = α·w for a unit w
        let ip = inner_slice(alpha.as_slice(), pair.vector.as_slice());
        assert!((ip.abs() - 1.0).abs() < 1e-12);
        assert!((pair.vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_rejected() {
        let s = HermitianQMatrix::new(QMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(power_leading(&s, 10), Err(Error::ZeroMatrix)));
        let s = HermitianQMatrix::new(QMatrix::identity(3)).unwrap();
        assert!(power_leading(&s, 0).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = QMatrix::identity(2);
        m[(0, 1)] = Quaternion::I;
        m[(1, 0)] = Quaternion::I;
        assert!(matches!(HermitianQMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn null_start_vector_falls_back() {
        // S annihilates (1,1)/√2 but not e₁.
        let mut m = QMatrix::zeros(2, 2);
        m[(0, 0)] = Quaternion::real(1.0);
        m[(0, 1)] = Quaternion::real(-1.0);
        m[(1, 0)] = Quaternion::real(-1.0);
        m[(1, 1)] = Quaternion::real(1.0);
        let s = HermitianQMatrix::new(m).unwrap();
        let pair = power_leading(&s, 50).unwrap();
        assert!((pair.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_spectrum_of_identity_and_rank_one() {
        let s = HermitianQMatrix::new(QMatrix::identity(4)).unwrap();
        let ev = complex_adjoint_eig(&s);
        assert_eq!(ev.len(), 8);
        assert!(ev.iter().all(|&x| (x - 1.0).abs() < 1e-14));

        let mut seed = 3;
        let alpha = random_qvec(4, &mut seed);
        let alpha = alpha.scale(1.0 / alpha.norm());
        let s = HermitianQMatrix::new(outer(&alpha, &alpha)).unwrap();
        let ev = complex_adjoint_eig(&s);
        for &x in &ev[..6] {
            assert!(x.abs() < 1e-12, "{ev:?}");
        }
        assert!((ev[6] - 1.0).abs() < 1e-12 && (ev[7] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_leading_vector_is_eigenvector() {
        let mut seed = 11;
        let rows: Vec<QVector> = (0..20).map(|_| random_qvec(6, &mut seed)).collect();
        let a = QMatrix::from_rows(&rows).unwrap();
        let s = HermitianQMatrix::from_weighted_rows(&a, &[1.0; 20], 0.05).unwrap();
        let pair = complex_adjoint_leading(&s);
        let sv = s.apply(&pair.vector).unwrap();
        let resid = sv.sub(&pair.vector.scale(pair.value)).unwrap().norm();
        assert!(resid < 1e-10, "residual {resid}");
    }

    #[test]
    fn weighted_rows_match_outer_products() {
        let mut seed = 5;
        let rows: Vec<QVector> = (0..4).map(|_| random_qvec(3, &mut seed)).collect();
        let a = QMatrix::from_rows(&rows).unwrap();
        let w = [0.5, -1.0, 2.0, 0.0];
        let s = HermitianQMatrix::from_weighted_rows(&a, &w, 0.25).unwrap();
        let mut expect = QMatrix::zeros(3, 3);
        for (r, &wk) in rows.iter().zip(&w) {
            expect = expect.scale_add(0.25 * wk, &outer(r, r)).unwrap();
        }
        assert!(s.matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn sym4_pinned_cases() {
        let diag = |x: [f64; 4]| {
            let mut m = [[0.0; 4]; 4];
            for k in 0..4 {
                m[k][k] = x[k];
            }
            m
        };
        assert_eq!(sym4_smallest(&diag([4.0, 3.0, 2.0, 1.0])), (1.0, [0.0, 0.0, 0.0, 1.0]));
        assert_eq!(sym4_smallest(&diag([1.0, 1.0, 1.0, 1.0])), (1.0, [1.0, 0.0, 0.0, 0.0]));
        assert_eq!(sym4_smallest(&diag([1.0, 0.0, 0.0, 0.0])), (0.0, [0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn sym4_residual_on_gram_matrices() {
        let mut seed = 99;
        for _ in 0..50 {
            let m: Vec<[f64; 4]> = (0..8).map(|_| [lcg(&mut seed), lcg(&mut seed), lcg(&mut seed), lcg(&mut seed)]).collect();
            let mut w = [[0.0; 4]; 4];
            for row in &m {
                for r in 0..4 {
                    for c in 0..4 {
                        w[r][c] += row[r] * row[c];
                    }
                }
            }
            let (lam, v) = sym4_smallest(&w);
            let mut resid = 0.0;
            for r in 0..4 {
                let wv: f64 = (0..4).map(|c| w[r][c] * v[c]).sum();
                resid += (wv - lam * v[r]).powi(2);
            }
            assert!(resid.sqrt() <= 1e-10);
            // no other unit vector does better than the reported minimum
            for _ in 0..20 {
                let u = [lcg(&mut seed), lcg(&mut seed), lcg(&mut seed), lcg(&mut seed)];
                let nu: f64 = u.iter().map(|x| x * x).sum();
                let q: f64 = (0..4).map(|r| (0..4).map(|c| u[r] * w[r][c] * u[c]).sum::<f64>()).sum();
                assert!(q / nu >= lam - 1e-12);
            }
        }
    }
}
