//! Quaternion scalars, vectors and dense matrices.
//!
//! A quaternion `a + b i + c j + d k` is stored as four `f64` components.
//! Products are Hamilton products (`ij = k`, `jk = i`, `ki = j`) and every
//! composite expression is evaluated left to right exactly as written; the
//! algebra is non-commutative, so `p * q` and `q * p` generally differ.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    #[inline]
    pub const fn real(a: f64) -> Self {
        Self::new(a, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub const fn pure(b: f64, c: f64, d: f64) -> Self {
        Self::new(0.0, b, c, d)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Squared modulus `a² + b² + c² + d²`.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `q / |q|`, with `sign(0) = 1`.
    #[inline]
    pub fn sign(self) -> Self {
        let m = self.abs();
        if m == 0.0 {
            Self::ONE
        } else {
            Self::new(self.a / m, self.b / m, self.c / m, self.d / m)
        }
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Vector part `b i + c j + d k`.
    #[inline]
    pub fn imag(self) -> Self {
        Self::new(0.0, self.b, self.c, self.d)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// `conj(self) * rhs` without materialising the conjugate.
    #[inline]
    pub fn conj_mul(self, rhs: Self) -> Self {
        let (a1, b1, c1, d1) = (self.a, -self.b, -self.c, -self.d);
        let (a2, b2, c2, d2) = (rhs.a, rhs.b, rhs.c, rhs.d);
        Self::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            // paired so that conj(q)·q has exactly zero vector part
            (a1 * b2 + b1 * a2) + (c1 * d2 - d1 * c2),
            (a1 * c2 + c1 * a2) + (d1 * b2 - b1 * d2),
            (a1 * d2 + d1 * a2) + (b1 * c2 - c1 * b2),
        )
    }
}

/// Hamilton product.
pub fn q_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn q_conj(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn q_sign(q: Quaternion) -> Quaternion {
    q.sign()
}

impl Mul for Quaternion {
    type Output = Quaternion;

    #[inline]
    fn mul(self, rhs: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (rhs.a, rhs.b, rhs.c, rhs.d);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            // paired so that conj(q)·q has exactly zero vector part
            (a1 * b2 + b1 * a2) + (c1 * d2 - d1 * c2),
            (a1 * c2 + c1 * a2) + (d1 * b2 - b1 * d2),
            (a1 * d2 + d1 * a2) + (b1 * c2 - c1 * b2),
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;

    #[inline]
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    #[inline]
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c, self.d + rhs.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    #[inline]
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c, self.d - rhs.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, rhs: Quaternion) {
        self.a += rhs.a;
        self.b += rhs.b;
        self.c += rhs.c;
        self.d += rhs.d;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, rhs: Quaternion) {
        self.a -= rhs.a;
        self.b -= rhs.b;
        self.c -= rhs.c;
        self.d -= rhs.d;
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.a, self.b, self.c, self.d)
    }
}

/// A column vector in `H^d`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QVector(pub Vec<Quaternion>);

impl QVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Quaternion::ZERO; len])
    }

    /// The `k`-th standard basis vector.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = Quaternion::ONE;
        v
    }

    pub fn from_reals(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Quaternion::real(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|q| q.norm_sqr()).sum()
    }

    /// Euclidean norm `(Σ|q_k|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|q| q.scale(s)).collect())
    }

    /// Right multiplication by a quaternion: `v · w`.
    pub fn mul_right(&self, w: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| q * w).collect())
    }

    /// Left multiplication by a quaternion: `w · v`.
    pub fn mul_left(&self, w: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| w * q).collect())
    }

    pub fn sub(&self, other: &QVector) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(&p, &q)| p - q).collect()))
    }

    pub fn add(&self, other: &QVector) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(&p, &q)| p + q).collect()))
    }

    /// `self += s * other` (real `s`).
    pub fn axpy(&mut self, s: f64, other: &QVector) -> Result<()> {
        check_len(self.len(), other.len())?;
        for (p, &q) in self.0.iter_mut().zip(&other.0) {
            *p += q.scale(s);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }

    /// Entry-wise vector part.
    pub fn imag(&self) -> Self {
        Self(self.0.iter().map(|q| q.imag()).collect())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.0.iter().map(|q| q.a).collect()
    }
}

impl Index<usize> for QVector {
    type Output = Quaternion;

    fn index(&self, i: usize) -> &Quaternion {
        &self.0[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.0[i]
    }
}

impl From<Vec<Quaternion>> for QVector {
    fn from(v: Vec<Quaternion>) -> Self {
        Self(v)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Raw-slice inner product `Σ conj(u_k) v_k`; lengths are assumed equal.
#[inline]
pub(crate) fn inner_slice(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    let mut acc = Quaternion::ZERO;
    for (&p, &q) in u.iter().zip(v) {
        acc += p.conj_mul(q);
    }
    acc
}

/// Quaternionic inner product `⟨u, v⟩ = u* v = Σ conj(u_k) v_k`.
pub fn inner(u: &QVector, v: &QVector) -> Result<Quaternion> {
    check_len(u.len(), v.len())?;
    Ok(inner_slice(&u.0, &v.0))
}

/// Dense row-major quaternion matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[QVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len(cols, r.len())?;
            data.extend_from_slice(&r.0);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Quaternion] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> QVector {
        QVector(self.row(r).to_vec())
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &QVector) -> Result<QVector> {
        check_len(self.cols, v.len())?;
        Ok(QVector(
            (0..self.rows)
                .map(|r| {
                    let mut acc = Quaternion::ZERO;
                    for (&a, &x) in self.row(r).iter().zip(&v.0) {
                        acc += a * x;
                    }
                    acc
                })
                .collect(),
        ))
    }

    pub fn mat_mul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        check_len(self.cols, rhs.rows)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// `self + s * other` for real `s`.
    pub fn scale_add(&self, s: f64, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected: (self.rows, self.cols),
                found: (other.rows, other.cols),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&p, &q)| p + q.scale(s)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&p, &q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Outer product `u v*`, entry `(r, c) = u_r · conj(v_c)`.
pub fn outer(u: &QVector, v: &QVector) -> QMatrix {
    let mut m = QMatrix::zeros(u.len(), v.len());
    for (r, &p) in u.0.iter().enumerate() {
        for (c, &q) in v.0.iter().enumerate() {
            m[(r, c)] = p * q.conj();
        }
    }
    m
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        &mut self.data[r * self.cols + c]
    }
}
