//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's arithmetic: products are spelled out
//! component by component and eigenproblems go through nalgebra.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4};
use quatflow::{QVector, Quaternion, RngStream};

pub type Q4 = [f64; 4];

/// Hamilton product from the 16-term table.
pub fn hamilton(p: Q4, q: Q4) -> Q4 {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

pub fn conj4(q: Q4) -> Q4 {
    [q[0], -q[1], -q[2], -q[3]]
}

pub fn norm4(q: Q4) -> f64 {
    q.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn q4(q: Quaternion) -> Q4 {
    [q.a, q.b, q.c, q.d]
}

pub fn from4(v: Q4) -> Quaternion {
    Quaternion::new(v[0], v[1], v[2], v[3])
}

/// `Σ conj(u_k) v_k`.
pub fn inner4(u: &[Q4], v: &[Q4]) -> Q4 {
    let mut s = [0.0; 4];
    for (x, y) in u.iter().zip(v) {
        let p = hamilton(conj4(*x), *y);
        for i in 0..4 {
            s[i] += p[i];
        }
    }
    s
}

pub fn vec4(v: &QVector) -> Vec<Q4> {
    v.iter().map(|&q| q4(q)).collect()
}

pub fn vnorm(v: &[Q4]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// `v · w` entrywise on the right.
pub fn right_mul(v: &[Q4], w: Q4) -> Vec<Q4> {
    v.iter().map(|&x| hamilton(x, w)).collect()
}

pub fn diff_norm(u: &[Q4], v: &[Q4]) -> f64 {
    u.iter()
        .zip(v)
        .flat_map(|(x, y)| (0..4).map(move |i| x[i] - y[i]))
        .map(|t| t * t)
        .sum::<f64>()
        .sqrt()
}

pub fn random_q(rng: &mut RngStream) -> Quaternion {
    Quaternion::new(rng.normal(), rng.normal(), rng.normal(), rng.normal())
}

pub fn random_unit(rng: &mut RngStream) -> Quaternion {
    let q = random_q(rng);
    q.scale(1.0 / q.abs())
}

pub fn random_vector(d: usize, rng: &mut RngStream) -> QVector {
    QVector((0..d).map(|_| random_q(rng)).collect())
}

pub fn random_pure_vector(d: usize, rng: &mut RngStream) -> QVector {
    QVector((0..d).map(|_| Quaternion::pure(rng.normal(), rng.normal(), rng.normal())).collect())
}

/// Smallest eigenvalue of a symmetric 4×4 matrix.
pub fn sym4_min_eigenvalue(w: &[[f64; 4]; 4]) -> f64 {
    let m = Matrix4::from_fn(|r, c| w[r][c]);
    m.symmetric_eigenvalues().min()
}

/// Real 4d×4d symmetric embedding of a quaternion Hermitian matrix, built
/// from the left-multiplication matrices of its entries. Every standard
/// eigenvalue of the quaternion matrix appears four times in its spectrum.
pub fn real_embedding(m: &[Vec<Q4>]) -> DMatrix<f64> {
    let d = m.len();
    let mut out = DMatrix::zeros(4 * d, 4 * d);
    for r in 0..d {
        for c in 0..d {
            let [a, b, cc, dd] = m[r][c];
            let l = [[a, -b, -cc, -dd], [b, a, -dd, cc], [cc, dd, a, -b], [dd, -cc, b, a]];
            for i in 0..4 {
                for j in 0..4 {
                    out[(4 * r + i, 4 * c + j)] = l[i][j];
                }
            }
        }
    }
    out
}

/// Largest standard eigenvalue via the real embedding.
pub fn largest_eigenvalue(m: &[Vec<Q4>]) -> f64 {
    real_embedding(m).symmetric_eigenvalues().max()
}

/// `min_{|w|=1} ‖z − x w‖` by scanning a fine grid on the unit 3-sphere
/// (Hopf-type coordinates), refined locally around the best grid point.
pub fn dist_by_search(z: &[Q4], x: &[Q4], steps: usize) -> f64 {
    let unit = |t1: f64, t2: f64, t3: f64| -> Q4 {
        [t1.cos(), t1.sin() * t2.cos(), t1.sin() * t2.sin() * t3.cos(), t1.sin() * t2.sin() * t3.sin()]
    };
    let cost = |w: Q4| diff_norm(z, &right_mul(x, w));
    let pi = std::f64::consts::PI;
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=steps {
        let t1 = pi * i as f64 / steps as f64;
        for j in 0..=steps {
            let t2 = pi * j as f64 / steps as f64;
            for k in 0..2 * steps {
                let t3 = pi * k as f64 / steps as f64;
                let c = cost(unit(t1, t2, t3));
                if c < best.0 {
                    best = (c, t1, t2, t3);
                }
            }
        }
    }
    let mut h = pi / steps as f64;
    for _ in 0..40 {
        let mut improved = false;
        for (dt1, dt2, dt3) in [(h, 0.0, 0.0), (-h, 0.0, 0.0), (0.0, h, 0.0), (0.0, -h, 0.0), (0.0, 0.0, h), (0.0, 0.0, -h)] {
            let (t1, t2, t3) = (best.1 + dt1, best.2 + dt2, best.3 + dt3);
            let c = cost(unit(t1, t2, t3));
            if c < best.0 {
                best = (c, t1, t2, t3);
                improved = true;
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best.0
}

/// Objectives re-derived from their definitions, row by row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    Amplitude,
    Intensity,
    Perturbed,
}

/// Perturbation coefficient used with [`Loss::Perturbed`].
pub const SIGMA: f64 = 2.0;

pub fn loss_oracle(kind: Loss, a: &[Vec<Q4>], psi: &[f64], z: &[Q4]) -> f64 {
    let n = a.len() as f64;
    a.iter()
        .zip(psi)
        .map(|(row, &p)| {
            let m = norm4(inner4(row, z));
            match kind {
                Loss::Amplitude => (m - p).powi(2),
                Loss::Intensity => (m * m - p * p).powi(2),
                Loss::Perturbed => {
                    let e2 = SIGMA * p * p;
                    ((m * m + e2).sqrt() - (p * p + e2).sqrt()).powi(2)
                }
            }
        })
        .sum::<f64>()
        / n
}

/// Ratios `D_h f(z) / Re⟨g(z), h⟩` from central differences over random
/// well-conditioned triples at `d = 2`.
pub fn kappa_samples(kind: Loss, triples: usize, seed: u64) -> Vec<f64> {
    use quatflow::solvers::{grad_qpaf, grad_qrwf, grad_qwf};
    let mut rng = RngStream::new(seed, kind as u64);
    let mut out = Vec::with_capacity(triples);
    while out.len() < triples {
        let ens = quatflow::make_instance(2, 8.0, &mut rng, quatflow::SignalKind::Full).unwrap();
        let rows: Vec<Vec<Q4>> = (0..ens.n()).map(|k| ens.a.row(k).iter().map(|&q| q4(q)).collect()).collect();
        let z = random_vector(2, &mut rng);
        let h = random_vector(2, &mut rng);
        let h = h.scale(1.0 / h.norm());
        let zr = vec4(&z);
        let min_m = rows.iter().map(|r| norm4(inner4(r, &zr))).fold(f64::INFINITY, f64::min);
        if min_m < 1e-2 {
            continue;
        }
        let g = match kind {
            Loss::Amplitude => grad_qrwf(&ens, &z),
            Loss::Intensity => grad_qwf(&ens, &z),
            Loss::Perturbed => grad_qpaf(&ens, &z, SIGMA),
        }
        .unwrap();
        let gh = inner4(&vec4(&g), &vec4(&h))[0];
        if gh.abs() < 1e-2 * g.norm() {
            continue;
        }
        let t = 1e-5;
        let hr = vec4(&h);
        let shifted = |s: f64| -> Vec<Q4> {
            zr.iter().zip(&hr).map(|(a, b)| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]]).collect()
        };
        let fp = loss_oracle(kind, &rows, &ens.psi, &shifted(t));
        let fm = loss_oracle(kind, &rows, &ens.psi, &shifted(-t));
        out.push((fp - fm) / (2.0 * t) / gh);
    }
    out
}

/// `‖Re(z·q̄)‖²` with the product spelled out.
pub fn real_residual(z: &[Q4], q: Q4) -> f64 {
    let qb = conj4(q);
    z.iter().map(|&e| hamilton(e, qb)[0].powi(2)).sum()
}

/// Gram matrix of the `[a, b, c, d]` rows of `z`.
pub fn split_gram(z: &[Q4]) -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    for r in z {
        for p in 0..4 {
            for q in 0..4 {
                w[p][q] += r[p] * r[q];
            }
        }
    }
    w
}

/// Smallest residual over `count` random unit factors.
pub fn best_random_residual(z: &[Q4], count: usize, rng: &mut RngStream) -> f64 {
    (0..count).map(|_| real_residual(z, q4(random_unit(rng)))).fold(f64::INFINITY, f64::min)
}
