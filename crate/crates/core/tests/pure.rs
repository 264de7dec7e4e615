mod common;

use common::*;
use quatflow::pure::{qpfe_factor, qpfe_factor_with_residual, run_pure_from, SplitMatrix};
use quatflow::solvers::{dist_pure, run};
use quatflow::{make_instance, qpfe, run_pure, Algorithm, PureConfig, QVector, Quaternion, RngStream, SignalKind, SolverConfig};

#[test]
fn factor_attains_smallest_gram_eigenvalue() {
    let mut rng = RngStream::new(71, 0);
    for d in [1, 3, 8, 64] {
        for _ in 0..10 {
            let z = random_vector(d, &mut rng);
            let zr = vec4(&z);
            let (q, lam) = qpfe_factor_with_residual(&z).unwrap();
            let oracle = sym4_min_eigenvalue(&split_gram(&zr)).max(0.0);
            let scale = z.norm_sqr();
            assert!((real_residual(&zr, q4(q)) - oracle).abs() <= 1e-10 * scale);
            assert!((lam - oracle).abs() <= 1e-10 * scale);
            assert!((q.abs() - 1.0).abs() < 1e-14);
            assert!(real_residual(&zr, q4(q)) <= best_random_residual(&zr, 2000, &mut rng) + 1e-12 * scale);
        }
    }
}

#[test]
fn output_is_exactly_pure_and_phase_independent() {
    let mut rng = RngStream::new(72, 0);
    for _ in 0..50 {
        let omega = random_pure_vector(16, &mut rng);
        let w = random_unit(&mut rng);
        let p = qpfe(&omega.mul_right(w));
        assert!(p.iter().all(|q| q.a == 0.0));
        assert!(dist_pure(&omega, &p).unwrap() < 1e-12 * omega.norm());
    }
}

#[test]
fn split_gram_matches_oracle() {
    let mut rng = RngStream::new(73, 0);
    let z = random_vector(7, &mut rng);
    let w = SplitMatrix::from_vector(&z).gram();
    let o = split_gram(&vec4(&z));
    for p in 0..4 {
        for q in 0..4 {
            assert!((w[p][q] - o[p][q]).abs() < 1e-13);
        }
    }
    assert_eq!(SplitMatrix::from_vector(&z).to_vector(), z);
}

#[test]
fn zero_vector_has_no_factor() {
    assert!(qpfe_factor(&QVector::zeros(4)).is_none());
    assert_eq!(qpfe(&QVector::zeros(4)), QVector::zeros(4));
    // A single real entry rotates onto a pure axis.
    let p = qpfe(&QVector(vec![Quaternion::real(2.0)]));
    assert!(p[0].a == 0.0 && (p[0].abs() - 2.0).abs() < 1e-15);
}

#[test]
fn projected_run_recovers_pure_signal() {
    let mut rng = RngStream::new(74, 0);
    let ens = make_instance(32, 9.0, &mut rng, SignalKind::Pure).unwrap();
    let x = ens.x_true.clone().unwrap();
    assert!(x.iter().all(|q| q.a == 0.0));
    let cfg = SolverConfig::new(Algorithm::Qraf);
    let rec = run_pure(&ens, &cfg, &PureConfig::default(), rng.fork(1)).unwrap();
    assert!(rec.converged, "{}", rec.final_rel_error);
    assert!(dist_pure(&x, &rec.z).unwrap() / x.norm() < 1e-5);
}

#[test]
fn projection_period_spanning_whole_run_only_projects_at_end() {
    let mut rng = RngStream::new(75, 0);
    let ens = make_instance(8, 9.0, &mut rng, SignalKind::Pure).unwrap().without_truth();
    let cfg = SolverConfig { max_iters: 25, ..SolverConfig::new(Algorithm::Qraf) };
    let z0 = random_vector(8, &mut rng);
    let projected = run_pure_from(&ens, z0.clone(), &cfg, &PureConfig { t_p: 25 }, RngStream::new(0, 0)).unwrap();
    let plain = run(&ens, z0, &cfg, RngStream::new(0, 0)).unwrap();
    assert!(projected.z.iter().all(|q| q.a == 0.0));
    assert_eq!(projected.z, qpfe(&plain.z));
    assert!(run_pure_from(&ens, plain.z.clone(), &cfg, &PureConfig { t_p: 26 }, RngStream::new(0, 0)).is_err());
}
