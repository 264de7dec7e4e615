//! Phase retrieval for quaternion-valued signals.
//!
//! The crate is organised bottom up: quaternion arithmetic ([`quat`]),
//! Hermitian eigen-solvers ([`linalg`]), Gaussian measurement ensembles
//! ([`ensemble`]), spectral initializers ([`init`]), the gradient solvers
//! ([`solvers`]), pure-quaternion projection ([`pure`]), colour-image
//! recovery ([`imaging`]) and the experiment harness ([`bench`]).

pub mod bench;
pub mod ensemble;
pub mod error;
pub mod imaging;
pub mod init;
pub mod linalg;
pub mod pure;
pub mod quat;
pub mod solvers;

pub use ensemble::{make_instance, MeasurementEnsemble, RngStream, SignalKind};
pub use error::{Error, Result};
pub use pure::{qpfe, run_pure, PureConfig};
pub use quat::{inner, QMatrix, QVector, Quaternion};
pub use solvers::{dist, dist_pure, run, solve, Algorithm, RunRecord, SolverConfig};
