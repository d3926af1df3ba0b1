//! Landweber iteration for linear inverse problems, accelerated with periodic
//! Chebyshev inertial factors.
//!
//! The library is layered bottom-up:
//!
//! - [`vector`] and [`operator`]: complex vectors and forward maps `T` with
//!   adjoints (dense matrices and FFT cyclic convolutions).
//! - [`spectral`]: eigenvalue bounds of `ω·T*T` (power iteration, dense
//!   eigensolver, Marchenko–Pastur edges) and iteration spectral radii.
//! - [`schedule`]: constant and Chebyshev inertial-factor schedules and the
//!   end-of-period contraction bound `U(T)`.
//! - [`solver`]: plain, inertial and projected Landweber runs with
//!   residual/error histories.
//! - [`deconv`] and [`mimo`]: the deconvolution, least-squares and
//!   symbol-error-rate experiment harnesses, with their CSV writers.
//! - [`config`]: flat `key = value` experiment configuration and manifests.

pub mod config;
pub mod deconv;
pub mod error;
pub mod mimo;
pub mod operator;
pub mod schedule;
pub mod solver;
pub mod spectral;
pub mod vector;

mod csvfmt;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use operator::{CyclicConvolution, LinearOperator};
pub use schedule::{convergence_bound, ConvergenceBound, FactorOrder, InertialSchedule, ScheduleKind};
pub use solver::{run, HistoryRecord, ProjectionOrder, Projector, SolverConfig, SolverRun};
pub use spectral::{BoundsSource, SpectralBounds};
pub use vector::CVector;
