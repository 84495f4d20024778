//! Stochastic measures on `(0, 1]`, their Fourier and Fejér expansions, and
//! the mild one-dimensional stochastic wave equation driven by them.
//!
//! The crate is organised bottom-up:
//!
//! * [`sm`]: grid realisations of stochastic measures (Wiener, fBm,
//!   sub-fBm, series and kernel-smoothed measures).
//! * [`fourier`]: Fourier coefficients, partial sums `S_j` and Fejér sums.
//! * [`integral`]: partition-sum integrals, the dyadic version scheme and
//!   its majorant, uniform-convergence and L2-continuity harnesses.
//! * [`wave`]: the mild solution by Picard iteration, with the measure, its
//!   Fourier partial sums or its Fejér sums as the driving term.
//! * [`experiments`]: seeded Monte Carlo convergence studies and rate fits.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fourier;
pub mod fsum;
pub mod integral;
pub mod quadrature;
pub mod rng;
pub mod sm;
pub mod wave;

pub use error::{Error, Result};
pub use experiments::{
    fit_rate, run_convergence_study, run_rate_example, ConvergenceReport, ModeFamily, RateExample,
    RateExampleConfig, RateFit, StudyVerdict,
};
pub use fourier::{deterministic_fourier_sum, expand, FourierExpansion, FunctionFourier};
pub use rng::derive_seed;
pub use sm::{GeneratorSpec, GeneratorTag, Partition, StochasticMeasurePath};
pub use wave::{
    solve, sup_error, ForcingMode, SolutionField, SolverGrid, SolverOptions, WaveProblem,
    WaveSolver,
};
