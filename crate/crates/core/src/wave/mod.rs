//! Mild solution of the stochastic wave equation
//! `u_tt = a^2 u_xx + f(t, x, u) + sigma(t, x) dmu/dt` on `[0, 1 - delta]`,
//! computed by Picard iteration on a space-time grid.
//!
//! The stochastic term is computed once per forcing: as a midpoint sum
//! against the measure path, or by Gauss–Legendre quadrature in time of
//! `S_j(s) g(t, x, s)` with `S_j` a Fourier or Fejér sum.

mod functions;
mod grid;
mod operator;
mod problem;
mod solver;

pub use functions::{Custom, Diffusion, Drift, Profile};
pub use grid::{SolverGrid, TimeAxis};
pub use operator::StochasticOperator;
pub use problem::{DalembertSign, ValidationLattice, ValidationWitness, WaveProblem};
pub use solver::{
    dalembert_term, solve, sup_error, Forcing, ForcingMode, SolutionField, SolverOptions,
    WaveSolver,
};
