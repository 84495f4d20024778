use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::solver::{Forcing, WaveSolver};
use crate::error::{Error, Result};
use crate::sm::Partition;

/// The stochastic term as a linear functional of the forcing, tabulated per
/// compute node: cell weights `g(t, x, s_l)` for the path mode and moments
/// `G_k = sum_q w_q g(t, x, s_q) e^{2 pi i k s_q}` for the series modes.
///
/// Evaluating a new path or expansion then costs one dot product per node,
/// which is what repeated Monte Carlo replicas need.
#[derive(Debug, Clone)]
pub struct StochasticOperator {
    partition: Partition,
    rows: usize,
    nx: usize,
    stride: usize,
    max_order: usize,
    speed: f64,
    inv_two_a: f64,
    /// Per node: weights for the first `i * stride` cells, concatenated.
    path_weights: Vec<f64>,
    path_offsets: Vec<usize>,
    /// Per node: `max_order + 1` moments.
    moments: Vec<Complex64>,
}

impl StochasticOperator {
    pub fn new(solver: &WaveSolver, max_order: usize) -> Self {
        let axis = solver.time_axis();
        let p = axis.partition;
        let xs = solver.compute_xs();
        let nx = xs.len();
        let rows = axis.n_t + 1;
        let total_cells = axis.cells_before(axis.n_t);
        let nodes = solver.time_nodes(total_cells);
        let q = solver.rule().order();
        let phases: Vec<Complex64> = nodes
            .par_iter()
            .flat_map_iter(|&(s, _)| {
                (0..=max_order).map(move |k| {
                    Complex64::from_polar(1.0, 2.0 * PI * (k as f64 * s).rem_euclid(1.0))
                })
            })
            .collect();

        let mut path_offsets = Vec::with_capacity(rows * nx + 1);
        path_offsets.push(0);
        for i in 0..rows {
            for _ in 0..nx {
                let last = *path_offsets.last().unwrap();
                path_offsets.push(last + axis.cells_before(i));
            }
        }
        let per_node: Vec<(Vec<f64>, Vec<Complex64>)> = (0..rows * nx)
            .into_par_iter()
            .map(|node| {
                let (i, m) = (node / nx, node % nx);
                let (t, x) = (axis.time(i), xs[m]);
                let cells = axis.cells_before(i);
                let weights: Vec<f64> = (0..cells).map(|l| solver.g(t, x, p.midpoint(l))).collect();
                let mut mom = vec![Complex64::new(0.0, 0.0); max_order + 1];
                for (n, &(s, w)) in nodes[..cells * q].iter().enumerate() {
                    let wg = w * solver.g(t, x, s);
                    let row = &phases[n * (max_order + 1)..(n + 1) * (max_order + 1)];
                    for (acc, ph) in mom.iter_mut().zip(row) {
                        *acc += wg * ph;
                    }
                }
                (weights, mom)
            })
            .collect();
        let mut path_weights = Vec::with_capacity(*path_offsets.last().unwrap());
        let mut moments = Vec::with_capacity(rows * nx * (max_order + 1));
        for (w, m) in per_node {
            path_weights.extend(w);
            moments.extend(m);
        }
        Self {
            partition: p,
            rows,
            nx,
            stride: axis.stride,
            max_order,
            speed: solver.problem().speed,
            inv_two_a: 1.0 / (2.0 * solver.problem().speed),
            path_weights,
            path_offsets,
            moments,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Stochastic term on the compute grid, laid out like
    /// [`WaveSolver::stochastic_field`].
    pub fn field(&self, forcing: Forcing<'_>) -> Result<Vec<f64>> {
        if forcing.partition() != self.partition {
            return Err(Error::Configuration(format!(
                "forcing lives on {} cells, the operator on {}",
                forcing.partition().n_cells(),
                self.partition.n_cells()
            )));
        }
        let nodes = self.rows * self.nx;
        debug_assert_eq!(self.path_offsets.len(), nodes + 1);
        let two_a = 2.0 * self.speed;
        match forcing {
            Forcing::Path(path) => Ok((0..nodes)
                .into_par_iter()
                .map(|node| {
                    let w =
                        &self.path_weights[self.path_offsets[node]..self.path_offsets[node + 1]];
                    w.iter()
                        .zip(path.increments())
                        .fold(0.0, |acc, (g, dm)| acc + g * dm)
                        / two_a
                })
                .collect()),
            Forcing::Series {
                expansion,
                summation,
                j,
            } => {
                if j > self.max_order {
                    return Err(Error::Order {
                        order: j,
                        max_order: self.max_order,
                    });
                }
                let weights = summation.weights(j);
                let xi = expansion.nonnegative_coefficients();
                let k_len = self.max_order + 1;
                Ok((0..nodes)
                    .into_par_iter()
                    .map(|node| {
                        let g = &self.moments[node * k_len..node * k_len + j + 1];
                        let mut acc = weights[0] * xi[0].re * g[0].re;
                        for k in 1..=j {
                            acc += 2.0 * weights[k] * (xi[k] * g[k]).re;
                        }
                        acc * self.inv_two_a
                    })
                    .collect())
            }
        }
    }

    /// Path cells per time step of the underlying grid.
    pub fn stride(&self) -> usize {
        self.stride
    }
}
