use std::fmt;
use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{SolverGrid, TimeAxis};
use super::problem::{DalembertSign, ValidationLattice, ValidationWitness, WaveProblem};
use crate::error::{Error, Result};
use crate::fourier::{FourierExpansion, Summation};
use crate::quadrature::GaussLegendre;
use crate::sm::{Partition, StochasticMeasurePath};

/// Which integrator drives the stochastic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "j", rename_all = "snake_case")]
pub enum ForcingMode {
    SmPath,
    FourierPartial(usize),
    Fejer(usize),
}

impl ForcingMode {
    /// Truncation order for the series modes.
    pub fn order(self) -> Option<usize> {
        match self {
            ForcingMode::SmPath => None,
            ForcingMode::FourierPartial(j) | ForcingMode::Fejer(j) => Some(j),
        }
    }

    pub fn summation(self) -> Option<Summation> {
        match self {
            ForcingMode::SmPath => None,
            ForcingMode::FourierPartial(_) => Some(Summation::Partial),
            ForcingMode::Fejer(_) => Some(Summation::Fejer),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ForcingMode::SmPath => "sm_path",
            ForcingMode::FourierPartial(_) => "fourier_partial",
            ForcingMode::Fejer(_) => "fejer",
        }
    }
}

impl fmt::Display for ForcingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order() {
            None => f.write_str(self.name()),
            Some(j) => write!(f, "{}({j})", self.name()),
        }
    }
}

/// A forcing mode bound to the data it needs.
#[derive(Debug, Clone, Copy)]
pub enum Forcing<'a> {
    Path(&'a StochasticMeasurePath),
    Series {
        expansion: &'a FourierExpansion,
        summation: Summation,
        j: usize,
    },
}

impl<'a> Forcing<'a> {
    pub fn new(
        mode: ForcingMode,
        path: Option<&'a StochasticMeasurePath>,
        expansion: Option<&'a FourierExpansion>,
    ) -> Result<Self> {
        match (mode.order(), mode.summation()) {
            (Some(j), Some(summation)) => {
                let expansion = expansion.ok_or_else(|| {
                    Error::Configuration(format!("mode {mode} needs a Fourier expansion"))
                })?;
                if j > expansion.max_order() {
                    return Err(Error::Configuration(format!(
                        "mode {mode} exceeds the expansion's maximal order {}",
                        expansion.max_order()
                    )));
                }
                Ok(Forcing::Series {
                    expansion,
                    summation,
                    j,
                })
            }
            _ => path
                .map(Forcing::Path)
                .ok_or_else(|| Error::Configuration("sm_path mode needs a measure path".into())),
        }
    }

    pub fn mode(&self) -> ForcingMode {
        match self {
            Forcing::Path(_) => ForcingMode::SmPath,
            Forcing::Series {
                summation: Summation::Partial,
                j,
                ..
            } => ForcingMode::FourierPartial(*j),
            Forcing::Series {
                summation: Summation::Fejer,
                j,
                ..
            } => ForcingMode::Fejer(*j),
        }
    }

    pub fn partition(&self) -> Partition {
        match self {
            Forcing::Path(p) => p.partition(),
            Forcing::Series { expansion, .. } => expansion.source_partition(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iter: 100,
        }
    }
}

/// `D(t, x)`: the d'Alembert part built from `u0` and `v0`.
pub fn dalembert_term(
    problem: &WaveProblem,
    t: f64,
    x: f64,
    rule: &GaussLegendre,
    panel_width: f64,
) -> f64 {
    let a = problem.speed;
    let (right, left) = (problem.u0.eval(x + a * t), problem.u0.eval(x - a * t));
    let waves = match problem.sign {
        DalembertSign::Classical => 0.5 * (right + left),
        DalembertSign::Minus => 0.5 * (right - left),
    };
    waves
        + problem
            .v0
            .window_integral(x - a * t, x + a * t, rule, panel_width)
            / (2.0 * a)
}

/// Precomputed solver for one problem, grid and path partition.
#[derive(Debug, Clone)]
pub struct WaveSolver {
    problem: WaveProblem,
    grid: SolverGrid,
    compute: SolverGrid,
    margin: usize,
    axis: TimeAxis,
    rule: GaussLegendre,
    xs: Vec<f64>,
    dalembert: Vec<f64>,
    witness: ValidationWitness,
}

impl WaveSolver {
    pub fn new(problem: &WaveProblem, grid: &SolverGrid, partition: Partition) -> Result<Self> {
        let axis = grid.time_axis(partition)?;
        let a = problem.speed;
        let margin = if problem.drift.is_zero() {
            0
        } else {
            if grid.n_x < 2 {
                return Err(Error::Configuration(
                    "a nonzero drift needs at least two spatial nodes".into(),
                ));
            }
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::param("speed", format!("must be positive, got {a}")));
            }
            (a * axis.final_time() / grid.dx()).ceil() as usize + 1
        };
        let compute = grid.widened(margin);
        let reach = a.abs() * axis.final_time();
        let witness = problem.validate(&ValidationLattice::over(
            compute.x_min - reach,
            compute.x_max + reach,
        ))?;
        let rule = GaussLegendre::new(grid.quad_order);
        let xs = compute.xs();
        let mut dalembert = vec![0.0; (axis.n_t + 1) * xs.len()];
        dalembert
            .par_chunks_mut(xs.len())
            .enumerate()
            .for_each(|(i, row)| {
                let t = axis.time(i);
                for (v, &x) in row.iter_mut().zip(&xs) {
                    *v = dalembert_term(problem, t, x, &rule, grid.y_panel_width);
                }
            });
        Ok(Self {
            problem: problem.clone(),
            grid: grid.clone(),
            compute,
            margin,
            axis,
            rule,
            xs,
            dalembert,
            witness,
        })
    }

    pub fn problem(&self) -> &WaveProblem {
        &self.problem
    }

    pub fn grid(&self) -> &SolverGrid {
        &self.grid
    }

    /// Grid actually iterated on; wider than [`Self::grid`] when a drift is present.
    pub fn compute_grid(&self) -> &SolverGrid {
        &self.compute
    }

    pub fn time_axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn witness(&self) -> ValidationWitness {
        self.witness
    }

    pub(crate) fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    pub(crate) fn compute_xs(&self) -> &[f64] {
        &self.xs
    }

    /// Distance between the reported window and the edge of the region
    /// holding every reported node's domain of dependence.
    pub fn dependence_margin(&self) -> f64 {
        self.problem.speed * self.axis.final_time()
    }

    fn check_coverage(&self, t: f64, x: f64) -> Result<()> {
        let t_max = self.axis.final_time();
        if !(0.0..=t_max).contains(&t) || x < self.grid.x_min || x > self.grid.x_max {
            return Err(Error::Coverage(format!(
                "({t}, {x}) lies outside [0, {t_max}] x [{}, {}]",
                self.grid.x_min, self.grid.x_max
            )));
        }
        Ok(())
    }

    /// `D(t, x)` for a point of the solver's window.
    pub fn dalembert_at(&self, t: f64, x: f64) -> Result<f64> {
        self.check_coverage(t, x)?;
        Ok(dalembert_term(
            &self.problem,
            t,
            x,
            &self.rule,
            self.grid.y_panel_width,
        ))
    }

    /// `g(t, x, s) = int_{x - a(t-s)}^{x + a(t-s)} sigma(s, y) dy`.
    pub fn g(&self, t: f64, x: f64, s: f64) -> f64 {
        let r = self.problem.speed * (t - s);
        self.problem
            .sigma
            .window_integral(s, x - r, x + r, &self.rule, self.grid.y_panel_width)
    }

    fn check_forcing(&self, forcing: &Forcing<'_>) -> Result<()> {
        if forcing.partition() != self.axis.partition {
            return Err(Error::Configuration(format!(
                "forcing lives on {} cells but the solver was built for {}",
                forcing.partition().n_cells(),
                self.axis.partition.n_cells()
            )));
        }
        Ok(())
    }

    /// Quadrature nodes and weights in time, `quad_order` per path cell,
    /// for the first `cells` cells.
    pub(crate) fn time_nodes(&self, cells: usize) -> Vec<(f64, f64)> {
        let p = self.axis.partition;
        (0..cells)
            .flat_map(|l| self.rule.mapped(p.left(l), p.right(l)).collect::<Vec<_>>())
            .collect()
    }

    /// Stochastic term at one point; `t` must be a time node for the path mode.
    pub fn stochastic_term(&self, forcing: Forcing<'_>, t: f64, x: f64) -> Result<f64> {
        self.check_forcing(&forcing)?;
        self.check_coverage(t, x)?;
        let p = self.axis.partition;
        let a = self.problem.speed;
        match forcing {
            Forcing::Path(path) => {
                let cells = p.boundary_index(t)?;
                Ok(path.increments()[..cells]
                    .iter()
                    .enumerate()
                    .fold(0.0, |acc, (l, &dm)| acc + self.g(t, x, p.midpoint(l)) * dm)
                    / (2.0 * a))
            }
            Forcing::Series {
                expansion,
                summation,
                j,
            } => {
                let weights = summation.weights(j);
                let full = ((t * p.n_cells() as f64).floor() as usize).min(p.n_cells());
                let mut acc = 0.0;
                for (s, w) in self.time_nodes(full) {
                    acc += w * expansion.real_series(&weights, s) * self.g(t, x, s);
                }
                if full < p.n_cells() && p.left(full) < t {
                    for (s, w) in self.rule.mapped(p.left(full), t) {
                        acc += w * expansion.real_series(&weights, s) * self.g(t, x, s);
                    }
                }
                Ok(acc / (2.0 * a))
            }
        }
    }

    /// Stochastic term at every node of the compute grid, row-major in time.
    pub fn stochastic_field(&self, forcing: Forcing<'_>) -> Result<Vec<f64>> {
        self.check_forcing(&forcing)?;
        let nx = self.xs.len();
        let a = self.problem.speed;
        let p = self.axis.partition;
        let mut out = vec![0.0; (self.axis.n_t + 1) * nx];
        if self.problem.sigma.is_zero() {
            return Ok(out);
        }
        match forcing {
            Forcing::Path(path) => {
                out.par_chunks_mut(nx).enumerate().for_each(|(i, row)| {
                    let t = self.axis.time(i);
                    let cells = self.axis.cells_before(i);
                    for (v, &x) in row.iter_mut().zip(&self.xs) {
                        *v = path.increments()[..cells]
                            .iter()
                            .enumerate()
                            .fold(0.0, |acc, (l, &dm)| acc + self.g(t, x, p.midpoint(l)) * dm)
                            / (2.0 * a);
                    }
                });
            }
            Forcing::Series {
                expansion,
                summation,
                j,
            } => {
                let weights = summation.weights(j);
                let nodes = self.time_nodes(self.axis.cells_before(self.axis.n_t));
                let series: Vec<f64> = nodes
                    .par_iter()
                    .map(|&(s, _)| expansion.real_series(&weights, s))
                    .collect();
                let q = self.rule.order();
                out.par_chunks_mut(nx).enumerate().for_each(|(i, row)| {
                    let t = self.axis.time(i);
                    let n = self.axis.cells_before(i) * q;
                    for (v, &x) in row.iter_mut().zip(&self.xs) {
                        let mut acc = 0.0;
                        for (&(s, w), &sv) in nodes[..n].iter().zip(&series[..n]) {
                            acc += w * sv * self.g(t, x, s);
                        }
                        *v = acc / (2.0 * a);
                    }
                });
            }
        }
        Ok(out)
    }

    /// Full solve: stochastic term, then Picard iteration.
    pub fn solve(&self, forcing: Forcing<'_>, options: &SolverOptions) -> Result<SolutionField> {
        let term = self.stochastic_field(forcing)?;
        let seed = match forcing {
            Forcing::Path(p) => p.seed(),
            Forcing::Series { expansion, .. } => expansion.source_seed(),
        };
        self.solve_with_term(&term, forcing.mode(), Some(seed), options)
    }

    /// Picard iteration `u <- D + F[u] + term` started from `D`.
    pub fn solve_with_term(
        &self,
        term: &[f64],
        mode: ForcingMode,
        seed: Option<u64>,
        options: &SolverOptions,
    ) -> Result<SolutionField> {
        let nx = self.xs.len();
        let rows = self.axis.n_t + 1;
        if term.len() != rows * nx {
            return Err(Error::Shape(format!(
                "stochastic term has {} entries, the compute grid {}",
                term.len(),
                rows * nx
            )));
        }
        if !(options.tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        if options.max_iter == 0 {
            return Err(Error::param("max_iter", "must be positive"));
        }
        let base: Vec<f64> = self
            .dalembert
            .iter()
            .zip(term)
            .map(|(d, s)| d + s)
            .collect();
        let (values, iterations, residual, history) = if self.problem.drift.is_zero() {
            (base, 1, 0.0, vec![0.0])
        } else {
            let mut current = self.dalembert.clone();
            let mut history = Vec::new();
            let mut iteration = 0;
            loop {
                iteration += 1;
                let drift = self.drift_term(&current);
                let next: Vec<f64> = base.iter().zip(&drift).map(|(b, f)| b + f).collect();
                let residual = next.iter().zip(&current).fold(0.0f64, |m, (a, b)| {
                    if (a - b).is_nan() {
                        f64::NAN
                    } else {
                        m.max((a - b).abs())
                    }
                });
                history.push(residual);
                current = next;
                if residual <= options.tolerance {
                    break (current, iteration, residual, history);
                }
                if iteration >= options.max_iter || residual.is_nan() {
                    return Err(Error::NonConvergence {
                        iterations: iteration,
                        residual,
                    });
                }
            }
        };
        let mut field = Array2::zeros((rows, self.grid.n_x));
        for i in 0..rows {
            for m in 0..self.grid.n_x {
                field[[i, m]] = values[i * nx + m + self.margin];
            }
        }
        Ok(SolutionField {
            grid: self.grid.clone(),
            times: (0..rows).map(|i| self.axis.time(i)).collect(),
            xs: self.grid.xs(),
            values: field,
            iterations_used: iterations,
            residual,
            residual_history: history,
            mode,
            seed,
            tolerance: options.tolerance,
            dependence_margin: self.dependence_margin(),
        })
    }

    /// `(1/2a) int_0^t int_{x-a(t-s)}^{x+a(t-s)} f(s, y, u(s, y)) dy ds` at
    /// every compute node, with `u` bilinear between nodes.
    fn drift_term(&self, u: &[f64]) -> Vec<f64> {
        let nx = self.xs.len();
        let n_t = self.axis.n_t;
        let dt = self.axis.time(1) - self.axis.time(0);
        let dx = self.compute.dx();
        let x0 = self.xs[0];
        let a = self.problem.speed;
        let drift = &self.problem.drift;
        let rule = &self.rule;
        let q = rule.order();

        // One row per (time step, time node): interpolated u and cumulative
        // y-integrals of f at the compute nodes.
        struct Row {
            s: f64,
            w: f64,
            u: Vec<f64>,
            cum: Vec<f64>,
        }
        let rows: Vec<Row> = (0..n_t * q)
            .into_par_iter()
            .map(|idx| {
                let (i, k) = (idx / q, idx % q);
                let theta = 0.5 * (1.0 + rule.nodes()[k]);
                let s = self.axis.time(i) + theta * dt;
                let w = 0.5 * dt * rule.weights()[k];
                let row_u: Vec<f64> = (0..nx)
                    .map(|m| (1.0 - theta) * u[i * nx + m] + theta * u[(i + 1) * nx + m])
                    .collect();
                let mut cum = vec![0.0; nx];
                for m in 0..nx - 1 {
                    let (ua, ub) = (row_u[m], row_u[m + 1]);
                    let xa = self.xs[m];
                    let piece = rule.integrate(xa, self.xs[m + 1], |y| {
                        drift.eval(s, y, ua + (ub - ua) * (y - xa) / dx)
                    });
                    cum[m + 1] = cum[m] + piece;
                }
                Row {
                    s,
                    w,
                    u: row_u,
                    cum,
                }
            })
            .collect();

        let x_last = self.xs[nx - 1];
        let primitive = |row: &Row, y: f64| -> f64 {
            let y = y.clamp(x0, x_last);
            let p = (((y - x0) / dx).floor() as usize).min(nx - 2);
            let xa = self.xs[p];
            let (ua, ub) = (row.u[p], row.u[p + 1]);
            row.cum[p]
                + rule.integrate(xa, y, |z| {
                    drift.eval(row.s, z, ua + (ub - ua) * (z - xa) / dx)
                })
        };

        let mut out = vec![0.0; (n_t + 1) * nx];
        out.par_chunks_mut(nx)
            .enumerate()
            .skip(1)
            .for_each(|(i, out_row)| {
                let t = self.axis.time(i);
                for (v, &x) in out_row.iter_mut().zip(&self.xs) {
                    let mut acc = 0.0;
                    for row in &rows[..i * q] {
                        let r = a * (t - row.s);
                        acc += row.w * (primitive(row, x + r) - primitive(row, x - r));
                    }
                    *v = acc / (2.0 * a);
                }
            });
        out
    }
}

/// `u(t_i, x_m)` on a solver grid, with Picard diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    grid: SolverGrid,
    times: Vec<f64>,
    xs: Vec<f64>,
    values: Array2<f64>,
    iterations_used: usize,
    residual: f64,
    residual_history: Vec<f64>,
    mode: ForcingMode,
    seed: Option<u64>,
    tolerance: f64,
    dependence_margin: f64,
}

impl SolutionField {
    pub fn grid(&self) -> &SolverGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// `(n_t + 1) x n_x`, row `i` at time `t_i`.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn residual_history(&self) -> &[f64] {
        &self.residual_history
    }

    pub fn mode(&self) -> ForcingMode {
        self.mode
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Same metadata with replaced values of identical shape.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        if values.dim() != self.values.dim() {
            return Err(Error::Shape(format!(
                "values of shape {:?} do not fit a {:?} grid",
                values.dim(),
                self.values.dim()
            )));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.grid;
        let j = self.mode.order().map_or("-".to_string(), |j| j.to_string());
        let seed = self.seed.map_or("-".to_string(), |s| s.to_string());
        writeln!(w, "# mode={} j={j} seed={seed}", self.mode.name())?;
        writeln!(
            w,
            "# delta={} n_t={} x_min={} x_max={} n_x={} quad_order={} y_panel_width={}",
            g.delta, g.n_t, g.x_min, g.x_max, g.n_x, g.quad_order, g.y_panel_width
        )?;
        writeln!(
            w,
            "# tolerance={:e} iterations={} residual={:e} dependence_margin={}",
            self.tolerance, self.iterations_used, self.residual, self.dependence_margin
        )?;
        writeln!(w, "t,x,u")?;
        for (i, &t) in self.times.iter().enumerate() {
            for (m, &x) in self.xs.iter().enumerate() {
                writeln!(w, "{t},{x},{:e}", self.values[[i, m]])?;
            }
        }
        Ok(())
    }
}

/// Largest nodewise difference of two fields on the same grid.
pub fn sup_error(a: &SolutionField, b: &SolutionField) -> Result<f64> {
    if a.grid != b.grid || a.values.dim() != b.values.dim() || a.times != b.times {
        return Err(Error::Shape("fields live on different grids".into()));
    }
    Ok(a.values
        .iter()
        .zip(b.values.iter())
        .fold(0.0f64, |m, (x, y)| {
            let d = (x - y).abs();
            if d.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(d)
            }
        }))
}

/// Builds a solver for `path`'s partition and solves once.
pub fn solve(
    problem: &WaveProblem,
    grid: &SolverGrid,
    path: &StochasticMeasurePath,
    expansion: Option<&FourierExpansion>,
    mode: ForcingMode,
    options: &SolverOptions,
) -> Result<SolutionField> {
    let forcing = Forcing::new(mode, Some(path), expansion)?;
    let solver = WaveSolver::new(problem, grid, path.partition())?;
    let field = solver.solve(forcing, options)?;
    Ok(SolutionField {
        seed: Some(path.seed()),
        ..field
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::expand;
    use crate::sm::{generate_lebesgue, generate_wiener};
    use crate::wave::{Diffusion, Drift, Profile, StochasticOperator};

    fn unit_sigma() -> WaveProblem {
        let mut p = WaveProblem::new(1.0);
        p.sigma = Diffusion::Constant { value: 1.0 };
        p.lipschitz_sigma = 0.0;
        p
    }

    #[test]
    fn lebesgue_forcing_gives_half_t_squared() {
        let part = Partition::new(64).unwrap();
        let grid = SolverGrid::new(1.0 / 64.0, 63, -1.0, 1.0, 9);
        let path = generate_lebesgue(part);
        let exp = expand(&path, 4);
        for mode in [
            ForcingMode::SmPath,
            ForcingMode::FourierPartial(4),
            ForcingMode::Fejer(2),
        ] {
            let field = solve(
                &unit_sigma(),
                &grid,
                &path,
                Some(&exp),
                mode,
                &SolverOptions::default(),
            )
            .unwrap();
            for (i, &t) in field.times().iter().enumerate() {
                for m in 0..grid.n_x {
                    assert!(
                        (field.values()[[i, m]] - 0.5 * t * t).abs() < 1e-12,
                        "{mode}"
                    );
                }
            }
        }
    }

    #[test]
    fn dalembert_closed_forms() {
        let rule = GaussLegendre::new(4);
        let mut p = WaveProblem::new(1.0);
        p.u0 = Profile::sine();
        for &(t, x) in &[(0.0, 0.3), (0.4, -1.0), (0.9, 2.0)] {
            assert!((dalembert_term(&p, t, x, &rule, 0.25) - x.sin() * t.cos()).abs() < 1e-14);
        }
        assert_eq!(dalembert_term(&p, 0.0, 0.7, &rule, 0.25), 0.7f64.sin());
        let mut p = WaveProblem::new(1.0);
        p.v0 = Profile::Constant { value: 1.0 };
        assert!((dalembert_term(&p, 0.375, 0.1, &rule, 0.25) - 0.375).abs() < 1e-15);
        let mut p = WaveProblem::new(1.0);
        p.u0 = Profile::sine();
        p.sign = DalembertSign::Minus;
        assert!(dalembert_term(&p, 0.0, 0.7, &rule, 0.25).abs() < 1e-15);
    }

    #[test]
    fn configuration_errors() {
        let part = Partition::new(16).unwrap();
        let path = generate_lebesgue(part);
        let exp = expand(&path, 2);
        let grid = SolverGrid::new(0.25, 4, 0.0, 1.0, 3);
        let err = solve(
            &unit_sigma(),
            &grid,
            &path,
            Some(&exp),
            ForcingMode::FourierPartial(3),
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
        let err = solve(
            &unit_sigma(),
            &grid,
            &path,
            None,
            ForcingMode::Fejer(1),
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
        let solver = WaveSolver::new(&unit_sigma(), &grid, part).unwrap();
        assert!(matches!(
            solver.dalembert_at(0.5, 1.5),
            Err(Error::Coverage(_))
        ));
        assert!(matches!(
            solver.dalembert_at(0.9, 0.5),
            Err(Error::Coverage(_))
        ));
        let other = generate_lebesgue(Partition::new(32).unwrap());
        assert!(solver.stochastic_field(Forcing::Path(&other)).is_err());
    }

    #[test]
    fn operator_matches_direct_evaluation() {
        let part = Partition::new(128).unwrap();
        let grid = SolverGrid::new(1.0 / 8.0, 7, -0.5, 0.5, 5);
        let mut p = unit_sigma();
        p.sigma = Diffusion::half_one_plus_sine();
        p.lipschitz_sigma = 0.5;
        let solver = WaveSolver::new(&p, &grid, part).unwrap();
        let op = StochasticOperator::new(&solver, 8);
        let path = generate_wiener(part, 11);
        let exp = expand(&path, 8);
        let direct = solver.stochastic_field(Forcing::Path(&path)).unwrap();
        assert_eq!(op.field(Forcing::Path(&path)).unwrap(), direct);
        for mode in [
            ForcingMode::FourierPartial(8),
            ForcingMode::Fejer(5),
            ForcingMode::FourierPartial(0),
        ] {
            let f = Forcing::new(mode, None, Some(&exp)).unwrap();
            let a = solver.stochastic_field(f).unwrap();
            let b = op.field(f).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(
                    (x - y).abs() <= 1e-12 * (1.0 + x.abs()),
                    "{mode}: {x} vs {y}"
                );
            }
        }
        let t = solver.time_axis().time(5);
        let single = solver
            .stochastic_term(Forcing::Path(&path), t, grid.x(2))
            .unwrap();
        assert_eq!(single, direct[5 * grid.n_x + 2]);
    }

    #[test]
    fn picard_with_linear_damping() {
        let part = Partition::new(64).unwrap();
        let grid = SolverGrid::new(1.0 / 4.0, 12, -0.5, 0.5, 9);
        let mut p = WaveProblem::new(1.0);
        p.v0 = Profile::Constant { value: 1.0 };
        p.drift = Drift::Linear {
            constant: 0.0,
            y_coefficient: 0.0,
            v_coefficient: -1.0,
        };
        let path = generate_lebesgue(part);
        let field = solve(
            &p,
            &grid,
            &path,
            None,
            ForcingMode::SmPath,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(field.iterations_used() > 1);
        assert!(field.residual() <= 1e-10);
        let h = field.residual_history();
        for w in h[1..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // Spatially constant data: u'' = -u, u(0) = 0, u'(0) = 1.
        for (i, &t) in field.times().iter().enumerate() {
            assert!((field.values()[[i, 4]] - t.sin()).abs() < 2e-3, "t={t}");
        }
        let tight = SolverOptions {
            tolerance: 1e-14,
            max_iter: 2,
        };
        assert!(matches!(
            solve(&p, &grid, &path, None, ForcingMode::SmPath, &tight),
            Err(Error::NonConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn sup_error_contract() {
        let part = Partition::new(16).unwrap();
        let path = generate_lebesgue(part);
        let grid = SolverGrid::new(0.25, 4, 0.0, 1.0, 3);
        let f = solve(
            &unit_sigma(),
            &grid,
            &path,
            None,
            ForcingMode::SmPath,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(sup_error(&f, &f).unwrap(), 0.0);
        let shifted = f.with_values(f.values() + 0.25).unwrap();
        assert!((sup_error(&f, &shifted).unwrap() - 0.25).abs() < 1e-15);
        let g = solve(
            &unit_sigma(),
            &SolverGrid::new(0.25, 2, 0.0, 1.0, 3),
            &path,
            None,
            ForcingMode::SmPath,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(matches!(sup_error(&f, &g), Err(Error::Shape(_))));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# mode=sm_path j=- seed=0"));
        assert_eq!(
            text.lines().filter(|l| !l.starts_with('#')).count(),
            1 + 5 * 3
        );
    }
}
