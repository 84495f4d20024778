//! Seeded Monte Carlo convergence studies of the approximated equations and
//! the deterministic rate table for kernel-smoothed measures.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{expand, FunctionFourier};
use crate::rng::derive_seed;
use crate::sm::{GeneratorSpec, Partition, SmoothedSmSpec};
use crate::wave::{
    sup_error, Forcing, ForcingMode, SolverGrid, SolverOptions, StochasticOperator, WaveProblem,
    WaveSolver,
};

/// Fewer replicas than this make the 90% quantile meaningless.
pub const MIN_REPLICAS: usize = 30;

/// A study aborts when more than this fraction of replicas fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFamily {
    Fourier,
    Fejer,
}

impl ModeFamily {
    pub fn mode(self, j: usize) -> ForcingMode {
        match self {
            ModeFamily::Fourier => ForcingMode::FourierPartial(j),
            ModeFamily::Fejer => ForcingMode::Fejer(j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: ModeFamily,
    pub j_list: Vec<usize>,
    pub replicas: usize,
    pub root_seed: u64,
    /// Cells of the measure path.
    pub n_cells: usize,
    #[serde(default)]
    pub solver: SolverOptions,
}

/// Outcome of one replica: its seed and either one error per `j` or the
/// reason it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRecord {
    pub replica: usize,
    pub seed: u64,
    pub outcome: std::result::Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log-log residuals.
    pub residual: f64,
    pub used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyVerdict {
    /// Median at the largest `j` over the median at the smallest.
    pub median_ratio: f64,
    pub p90_ratio: f64,
    /// Number of increases along the median sequence.
    pub inversions: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub family: ModeFamily,
    pub j_list: Vec<usize>,
    pub medians: Vec<f64>,
    pub p90s: Vec<f64>,
    pub replicas_ok: usize,
    pub replicas_failed: usize,
    pub generator: String,
    pub root_seed: u64,
    pub records: Vec<ReplicaRecord>,
    pub fit: Option<RateFit>,
}

/// Type-7 sample quantile (linear interpolation between order statistics).
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Ordinary least squares of `ln error` on `ln j`; nonpositive errors are
/// skipped and reported through [`RateFit::used`].
pub fn fit_rate(j_list: &[usize], errors: &[f64]) -> Result<RateFit> {
    if j_list.len() != errors.len() {
        return Err(Error::Shape(format!(
            "{} orders but {} errors",
            j_list.len(),
            errors.len()
        )));
    }
    let points: Vec<(f64, f64)> = j_list
        .iter()
        .zip(errors)
        .filter(|(&j, &e)| j > 0 && e > 0.0 && e.is_finite())
        .map(|(&j, &e)| ((j as f64).ln(), e.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::Fit(format!(
            "{} usable points out of {}; at least two positive errors are needed",
            points.len(),
            errors.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all usable points share one order".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
        used: points.len(),
    })
}

fn check_j_list(j_list: &[usize]) -> Result<()> {
    if j_list.is_empty() {
        return Err(Error::param("j_list", "must not be empty"));
    }
    if j_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("j_list", "must be strictly increasing"));
    }
    Ok(())
}

/// For every replica: sample a path, expand it to `max(j_list)`, solve with
/// the path itself and with each `S_j` (or Fejér sum), and record the sup
/// distance between the two fields on the same grid.
pub fn run_convergence_study(
    problem: &WaveProblem,
    grid: &SolverGrid,
    generator: &GeneratorSpec,
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    check_j_list(&config.j_list)?;
    if config.replicas < MIN_REPLICAS {
        return Err(Error::param(
            "replicas",
            format!(
                "at least {MIN_REPLICAS} are needed, got {}",
                config.replicas
            ),
        ));
    }
    let partition = Partition::new(config.n_cells)?;
    let prepared = generator.prepare(partition)?;
    let solver = WaveSolver::new(problem, grid, partition)?;
    let k_max = *config.j_list.last().unwrap();
    let operator = StochasticOperator::new(&solver, k_max);

    let replica = |seed: u64| -> Result<Vec<f64>> {
        let path = prepared.sample(seed);
        let expansion = expand(&path, k_max);
        let reference_term = operator.field(Forcing::Path(&path))?;
        let reference = solver.solve_with_term(
            &reference_term,
            ForcingMode::SmPath,
            Some(seed),
            &config.solver,
        )?;
        config
            .j_list
            .iter()
            .map(|&j| {
                let mode = config.family.mode(j);
                let term = operator.field(Forcing::new(mode, None, Some(&expansion))?)?;
                let field = solver.solve_with_term(&term, mode, Some(seed), &config.solver)?;
                sup_error(&field, &reference)
            })
            .collect()
    };
    let records: Vec<ReplicaRecord> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.root_seed, r as u64);
            ReplicaRecord {
                replica: r,
                seed,
                outcome: replica(seed).map_err(|e| e.to_string()),
            }
        })
        .collect();

    let failed: Vec<&ReplicaRecord> = records.iter().filter(|r| r.outcome.is_err()).collect();
    if failed.len() as f64 > MAX_FAILURE_FRACTION * config.replicas as f64 {
        return Err(Error::StudyFailed {
            failed: failed.len(),
            total: config.replicas,
            first: failed[0].outcome.clone().unwrap_err(),
        });
    }
    let mut report = ConvergenceReport {
        family: config.family,
        j_list: config.j_list.clone(),
        medians: Vec::new(),
        p90s: Vec::new(),
        replicas_ok: config.replicas - failed.len(),
        replicas_failed: failed.len(),
        generator: prepared_name(generator),
        root_seed: config.root_seed,
        records,
        fit: None,
    };
    let (medians, p90s) = report.recompute_quantiles();
    report.medians = medians;
    report.p90s = p90s;
    report.fit = fit_rate(&report.j_list, &report.medians).ok();
    Ok(report)
}

fn prepared_name(spec: &GeneratorSpec) -> String {
    match spec {
        GeneratorSpec::Zero => "zero".into(),
        GeneratorSpec::Lebesgue => "lebesgue".into(),
        GeneratorSpec::Wiener => "wiener".into(),
        GeneratorSpec::Fbm { hurst } => format!("fbm(H={hurst})"),
        GeneratorSpec::SubFbm { hurst } => format!("sub_fbm(H={hurst})"),
        GeneratorSpec::Series(_) => "series".into(),
        GeneratorSpec::Smoothed(_) => "smoothed".into(),
    }
}

impl ConvergenceReport {
    /// Errors of the successful replicas for the `idx`-th order.
    pub fn errors_at(&self, idx: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|e| e[idx]))
            .collect()
    }

    /// Medians and 90% quantiles from the retained raw errors.
    pub fn recompute_quantiles(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.j_list.len())
            .map(|idx| {
                let e = self.errors_at(idx);
                (quantile(&e, 0.5), quantile(&e, 0.9))
            })
            .unzip()
    }

    /// Both quantiles at the largest order below a quarter of their value at
    /// the smallest, and at most one increase along the medians.
    pub fn verdict(&self) -> StudyVerdict {
        let last = self.j_list.len() - 1;
        let median_ratio = self.medians[last] / self.medians[0];
        let p90_ratio = self.p90s[last] / self.p90s[0];
        let inversions = self.medians.windows(2).filter(|w| w[1] > w[0]).count();
        StudyVerdict {
            median_ratio,
            p90_ratio,
            inversions,
            pass: median_ratio < 0.25 && p90_ratio < 0.25 && inversions <= 1,
        }
    }

    pub fn write_report_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,median,p90,replicas_ok,replicas_failed")?;
        for (idx, j) in self.j_list.iter().enumerate() {
            writeln!(
                w,
                "{j},{:e},{:e},{},{}",
                self.medians[idx], self.p90s[idx], self.replicas_ok, self.replicas_failed
            )?;
        }
        Ok(())
    }

    /// One row per replica and order; failed replicas get an empty error
    /// field so they stay visible.
    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "replica,j,sup_error")?;
        for r in &self.records {
            for (idx, j) in self.j_list.iter().enumerate() {
                match &r.outcome {
                    Ok(e) => writeln!(w, "{},{j},{:e}", r.replica, e[idx])?,
                    Err(_) => writeln!(w, "{},{j},", r.replica)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateExampleConfig {
    pub j_list: Vec<usize>,
    /// Points of the `y` lattice over the kernel's `y` interval.
    pub y_lattice: usize,
    /// Points of the `t` lattice over `[0, 1]`, both ends included.
    pub t_lattice: usize,
    /// Midpoint cells used for the Fourier coefficients of `dh/dt`.
    pub quadrature_cells: usize,
}

impl Default for RateExampleConfig {
    fn default() -> Self {
        Self {
            j_list: (8..=512).collect(),
            y_lattice: 3,
            t_lattice: 2049,
            quadrature_cells: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicRow {
    pub j: usize,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateExample {
    pub deterministic: Vec<DeterministicRow>,
    pub fit: Option<RateFit>,
    pub stochastic: Option<ConvergenceReport>,
}

impl RateExample {
    pub fn write_deterministic_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,sup_error")?;
        for row in &self.deterministic {
            writeln!(w, "{},{:e}", row.j, row.sup_error)?;
        }
        Ok(())
    }
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Second differences of `h(., y)` must stay bounded as the step halves.
fn check_twice_differentiable(spec: &SmoothedSmSpec, ys: &[f64]) -> Result<()> {
    let second = |y: f64, d: f64| -> f64 {
        let mut worst: f64 = 0.0;
        let mut t = d;
        while t <= 1.0 - d + 1e-12 {
            let v = spec.kernel.value(t + d, y) - 2.0 * spec.kernel.value(t, y)
                + spec.kernel.value(t - d, y);
            worst = worst.max((v / (d * d)).abs());
            t += d;
        }
        worst
    };
    for &y in ys {
        let coarse = second(y, 1.0 / 64.0);
        let fine = second(y, 1.0 / 128.0);
        if !(coarse.is_finite() && fine.is_finite()) || fine > 1.5 * coarse + 1e-6 {
            return Err(Error::Contract(format!(
                "h(., {y}) does not look twice differentiable: second differences grow from {coarse} to {fine}"
            )));
        }
    }
    Ok(())
}

/// Deterministic table `sup_{t, y} |dh/dt(t, y) - S_j(t, y)|` per `j`, its
/// log-log slope, and optionally a full study driven by the smoothed measure.
pub fn run_rate_example(
    spec: &SmoothedSmSpec,
    config: &RateExampleConfig,
    study: Option<(&WaveProblem, &SolverGrid, &StudyConfig)>,
) -> Result<RateExample> {
    check_j_list(&config.j_list)?;
    spec.validate()?;
    let (a, b) = spec.y_interval;
    let ys = lattice(a, b, config.y_lattice.max(1));
    check_twice_differentiable(spec, &ys)?;
    let ts = lattice(0.0, 1.0, config.t_lattice.max(2));
    let k_max = *config.j_list.last().unwrap();

    let per_y: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|&y| -> Result<Vec<f64>> {
            let series = FunctionFourier::new(
                |t| spec.kernel.time_derivative(t, y),
                k_max,
                config.quadrature_cells,
            )?;
            let mut worst = vec![0.0f64; config.j_list.len()];
            for &t in &ts {
                let exact = spec.kernel.time_derivative(t, y);
                let sums = series.all_partial_sums(t);
                for (w, &j) in worst.iter_mut().zip(&config.j_list) {
                    *w = w.max((exact - sums[j]).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let deterministic: Vec<DeterministicRow> = config
        .j_list
        .iter()
        .enumerate()
        .map(|(idx, &j)| DeterministicRow {
            j,
            sup_error: per_y.iter().fold(0.0f64, |m, row| m.max(row[idx])),
        })
        .collect();
    let errors: Vec<f64> = deterministic.iter().map(|r| r.sup_error).collect();
    let fit = fit_rate(&config.j_list, &errors).ok();
    let stochastic = match study {
        Some((problem, grid, study)) => Some(run_convergence_study(
            problem,
            grid,
            &GeneratorSpec::Smoothed(spec.clone()),
            study,
        )?),
        None => None,
    };
    Ok(RateExample {
        deterministic,
        fit,
        stochastic,
    })
}
