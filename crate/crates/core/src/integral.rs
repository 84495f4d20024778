//! Integrals of deterministic integrands against a measure path.
//!
//! `int_{(0,t]} g dmu` is the partition sum over the path's own cells. On
//! top of it sit the dyadic version scheme `g^(n)`, the majorant of the
//! version by a Hölder series times a measure series, the harness for
//! uniform convergence of integrals over integrand families, and a Monte
//! Carlo check of L2-continuity of the integral.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fsum::{exact_sum, two_sum};
use crate::rng::derive_seed;
use crate::sm::{PreparedGenerator, StochasticMeasurePath};

const LATTICE_SLACK: f64 = 1e-9;

/// Where the integrand is sampled inside each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellPoint {
    #[default]
    Left,
    Midpoint,
}

/// `sum_{cells in (0,t]} g(left endpoint) * increment`.
pub fn integrate<G: Fn(f64) -> f64>(g: G, path: &StochasticMeasurePath, t: f64) -> Result<f64> {
    integrate_at(g, path, t, CellPoint::Left)
}

pub fn integrate_at<G: Fn(f64) -> f64>(
    g: G,
    path: &StochasticMeasurePath,
    t: f64,
    point: CellPoint,
) -> Result<f64> {
    let last = path.partition().boundary_index(t)?;
    let p = path.partition();
    Ok(path.increments()[..last]
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &dm)| {
            let s = match point {
                CellPoint::Left => p.left(i),
                CellPoint::Midpoint => p.midpoint(i),
            };
            acc + g(s) * dm
        }))
}

fn level_cells(path: &StochasticMeasurePath, level: u32) -> Result<usize> {
    let n = path.n_cells();
    let count = 1usize
        .checked_shl(level)
        .filter(|&c| c <= n)
        .ok_or_else(|| {
            Error::Resolution(format!(
                "dyadic level {level} is finer than the {n}-cell path"
            ))
        })?;
    Ok(n / count)
}

/// `int_{(0,t]} g^(n) dmu` with
/// `g^(n) = sum_k g((k-1) 2^-n ∧ t) 1_{Delta_kn}`.
pub fn dyadic_integral<G: Fn(f64) -> f64>(
    g: G,
    path: &StochasticMeasurePath,
    t: f64,
    level: u32,
) -> Result<f64> {
    let width = level_cells(path, level)?;
    let end = path.partition().boundary_index(t)?;
    let count = 1usize << level;
    let mut acc = 0.0;
    for k in 0..count {
        let first = k * width;
        if first >= end {
            break;
        }
        let mass = path.measure_of_cells(first, (first + width).min(end));
        let s = (k as f64 / count as f64).min(t);
        acc += g(s) * mass;
    }
    Ok(acc)
}

/// The version `eta~ = I_0 + sum_{n=1}^{n_max} (I_n - I_{n-1})`, `I_n` the
/// level-`n` dyadic integral. Differences are carried as exact two-term
/// expansions and summed with correct rounding, so the telescope returns
/// `I_{n_max}` bit for bit.
pub fn dyadic_version<G: Fn(f64) -> f64>(
    g: G,
    path: &StochasticMeasurePath,
    t: f64,
    max_level: u32,
) -> Result<f64> {
    let levels = dyadic_levels(&g, path, t, max_level)?;
    let mut parts = vec![levels[0]];
    for w in levels.windows(2) {
        let (hi, lo) = two_sum(w[1], -w[0]);
        parts.push(hi);
        parts.push(lo);
    }
    Ok(exact_sum(parts))
}

/// `[I_0, ..., I_{n_max}]`.
pub fn dyadic_levels<G: Fn(f64) -> f64>(
    g: &G,
    path: &StochasticMeasurePath,
    t: f64,
    max_level: u32,
) -> Result<Vec<f64>> {
    (0..=max_level)
        .map(|n| dyadic_integral(g, path, t, n))
        .collect()
}

/// Hölder data `|g(t) - g(s)| <= constant |t - s|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderData {
    pub constant: f64,
    pub exponent: f64,
}

impl HolderData {
    pub fn new(constant: f64, exponent: f64) -> Self {
        Self { constant, exponent }
    }

    fn validate_exponent(&self) -> Result<()> {
        if !(self.exponent > 0.5 && self.exponent <= 1.0) || !(self.constant >= 0.0) {
            return Err(Error::Contract(format!(
                "Hölder data (L = {}, beta = {}) needs L >= 0 and 1/2 < beta <= 1",
                self.constant, self.exponent
            )));
        }
        Ok(())
    }

    /// Checks the bound on all pairs of an evenly spaced lattice of `[0, 1]`.
    /// Passing is necessary, not sufficient.
    pub fn check_on_lattice<G: Fn(f64) -> f64>(
        &self,
        g: G,
        lattice: usize,
        what: &str,
    ) -> Result<()> {
        let m = lattice.max(2);
        let pts: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let s = i as f64 / (m - 1) as f64;
                (s, g(s))
            })
            .collect();
        for (a, &(s, gs)) in pts.iter().enumerate() {
            for &(t, gt) in &pts[a + 1..] {
                let lhs = (gt - gs).abs();
                let rhs = self.constant * (t - s).abs().powf(self.exponent);
                if !(lhs <= rhs * (1.0 + LATTICE_SLACK) + 1e-12) {
                    return Err(Error::Contract(format!(
                        "{what}: Hölder bound fails between s = {s} and t = {t} ({lhs} > {rhs})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicSchemeConfig {
    pub max_level: u32,
    pub epsilon: f64,
    /// Interpolation exponent of the uniform-convergence argument; when set
    /// it must satisfy `1/(2 beta) < theta < 1` and `epsilon < 2 theta beta - 1`.
    pub theta: Option<f64>,
    /// Points of the lattice used to validate Hölder data.
    pub lattice: usize,
}

impl DyadicSchemeConfig {
    pub fn new(max_level: u32, epsilon: f64) -> Self {
        Self {
            max_level,
            epsilon,
            theta: None,
            lattice: 65,
        }
    }

    pub fn validate(&self, path: &StochasticMeasurePath, exponent: f64) -> Result<()> {
        level_cells(path, self.max_level)?;
        if !(self.epsilon > 0.0) {
            return Err(Error::Contract(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if let Some(theta) = self.theta {
            if !(theta > 1.0 / (2.0 * exponent) && theta < 1.0) {
                return Err(Error::Contract(format!(
                    "theta = {theta} outside (1/(2 beta), 1) for beta = {exponent}"
                )));
            }
            if !(self.epsilon < 2.0 * theta * exponent - 1.0) {
                return Err(Error::Contract(format!(
                    "epsilon = {} must be below 2 theta beta - 1 = {}",
                    self.epsilon,
                    2.0 * theta * exponent - 1.0
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralBoundReport {
    /// `|eta~(t)|` from the truncated telescope.
    pub value: f64,
    /// `g_zero_term + sqrt(holder_series * measure_series)`.
    pub bound: f64,
    pub g_zero_term: f64,
    pub holder_series: f64,
    pub measure_series: f64,
    pub max_level: u32,
}

/// `sum_{n=1}^{n_max} 2^{n eps} sum_k |g(k 2^-n ∧ t) - g((k-1) 2^-n ∧ t)|^2`.
pub fn holder_series<G: Fn(f64) -> f64>(g: G, t: f64, epsilon: f64, max_level: u32) -> f64 {
    let mut total = 0.0;
    for n in 1..=max_level {
        let count = 1usize << n;
        let mut level = 0.0;
        let mut prev = g(0.0);
        for k in 1..=count {
            let left = (k - 1) as f64 / count as f64;
            if left >= t {
                break;
            }
            let next = g((k as f64 / count as f64).min(t));
            level += (next - prev).powi(2);
            prev = next;
        }
        total += 2f64.powf(n as f64 * epsilon) * level;
    }
    total
}

/// Partial sums of `sum_n 2^{-n eps} sum_k |mu(Delta_kn ∩ (0,t])|^2` for
/// `n = 1..=n_max`; entry `n - 1` holds the sum truncated at `n`.
pub fn measure_series_table(
    path: &StochasticMeasurePath,
    epsilon: f64,
    t: f64,
    max_level: u32,
) -> Result<Vec<f64>> {
    level_cells(path, max_level)?;
    let end = path.partition().boundary_index(t)?;
    let mut out = Vec::with_capacity(max_level as usize);
    let mut total = 0.0;
    for n in 1..=max_level {
        let width = level_cells(path, n)?;
        let mut level = 0.0;
        let mut first = 0;
        while first < end {
            let mass = path.measure_of_cells(first, (first + width).min(end));
            level += mass * mass;
            first += width;
        }
        total += 2f64.powf(-(n as f64) * epsilon) * level;
        out.push(total);
    }
    Ok(out)
}

pub fn measure_series(
    path: &StochasticMeasurePath,
    epsilon: f64,
    t: f64,
    max_level: u32,
) -> Result<f64> {
    Ok(measure_series_table(path, epsilon, t, max_level)?
        .last()
        .copied()
        .unwrap_or(0.0))
}

pub fn write_measure_series_csv<W: Write>(table: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,partial_measure_series")?;
    for (i, v) in table.iter().enumerate() {
        writeln!(w, "{},{v:e}", i + 1)?;
    }
    Ok(())
}

/// Evaluates both sides of the majorant of the dyadic version at matched
/// truncation level.
pub fn master_bound<G: Fn(f64) -> f64>(
    g: G,
    path: &StochasticMeasurePath,
    t: f64,
    config: &DyadicSchemeConfig,
    holder: HolderData,
) -> Result<IntegralBoundReport> {
    holder.validate_exponent()?;
    config.validate(path, holder.exponent)?;
    holder.check_on_lattice(&g, config.lattice, "integrand")?;
    let value = dyadic_version(&g, path, t, config.max_level)?.abs();
    let g_zero_term = (g(0.0) * path.measure_of(0.0, t)?).abs();
    let hs = holder_series(&g, t, config.epsilon, config.max_level);
    let ms = measure_series(path, config.epsilon, t, config.max_level)?;
    Ok(IntegralBoundReport {
        value,
        bound: g_zero_term + (hs * ms).sqrt(),
        g_zero_term,
        holder_series: hs,
        measure_series: ms,
        max_level: config.max_level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDifference {
    pub j: usize,
    pub sup_diff: f64,
}

pub fn write_sup_differences_csv<W: Write>(
    rows: &[SupDifference],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "j,sup_diff")?;
    for r in rows {
        writeln!(w, "{},{:e}", r.j, r.sup_diff)?;
    }
    Ok(())
}

/// For each `j`, `sup_{z, t} |int_(0,t] g_j(z,.) dmu - int_(0,t] g(z,.) dmu|`
/// over the supplied samples, after lattice validation of the hypotheses:
/// (i) `sup |g_j - g|` nonincreasing along `j_list`, (ii) a common Hölder
/// bound for every `g_j(z, .)`, (iii) a finite bound on `|mu((0,t])|`.
#[allow(clippy::too_many_arguments)]
pub fn uniform_convergence_harness<Z, G, L>(
    family: G,
    limit: L,
    holder: HolderData,
    path: &StochasticMeasurePath,
    z_samples: &[Z],
    t_samples: &[f64],
    j_list: &[usize],
    lattice: usize,
) -> Result<Vec<SupDifference>>
where
    Z: Sync,
    G: Fn(usize, &Z, f64) -> f64 + Sync,
    L: Fn(&Z, f64) -> f64 + Sync,
{
    holder.validate_exponent()?;
    if z_samples.is_empty() || t_samples.is_empty() || j_list.is_empty() {
        return Err(Error::Contract(
            "uniform convergence harness needs z, t and j samples".into(),
        ));
    }
    let m = lattice.max(2);
    let grid: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();

    let (family, limit) = (&family, &limit);
    let mut previous = f64::INFINITY;
    for &j in j_list {
        let dist = z_samples
            .iter()
            .flat_map(|z| {
                grid.iter()
                    .map(move |&s| (family(j, z, s) - limit(z, s)).abs())
            })
            .fold(0.0, f64::max);
        if dist > previous * (1.0 + LATTICE_SLACK) + 1e-15 {
            return Err(Error::Contract(format!(
                "condition (i) violated: sup |g_j - g| increases to {dist} at j = {j}"
            )));
        }
        previous = dist;
        for z in z_samples {
            holder.check_on_lattice(
                |s| family(j, z, s),
                m,
                &format!("condition (ii) at j = {j}"),
            )?;
        }
    }
    let c_mu = path.sup_primitive();
    if !c_mu.is_finite() {
        return Err(Error::Contract(
            "condition (iii) violated: sup |mu((0,t])| is not finite".into(),
        ));
    }

    let ends: Vec<usize> = t_samples
        .iter()
        .map(|&t| path.partition().boundary_index(t))
        .collect::<Result<_>>()?;
    let running = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let p = path.partition();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(path.n_cells() + 1);
        out.push(0.0);
        for (i, &dm) in path.increments().iter().enumerate() {
            acc += f(p.left(i)) * dm;
            out.push(acc);
        }
        out
    };
    let limits: Vec<Vec<f64>> = z_samples
        .par_iter()
        .map(|z| running(&|s| limit(z, s)))
        .collect();
    Ok(j_list
        .iter()
        .map(|&j| {
            let sup_diff = z_samples
                .par_iter()
                .zip(&limits)
                .map(|(z, lim)| {
                    let eta = running(&|s| family(j, z, s));
                    ends.iter()
                        .map(|&e| (eta[e] - lim[e]).abs())
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max);
            SupDifference { j, sup_diff }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityConfig {
    /// Threshold in `P(|int h_j dmu| > tau)`.
    pub tau: f64,
    pub replicas: usize,
    pub root_seed: u64,
    /// Level the tail probabilities must fall below.
    pub significance: f64,
    /// Normal quantile for the Wilson intervals.
    pub z_score: f64,
    /// Midpoint cells for the L2 norms.
    pub l2_cells: usize,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            replicas: 2000,
            root_seed: 0,
            significance: 0.05,
            z_score: 1.96,
            l2_cells: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityRow {
    pub j: usize,
    pub l2_norm: f64,
    pub prob_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub tau: f64,
    pub rows: Vec<ContinuityRow>,
    pub decision: Decision,
}

impl ContinuityReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,j,prob_estimate,ci_low,ci_high")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.tau, r.j, r.prob_estimate, r.ci_low, r.ci_high
            )?;
        }
        Ok(())
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Monte Carlo estimate of `P(|int_(0,1] h_j dmu| > tau)` along a family with
/// `||h_j||_L2 -> 0`. PASS when, over the second half of the family, each
/// estimate stays below the previous row's upper confidence limit and the
/// last estimate is at most the significance level.
pub fn l2_continuity_check<H>(
    generator: &PreparedGenerator,
    family: H,
    j_list: &[usize],
    config: &ContinuityConfig,
) -> Result<ContinuityReport>
where
    H: Fn(usize, f64) -> f64 + Sync,
{
    if j_list.is_empty() || config.replicas == 0 {
        return Err(Error::Contract(
            "continuity check needs a family and replicas".into(),
        ));
    }
    let cells = config.l2_cells.max(1);
    let norms: Vec<f64> = j_list
        .iter()
        .map(|&j| {
            let sq: f64 = (0..cells)
                .map(|m| h_sq(&family, j, (m as f64 + 0.5) / cells as f64))
                .sum();
            (sq / cells as f64).sqrt()
        })
        .collect();
    for w in norms.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::Contract(format!(
                "L2 norms of the family must decrease, got {} then {}",
                w[0], w[1]
            )));
        }
    }

    let samples: Vec<Vec<f64>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let path = generator.sample(derive_seed(config.root_seed, r as u64));
            j_list
                .iter()
                .map(|&j| integrate(|s| family(j, s), &path, 1.0).expect("t = 1 is aligned"))
                .collect()
        })
        .collect();

    let rows: Vec<ContinuityRow> = j_list
        .iter()
        .enumerate()
        .map(|(idx, &j)| {
            let hits = samples.iter().filter(|v| v[idx].abs() > config.tau).count();
            let (ci_low, ci_high) = wilson_interval(hits, config.replicas, config.z_score);
            ContinuityRow {
                j,
                l2_norm: norms[idx],
                prob_estimate: hits as f64 / config.replicas as f64,
                ci_low,
                ci_high,
            }
        })
        .collect();

    let tail = &rows[rows.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1].prob_estimate <= w[0].ci_high);
    let small = rows
        .last()
        .map(|r| r.prob_estimate <= config.significance)
        .unwrap_or(false);
    Ok(ContinuityReport {
        tau: config.tau,
        rows,
        decision: if monotone && small {
            Decision::Pass
        } else {
            Decision::Fail
        },
    })
}

fn h_sq<H: Fn(usize, f64) -> f64>(h: &H, j: usize, s: f64) -> f64 {
    let v = h(j, s);
    v * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sm::{generate_lebesgue, generate_wiener, generate_zero, GeneratorSpec, Partition};

    fn part(n: usize) -> Partition {
        Partition::new(n).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let leb = generate_lebesgue(part(4));
        assert_eq!(integrate(|s| s, &leb, 1.0).unwrap(), 3.0 / 8.0);
        let w = generate_wiener(part(64), 3);
        assert_eq!(integrate(|_| 0.0, &w, 0.5).unwrap(), 0.0);
        assert_eq!(
            integrate(|_| 1.0, &w, 0.5).unwrap(),
            w.measure_of(0.0, 0.5).unwrap()
        );
        assert!(matches!(
            integrate(|s| s, &w, 0.3),
            Err(Error::Alignment(_))
        ));
        assert_eq!(
            integrate_at(|s| s, &leb, 1.0, CellPoint::Midpoint).unwrap(),
            0.5
        );
    }

    #[test]
    fn dyadic_full_resolution_is_the_partition_sum() {
        let w = generate_wiener(part(64), 8);
        let g = |s: f64| (3.0 * s).sin() + s * s;
        for t in [0.25, 0.5, 0.984375, 1.0] {
            assert_eq!(
                dyadic_integral(g, &w, t, 6).unwrap(),
                integrate(g, &w, t).unwrap()
            );
        }
        assert!(matches!(
            dyadic_integral(g, &w, 1.0, 7),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn dyadic_constant_integrand() {
        let w = generate_wiener(part(32), 8);
        let mu = w.measure_of(0.0, 0.75).unwrap();
        for level in 0..=5 {
            let v = dyadic_integral(|_| 2.0, &w, 0.75, level).unwrap();
            assert!((v - 2.0 * mu).abs() < 1e-14);
        }
    }

    #[test]
    fn telescope_is_exact() {
        let w = generate_wiener(part(256), 21);
        let g = |s: f64| (5.0 * s).cos() * s;
        for t in [0.5, 0.7890625, 1.0] {
            let direct = dyadic_integral(g, &w, t, 8).unwrap();
            assert_eq!(dyadic_version(g, &w, t, 8).unwrap(), direct);
        }
    }

    #[test]
    fn measure_series_cases() {
        let z = generate_zero(part(64));
        assert_eq!(measure_series(&z, 0.1, 1.0, 6).unwrap(), 0.0);
        let leb = generate_lebesgue(part(64));
        let eps = 0.3;
        let closed: f64 = (1..=6).map(|n| 2f64.powf(-(n as f64) * (1.0 + eps))).sum();
        let got = measure_series(&leb, eps, 1.0, 6).unwrap();
        assert!((got - closed).abs() <= 1e-12 * closed);
        let w = generate_wiener(part(64), 1);
        let table = measure_series_table(&w, 0.2, 0.5, 6).unwrap();
        assert!(table.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn master_bound_examples() {
        let w = generate_wiener(part(256), 4);
        let cfg = DyadicSchemeConfig::new(8, 0.1);
        let h = HolderData::new(1.0, 1.0);
        let zero = master_bound(|_| 0.0, &w, 1.0, &cfg, h).unwrap();
        assert_eq!((zero.value, zero.bound), (0.0, 0.0));

        let one = master_bound(|_| 1.0, &w, 0.5, &cfg, h).unwrap();
        let mu = w.measure_of(0.0, 0.5).unwrap().abs();
        assert_eq!(one.holder_series, 0.0);
        assert!((one.bound - mu).abs() < 1e-15 && (one.value - mu).abs() < 1e-15);

        let lin = master_bound(|s| s, &w, 1.0, &cfg, h).unwrap();
        assert!(lin.value <= lin.bound);
    }

    #[test]
    fn master_bound_validates() {
        let w = generate_wiener(part(64), 4);
        let h = HolderData::new(1.0, 1.0);
        let bad = master_bound(|s| 3.0 * s, &w, 1.0, &DyadicSchemeConfig::new(4, 0.1), h);
        assert!(matches!(bad, Err(Error::Contract(_))));
        let mut cfg = DyadicSchemeConfig::new(4, 0.5);
        cfg.theta = Some(0.7);
        assert!(master_bound(|s| s, &w, 1.0, &cfg, h).is_err());
        cfg.epsilon = 0.3;
        assert!(master_bound(|s| s, &w, 1.0, &cfg, h).is_ok());
        assert!(master_bound(|s| s, &w, 1.0, &DyadicSchemeConfig::new(7, 0.1), h).is_err());
    }

    #[test]
    fn uniform_convergence_harness_examples() {
        let w = generate_wiener(part(128), 9);
        let ts: Vec<f64> = (0..=128).map(|i| i as f64 / 128.0).collect();
        let h = HolderData::new(1.0, 1.0);
        let same = uniform_convergence_harness(
            |_, _: &(), s| s,
            |_, s| s,
            h,
            &w,
            &[()],
            &ts,
            &[1, 2, 4],
            33,
        )
        .unwrap();
        assert!(same.iter().all(|r| r.sup_diff == 0.0));

        let js = [1, 2, 4, 8, 16];
        let shifted = uniform_convergence_harness(
            |j, _: &(), _| 1.0 / j as f64,
            |_, _| 0.0,
            h,
            &w,
            &[()],
            &ts,
            &js,
            33,
        )
        .unwrap();
        let c = w.sup_primitive();
        for r in &shifted {
            assert!((r.sup_diff - c / r.j as f64).abs() < 1e-12);
        }

        let scaled = uniform_convergence_harness(
            |j, _: &(), s| s / j as f64,
            |_, _| 0.0,
            h,
            &w,
            &[()],
            &ts,
            &js,
            33,
        )
        .unwrap();
        assert!(scaled.windows(2).all(|p| p[1].sup_diff < p[0].sup_diff));
    }

    #[test]
    fn uniform_convergence_harness_rejects_growing_family() {
        let w = generate_wiener(part(32), 9);
        let h = HolderData::new(1.0, 1.0);
        let err = uniform_convergence_harness(
            |j, _: &(), _| j as f64 * 0.01,
            |_, _| 0.0,
            h,
            &w,
            &[()],
            &[1.0],
            &[1, 2],
            9,
        );
        assert!(matches!(err, Err(Error::Contract(m)) if m.contains("condition (i)")));
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
    }

    #[test]
    fn continuity_examples() {
        let gen = GeneratorSpec::Wiener.prepare(part(256)).unwrap();
        let cfg = ContinuityConfig {
            replicas: 400,
            ..Default::default()
        };
        let js = [1, 2, 4, 8, 16, 32, 64];
        let zero = l2_continuity_check(&gen, |_, _| 0.0, &js, &cfg).unwrap();
        assert_eq!(zero.decision, Decision::Pass);
        assert!(zero.rows.iter().all(|r| r.prob_estimate == 0.0));

        let scaled = l2_continuity_check(&gen, |j, _| 1.0 / j as f64, &js, &cfg).unwrap();
        assert_eq!(scaled.decision, Decision::Pass);

        let window = l2_continuity_check(
            &gen,
            |j, s| if s > 1.0 - 1.0 / j as f64 { 1.0 } else { 0.0 },
            &js,
            &cfg,
        )
        .unwrap();
        assert_eq!(window.decision, Decision::Pass, "{window:?}");

        let growing = l2_continuity_check(&gen, |j, _| j as f64, &js, &cfg);
        assert!(growing.is_err());
    }
}
