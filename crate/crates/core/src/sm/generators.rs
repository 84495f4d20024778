use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::covariance::{standard_normals, CovarianceModel, GaussianIncrementSampler};
use super::{GeneratorTag, Partition, StochasticMeasurePath};
use crate::error::{Error, Result};

/// Slack accepted by lattice checks of declared constants.
const LATTICE_SLACK: f64 = 1e-9;

pub fn generate_zero(partition: Partition) -> StochasticMeasurePath {
    StochasticMeasurePath {
        partition,
        increments: vec![0.0; partition.n_cells()],
        seed: 0,
        generator: GeneratorTag::Zero,
    }
}

/// The Lebesgue measure, every increment equal to the cell width.
pub fn generate_lebesgue(partition: Partition) -> StochasticMeasurePath {
    StochasticMeasurePath {
        partition,
        increments: vec![partition.step(); partition.n_cells()],
        seed: 0,
        generator: GeneratorTag::Lebesgue,
    }
}

/// Brownian increments: iid `N(0, 1/n)`.
pub fn generate_wiener(partition: Partition, seed: u64) -> StochasticMeasurePath {
    let sd = partition.step().sqrt();
    let increments = standard_normals(seed, partition.n_cells())
        .into_iter()
        .map(|z| sd * z)
        .collect();
    StochasticMeasurePath {
        partition,
        increments,
        seed,
        generator: GeneratorTag::Wiener,
    }
}

pub fn generate_fbm(partition: Partition, hurst: f64, seed: u64) -> Result<StochasticMeasurePath> {
    Ok(
        GaussianIncrementSampler::new(partition, CovarianceModel::Fractional { hurst })?
            .sample(seed),
    )
}

pub fn generate_sub_fbm(
    partition: Partition,
    hurst: f64,
    seed: u64,
) -> Result<StochasticMeasurePath> {
    Ok(
        GaussianIncrementSampler::new(partition, CovarianceModel::SubFractional { hurst })?
            .sample(seed),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientShape {
    /// `X_n = 1`.
    Constant,
    Gaussian,
    /// `X_n = +-1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]` (unit variance).
    Uniform,
    /// Standard Cauchy. No variance; outside the statistical test suite.
    Cauchy,
}

/// Law of the series coefficients: `xi_n = scale * ratio^n * X_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientLaw {
    pub shape: CoefficientShape,
    pub scale: f64,
    #[serde(default = "one")]
    pub ratio: f64,
}

fn one() -> f64 {
    1.0
}

impl CoefficientLaw {
    pub fn constant(value: f64) -> Self {
        Self {
            shape: CoefficientShape::Constant,
            scale: value,
            ratio: 1.0,
        }
    }

    pub fn gaussian(scale: f64, ratio: f64) -> Self {
        Self {
            shape: CoefficientShape::Gaussian,
            scale,
            ratio,
        }
    }

    pub fn is_heavy_tailed(&self) -> bool {
        self.shape == CoefficientShape::Cauchy
    }

    fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> f64 {
        let x: f64 = match self.shape {
            CoefficientShape::Constant => 1.0,
            CoefficientShape::Gaussian => StandardNormal.sample(rng),
            CoefficientShape::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            CoefficientShape::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            CoefficientShape::Cauchy => Cauchy::new(0.0, 1.0).expect("unit Cauchy").sample(rng),
        };
        self.scale * self.ratio.powi(n as i32) * x
    }
}

/// Real signed measures on `(0, 1]` with closed-form cell masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignedDensity {
    Lebesgue,
    /// Lebesgue measure restricted to `(a, b]`.
    Indicator {
        a: f64,
        b: f64,
    },
    /// Density `amplitude * cos(2 pi frequency t)`.
    Cosine {
        frequency: u32,
        amplitude: f64,
    },
    /// `weight` times the Dirac mass at `at`.
    PointMass {
        at: f64,
        weight: f64,
    },
}

impl SignedDensity {
    pub fn cell_mass(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            SignedDensity::Lebesgue => hi - lo,
            SignedDensity::Indicator { a, b } => (hi.min(b) - lo.max(a)).max(0.0),
            SignedDensity::Cosine {
                frequency: 0,
                amplitude,
            } => amplitude * (hi - lo),
            SignedDensity::Cosine {
                frequency,
                amplitude,
            } => {
                let w = 2.0 * PI * frequency as f64;
                amplitude * ((w * hi).sin() - (w * lo).sin()) / w
            }
            SignedDensity::PointMass { at, weight } => {
                if lo < at && at <= hi {
                    weight
                } else {
                    0.0
                }
            }
        }
    }

    /// Total variation over `(0, 1]`.
    pub fn total_variation(&self) -> f64 {
        match *self {
            SignedDensity::Lebesgue => 1.0,
            SignedDensity::Indicator { a, b } => (b.min(1.0) - a.max(0.0)).max(0.0),
            SignedDensity::Cosine {
                frequency: 0,
                amplitude,
            } => amplitude.abs(),
            SignedDensity::Cosine { amplitude, .. } => amplitude.abs() * 2.0 / PI,
            SignedDensity::PointMass { at, weight } => {
                if at > 0.0 && at <= 1.0 {
                    weight.abs()
                } else {
                    0.0
                }
            }
        }
    }
}

/// `mu(A) = sum_{n <= N} xi_n m_n(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSmSpec {
    pub coefficient_law: CoefficientLaw,
    /// One density per term, or a single density shared by all terms.
    pub signed_measures: Vec<SignedDensity>,
    pub truncation: usize,
}

impl SeriesSmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.truncation == 0 {
            return Err(Error::SpecValidation(
                "series truncation must be at least 1".into(),
            ));
        }
        if self.signed_measures.is_empty() {
            return Err(Error::SpecValidation(
                "series needs at least one signed measure".into(),
            ));
        }
        if self.signed_measures.len() != 1 && self.signed_measures.len() < self.truncation {
            return Err(Error::SpecValidation(format!(
                "{} signed measures for {} series terms",
                self.signed_measures.len(),
                self.truncation
            )));
        }
        for (n, m) in self.signed_measures.iter().enumerate() {
            let tv = m.total_variation();
            if tv > 1.0 + 1e-12 {
                return Err(Error::SpecValidation(format!(
                    "signed measure {} has total variation {tv} > 1 (|m_n(A)| <= 1 fails)",
                    n + 1
                )));
            }
        }
        if !(self.coefficient_law.scale.is_finite() && self.coefficient_law.ratio.is_finite()) {
            return Err(Error::SpecValidation(
                "coefficient law parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    fn density(&self, n: usize) -> &SignedDensity {
        if self.signed_measures.len() == 1 {
            &self.signed_measures[0]
        } else {
            &self.signed_measures[n - 1]
        }
    }
}

pub fn generate_series_sm(
    spec: &SeriesSmSpec,
    partition: Partition,
    seed: u64,
) -> Result<StochasticMeasurePath> {
    spec.validate()?;
    Ok(series_path(spec, partition, seed))
}

fn series_path(spec: &SeriesSmSpec, partition: Partition, seed: u64) -> StochasticMeasurePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut increments = vec![0.0; partition.n_cells()];
    for n in 1..=spec.truncation {
        let xi = spec.coefficient_law.draw(n, &mut rng);
        let m = spec.density(n);
        for (i, inc) in increments.iter_mut().enumerate() {
            *inc += xi * m.cell_mass(partition.left(i), partition.right(i));
        }
    }
    StochasticMeasurePath {
        partition,
        increments,
        seed,
        generator: GeneratorTag::Series,
    }
}

/// Kernels `h(t, y)` with `h(0, y) = 0` for the smoothed construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelPreset {
    Zero,
    /// `h = t`.
    Time,
    /// `h = t y`.
    Product,
    /// `h = y (1 - cos 2 pi t) / (2 pi)`, so `dh/dt = y sin 2 pi t`.
    CosineBump,
    /// `h = y (1 - cos pi t) / pi`, so `dh/dt = y sin pi t` on `[0, 1]`.
    /// Its 1-periodic extension `y |sin pi t|` is continuous with a corner at
    /// the integers, which makes the Fourier sums converge at rate `~1/j`.
    AbsSine,
}

impl KernelPreset {
    pub fn value(&self, t: f64, y: f64) -> f64 {
        match self {
            KernelPreset::Zero => 0.0,
            KernelPreset::Time => t,
            KernelPreset::Product => t * y,
            KernelPreset::CosineBump => y * (1.0 - (2.0 * PI * t).cos()) / (2.0 * PI),
            KernelPreset::AbsSine => y * (1.0 - (PI * t).cos()) / PI,
        }
    }

    /// `dh/dt`, extended 1-periodically in `t`.
    pub fn time_derivative(&self, t: f64, y: f64) -> f64 {
        match self {
            KernelPreset::Zero => 0.0,
            KernelPreset::Time => 1.0,
            KernelPreset::Product => y,
            KernelPreset::CosineBump => y * (2.0 * PI * t).sin(),
            KernelPreset::AbsSine => y * (PI * t).sin().abs(),
        }
    }
}

/// `mu(A) = int dzeta(y) int_A dh/dt(t, y) dt`, realised as
/// `mu(cell_i) = sum_l [h(t_{i+1}, y_l) - h(t_i, y_l)] zeta(cell_l)`.
///
/// The base measure lives on `(0, 1]`; it is carried onto `[a, b]` by the
/// affine map, cell `l` sitting at `y_l = a + (b - a) l / y_cells`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSmSpec {
    pub kernel: KernelPreset,
    pub hoelder_gamma: f64,
    pub lipschitz: f64,
    pub base: Box<GeneratorSpec>,
    #[serde(default = "unit_interval")]
    pub y_interval: (f64, f64),
    pub y_cells: usize,
    #[serde(default = "default_lattice")]
    pub validation_lattice: usize,
}

fn unit_interval() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_lattice() -> usize {
    17
}

impl SmoothedSmSpec {
    pub fn new(kernel: KernelPreset, lipschitz: f64, base: GeneratorSpec, y_cells: usize) -> Self {
        Self {
            kernel,
            hoelder_gamma: 1.0,
            lipschitz,
            base: Box::new(base),
            y_interval: unit_interval(),
            y_cells,
            validation_lattice: default_lattice(),
        }
    }

    pub fn y_point(&self, l: usize) -> f64 {
        let (a, b) = self.y_interval;
        a + (b - a) * l as f64 / self.y_cells as f64
    }

    /// Lattice check of `h(0, y) = 0` and
    /// `|h(t,y) - h(s,x)| <= L (|t-s| + |y-x|^gamma)`.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.y_interval;
        if !(b > a) {
            return Err(Error::SpecValidation(format!(
                "empty y-interval [{a}, {b}]"
            )));
        }
        if !(self.hoelder_gamma > 0.5 && self.hoelder_gamma <= 1.0) {
            return Err(Error::SpecValidation(format!(
                "kernel Hoelder exponent gamma = {} must lie in (1/2, 1]",
                self.hoelder_gamma
            )));
        }
        let m = self.validation_lattice.max(2);
        let ts: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let ys: Vec<f64> = (0..m)
            .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
            .collect();
        for &y in &ys {
            let h0 = self.kernel.value(0.0, y);
            if h0.abs() > 1e-12 {
                return Err(Error::SpecValidation(format!(
                    "kernel has h(0, {y}) = {h0} != 0"
                )));
            }
        }
        for &t in &ts {
            for &y in &ys {
                let h1 = self.kernel.value(t, y);
                for &s in &ts {
                    for &x in &ys {
                        let lhs = (h1 - self.kernel.value(s, x)).abs();
                        let rhs = self.lipschitz
                            * ((t - s).abs() + (y - x).abs().powf(self.hoelder_gamma));
                        if lhs > rhs * (1.0 + LATTICE_SLACK) + 1e-12 {
                            return Err(Error::SpecValidation(format!(
                                "kernel Hoelder bound fails at (t,y)=({t},{y}), (s,x)=({s},{x}): {lhs} > {rhs}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn generate_smoothed_sm(
    spec: &SmoothedSmSpec,
    partition: Partition,
    seed: u64,
) -> Result<StochasticMeasurePath> {
    spec.validate()?;
    let base = spec.base.prepare(Partition::new(spec.y_cells)?)?;
    Ok(smoothed_path(spec, &base, partition, seed))
}

fn smoothed_path(
    spec: &SmoothedSmSpec,
    base: &PreparedGenerator,
    partition: Partition,
    seed: u64,
) -> StochasticMeasurePath {
    let zeta = base.sample(seed);
    let ys: Vec<f64> = (0..spec.y_cells).map(|l| spec.y_point(l)).collect();
    let increments = (0..partition.n_cells())
        .map(|i| {
            let (t0, t1) = (partition.left(i), partition.right(i));
            ys.iter().zip(zeta.increments()).fold(0.0, |acc, (&y, dz)| {
                acc + (spec.kernel.value(t1, y) - spec.kernel.value(t0, y)) * dz
            })
        })
        .collect();
    StochasticMeasurePath {
        partition,
        increments,
        seed,
        generator: GeneratorTag::Smoothed,
    }
}

/// Serializable description of a path generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Zero,
    Lebesgue,
    Wiener,
    Fbm { hurst: f64 },
    SubFbm { hurst: f64 },
    Series(SeriesSmSpec),
    Smoothed(SmoothedSmSpec),
}

impl GeneratorSpec {
    /// Validates and performs the seed-independent setup (e.g. Cholesky).
    pub fn prepare(&self, partition: Partition) -> Result<PreparedGenerator> {
        Ok(match self {
            GeneratorSpec::Zero => PreparedGenerator::Zero(partition),
            GeneratorSpec::Lebesgue => PreparedGenerator::Lebesgue(partition),
            GeneratorSpec::Wiener => PreparedGenerator::Wiener(partition),
            GeneratorSpec::Fbm { hurst } => {
                PreparedGenerator::Gaussian(GaussianIncrementSampler::new(
                    partition,
                    CovarianceModel::Fractional { hurst: *hurst },
                )?)
            }
            GeneratorSpec::SubFbm { hurst } => {
                PreparedGenerator::Gaussian(GaussianIncrementSampler::new(
                    partition,
                    CovarianceModel::SubFractional { hurst: *hurst },
                )?)
            }
            GeneratorSpec::Series(spec) => {
                spec.validate()?;
                PreparedGenerator::Series(spec.clone(), partition)
            }
            GeneratorSpec::Smoothed(spec) => {
                spec.validate()?;
                let base = spec.base.prepare(Partition::new(spec.y_cells)?)?;
                PreparedGenerator::Smoothed(spec.clone(), Box::new(base), partition)
            }
        })
    }

    pub fn generate(&self, partition: Partition, seed: u64) -> Result<StochasticMeasurePath> {
        Ok(self.prepare(partition)?.sample(seed))
    }

    /// True when every seed yields the same path.
    pub fn is_deterministic(&self) -> bool {
        match self {
            GeneratorSpec::Zero | GeneratorSpec::Lebesgue => true,
            GeneratorSpec::Series(s) => s.coefficient_law.shape == CoefficientShape::Constant,
            GeneratorSpec::Smoothed(s) => {
                s.kernel == KernelPreset::Zero || s.base.is_deterministic()
            }
            _ => false,
        }
    }

    /// Heavy-tailed laws are representable but not covered by the
    /// distributional checks.
    pub fn is_heavy_tailed(&self) -> bool {
        match self {
            GeneratorSpec::Series(s) => s.coefficient_law.is_heavy_tailed(),
            GeneratorSpec::Smoothed(s) => s.base.is_heavy_tailed(),
            _ => false,
        }
    }
}

/// A generator with its seed-independent work done; cheap to sample.
#[derive(Debug, Clone)]
pub enum PreparedGenerator {
    Zero(Partition),
    Lebesgue(Partition),
    Wiener(Partition),
    Gaussian(GaussianIncrementSampler),
    Series(SeriesSmSpec, Partition),
    Smoothed(SmoothedSmSpec, Box<PreparedGenerator>, Partition),
}

impl PreparedGenerator {
    pub fn partition(&self) -> Partition {
        match self {
            PreparedGenerator::Zero(p)
            | PreparedGenerator::Lebesgue(p)
            | PreparedGenerator::Wiener(p)
            | PreparedGenerator::Series(_, p)
            | PreparedGenerator::Smoothed(_, _, p) => *p,
            PreparedGenerator::Gaussian(s) => s.partition(),
        }
    }

    pub fn sample(&self, seed: u64) -> StochasticMeasurePath {
        match self {
            PreparedGenerator::Zero(p) => generate_zero(*p),
            PreparedGenerator::Lebesgue(p) => generate_lebesgue(*p),
            PreparedGenerator::Wiener(p) => generate_wiener(*p, seed),
            PreparedGenerator::Gaussian(s) => s.sample(seed),
            PreparedGenerator::Series(spec, p) => series_path(spec, *p, seed),
            PreparedGenerator::Smoothed(spec, base, p) => smoothed_path(spec, base, *p, seed),
        }
    }
}
