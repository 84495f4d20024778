//! Sample paths of stochastic measures on `(0, 1]`.
//!
//! A realisation is stored as its increments over a uniform dyadic
//! partition: `increments[i]` is the measure of the cell `(i/n, (i+1)/n]`.
//! Every quantity computed downstream (integrals, Fourier coefficients,
//! dyadic schemes) reduces to finite sums over this vector.

mod covariance;
mod generators;

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use covariance::{cholesky_lower, CovarianceModel, GaussianIncrementSampler};
pub use generators::{
    generate_fbm, generate_lebesgue, generate_series_sm, generate_smoothed_sm, generate_sub_fbm,
    generate_wiener, generate_zero, CoefficientLaw, CoefficientShape, GeneratorSpec, KernelPreset,
    PreparedGenerator, SeriesSmSpec, SignedDensity, SmoothedSmSpec,
};

/// Absolute slack used when deciding whether a real point lies on a grid.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-9;

/// Uniform partition of `(0, 1]` into `n_cells` cells, `n_cells` a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Partition {
    n_cells: usize,
}

impl Partition {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidPartition(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        if !n_cells.is_power_of_two() {
            return Err(Error::InvalidPartition(format!(
                "cell count {n_cells} is not a power of two"
            )));
        }
        Ok(Self { n_cells })
    }

    /// The partition into the `2^level` dyadic cells of that level.
    pub fn dyadic(level: u32) -> Result<Self> {
        Self::new(1usize.checked_shl(level).unwrap_or(0))
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn level(&self) -> u32 {
        self.n_cells.trailing_zeros()
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn left(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    pub fn right(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n_cells as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_cells as f64
    }

    /// Boundary index `i` with `t == i / n_cells`, or an alignment error.
    pub fn boundary_index(&self, t: f64) -> Result<usize> {
        if !(-ALIGNMENT_TOLERANCE..=1.0 + ALIGNMENT_TOLERANCE).contains(&t) {
            return Err(Error::Alignment(format!("point {t} lies outside [0, 1]")));
        }
        let scaled = t * self.n_cells as f64;
        let index = scaled.round();
        if (scaled - index).abs() > ALIGNMENT_TOLERANCE * self.n_cells as f64 {
            return Err(Error::Alignment(format!(
                "point {t} is not a boundary of the {}-cell grid",
                self.n_cells
            )));
        }
        Ok(index as usize)
    }
}

impl TryFrom<usize> for Partition {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Partition> for usize {
    fn from(p: Partition) -> usize {
        p.n_cells
    }
}

/// Which generator produced a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorTag {
    Zero,
    Lebesgue,
    Wiener,
    Fbm {
        hurst: f64,
    },
    SubFbm {
        hurst: f64,
    },
    Series,
    Smoothed,
    /// Built from raw increments, a linear combination or a transformation.
    Derived,
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorTag::Zero => f.write_str("zero"),
            GeneratorTag::Lebesgue => f.write_str("lebesgue"),
            GeneratorTag::Wiener => f.write_str("wiener"),
            GeneratorTag::Fbm { hurst } => write!(f, "fbm(H={hurst})"),
            GeneratorTag::SubFbm { hurst } => write!(f, "sub_fbm(H={hurst})"),
            GeneratorTag::Series => f.write_str("series"),
            GeneratorTag::Smoothed => f.write_str("smoothed"),
            GeneratorTag::Derived => f.write_str("derived"),
        }
    }
}

/// A realised stochastic measure on the grid algebra of a [`Partition`].
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMeasurePath {
    partition: Partition,
    increments: Vec<f64>,
    seed: u64,
    generator: GeneratorTag,
}

impl StochasticMeasurePath {
    pub fn from_increments(
        partition: Partition,
        increments: Vec<f64>,
        seed: u64,
        generator: GeneratorTag,
    ) -> Result<Self> {
        if increments.len() != partition.n_cells() {
            return Err(Error::Shape(format!(
                "{} increments for a {}-cell partition",
                increments.len(),
                partition.n_cells()
            )));
        }
        if let Some(i) = increments.iter().position(|x| !x.is_finite()) {
            return Err(Error::Generation(format!("increment {i} is not finite")));
        }
        Ok(Self {
            partition,
            increments,
            seed,
            generator,
        })
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn n_cells(&self) -> usize {
        self.partition.n_cells()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &GeneratorTag {
        &self.generator
    }

    /// Measure of the union of cells `first..last`, summed left to right.
    pub fn measure_of_cells(&self, first: usize, last: usize) -> f64 {
        self.increments[first..last]
            .iter()
            .fold(0.0, |acc, x| acc + x)
    }

    /// `mu((s, t])` for grid-aligned `0 <= s <= t <= 1`.
    pub fn measure_of(&self, s: f64, t: f64) -> Result<f64> {
        let first = self.partition.boundary_index(s)?;
        let last = self.partition.boundary_index(t)?;
        if first > last {
            return Err(Error::Alignment(format!(
                "empty interval ({s}, {t}] has s > t"
            )));
        }
        Ok(self.measure_of_cells(first, last))
    }

    /// `mu((0, t_i])` for every boundary `t_i = i / n`, `i = 0..=n`.
    pub fn primitive(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for x in &self.increments {
            acc += x;
            out.push(acc);
        }
        out
    }

    /// `max_t |mu((0, t])|` over the grid: the realised bound `C_mu(omega)`.
    pub fn sup_primitive(&self) -> f64 {
        self.primitive()
            .into_iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Aggregates increments onto a coarser partition dividing this one.
    pub fn coarsen(&self, target: Partition) -> Result<Self> {
        let n = self.n_cells();
        let m = target.n_cells();
        if m > n || !n.is_multiple_of(m) {
            return Err(Error::Alignment(format!(
                "cannot coarsen {n} cells onto {m} cells"
            )));
        }
        let ratio = n / m;
        let increments = self
            .increments
            .chunks(ratio)
            .map(|c| c.iter().fold(0.0, |acc, x| acc + x))
            .collect();
        Ok(Self {
            partition: target,
            increments,
            seed: self.seed,
            generator: self.generator.clone(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            partition: self.partition,
            increments: self.increments.iter().map(|x| factor * x).collect(),
            seed: self.seed,
            generator: GeneratorTag::Derived,
        }
    }

    /// `alpha * self + beta * other`, increment by increment.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.partition != other.partition {
            return Err(Error::Shape("paths live on different partitions".into()));
        }
        let increments = self
            .increments
            .iter()
            .zip(&other.increments)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            partition: self.partition,
            increments,
            seed: self.seed,
            generator: GeneratorTag::Derived,
        })
    }

    /// Cyclic shift: cell `i` of the result carries increment `(i - shift) mod n`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut increments = self.increments.clone();
        increments.rotate_right(shift % self.n_cells());
        Self {
            partition: self.partition,
            increments,
            seed: self.seed,
            generator: GeneratorTag::Derived,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# generator={} seed={} n_cells={}",
            self.generator,
            self.seed,
            self.n_cells()
        )?;
        writeln!(w, "index,t_left,t_right,increment")?;
        for (i, x) in self.increments.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{x:e}",
                self.partition.left(i),
                self.partition.right(i)
            )?;
        }
        Ok(())
    }

    /// Reads a path written by [`write_csv`](Self::write_csv). The generator
    /// label is not parsed back; the path is tagged [`GeneratorTag::Derived`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut seed = 0;
        let mut increments = Vec::new();
        let mut saw_header = false;
        for (line_no, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for field in comment.split_whitespace() {
                    if let Some(v) = field.strip_prefix("seed=") {
                        seed = v.parse().map_err(|_| {
                            Error::Configuration(format!("bad seed `{v}` in path header"))
                        })?;
                    }
                }
                continue;
            }
            if !saw_header {
                if line != "index,t_left,t_right,increment" {
                    return Err(Error::Configuration(format!(
                        "unexpected CSV header `{line}`"
                    )));
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || Error::Configuration(format!("malformed path row {}", line_no + 1));
            if cols.len() != 4 {
                return Err(bad());
            }
            let index: usize = cols[0].parse().map_err(|_| bad())?;
            if index != increments.len() {
                return Err(bad());
            }
            increments.push(cols[3].parse::<f64>().map_err(|_| bad())?);
        }
        let partition = Partition::new(increments.len())?;
        Self::from_increments(partition, increments, seed, GeneratorTag::Derived)
    }
}
