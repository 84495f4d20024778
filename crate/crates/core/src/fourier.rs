//! Fourier coefficients of a stochastic-measure path and its partial and
//! Fejér sums, plus Fourier sums of ordinary functions.
//!
//! The coefficient `xi_k = int exp(-2 pi i k t) dmu(t)` is taken as the
//! partition sum with the integrand evaluated at the left endpoint of each
//! cell. This convention makes the discrete Parseval identity and the point
//! mass example hold exactly; it is a choice of this crate.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sm::{GeneratorTag, Partition, StochasticMeasurePath};

/// Relative size of the imaginary part tolerated in a symmetric sum.
const IMAGINARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summation {
    /// `S_j`: plain symmetric partial sum.
    Partial,
    /// `S~_j`: Cesàro mean of `S_0..S_j`.
    Fejer,
}

impl Summation {
    /// Multipliers `w_k` for `k = 0..=j`: 1 for partial sums,
    /// `1 - k/(j+1)` for Fejér sums.
    pub fn weights(self, j: usize) -> Vec<f64> {
        match self {
            Summation::Partial => vec![1.0; j + 1],
            Summation::Fejer => (0..=j).map(|k| 1.0 - k as f64 / (j + 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierExpansion {
    max_order: usize,
    /// `xi_0 ..= xi_K`; negative orders are conjugates.
    coefficients: Vec<Complex64>,
    source: Partition,
    source_generator: GeneratorTag,
    source_seed: u64,
}

/// Coefficients `xi_k`, `0 <= k <= max_order`, by direct summation.
pub fn expand(path: &StochasticMeasurePath, max_order: usize) -> FourierExpansion {
    let n = path.n_cells();
    let twiddles: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64))
        .collect();
    let coefficients = (0..=max_order)
        .map(|k| {
            let k = k % n;
            path.increments()
                .iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (i, &x)| {
                    acc + twiddles[(k * i) % n] * x
                })
        })
        .collect();
    FourierExpansion {
        max_order,
        coefficients,
        source: path.partition(),
        source_generator: path.generator().clone(),
        source_seed: path.seed(),
    }
}

impl FourierExpansion {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    pub fn source_partition(&self) -> Partition {
        self.source
    }

    /// True when orders at or above `n_cells / 2` were requested; those
    /// coefficients alias lower frequencies of the grid.
    pub fn is_aliased(&self) -> bool {
        2 * self.max_order >= self.source.n_cells()
    }

    /// `xi_k` for `|k| <= K`; negative orders are conjugated.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let c = self.coefficients[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn nonnegative_coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j > self.max_order {
            Err(Error::Order {
                order: j,
                max_order: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    /// `sum_{|k| <= j} w_|k| xi_k e^{2 pi i k t}` evaluated term by term in
    /// complex arithmetic; panics if the imaginary part does not cancel.
    fn symmetric_sum(&self, weights: &[f64], t: f64) -> f64 {
        let j = weights.len() - 1;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for k in -(j as i64)..=(j as i64) {
            let phase = 2.0 * PI * (k as f64 * t).rem_euclid(1.0);
            let term = weights[k.unsigned_abs() as usize]
                * self.coefficient(k)
                * Complex64::from_polar(1.0, phase);
            scale += term.norm();
            acc += term;
        }
        assert!(
            acc.im.abs() <= IMAGINARY_TOLERANCE * scale.max(f64::MIN_POSITIVE),
            "symmetric Fourier sum has imaginary part {} (scale {scale})",
            acc.im
        );
        acc.re
    }

    /// Partial sum `S_j(t)`.
    pub fn partial_sum(&self, j: usize, t: f64) -> Result<f64> {
        self.check_order(j)?;
        Ok(self.symmetric_sum(&Summation::Partial.weights(j), t))
    }

    /// Fejér sum `S~_j(t)` in kernel form.
    pub fn fejer_sum(&self, j: usize, t: f64) -> Result<f64> {
        self.check_order(j)?;
        let value = self.symmetric_sum(&Summation::Fejer.weights(j), t);
        if cfg!(debug_assertions) {
            let avg = self.fejer_sum_by_averaging(j, t)?;
            let scale: f64 = self.coefficients[..=j]
                .iter()
                .map(|c| c.norm())
                .sum::<f64>()
                * 2.0;
            debug_assert!(
                (value - avg).abs() <= 1e-12 * scale.max(value.abs()).max(f64::MIN_POSITIVE),
                "Fejér forms disagree: kernel {value}, averaging {avg}"
            );
        }
        Ok(value)
    }

    /// Fejér sum as the literal average `(S_0 + ... + S_j) / (j + 1)`.
    pub fn fejer_sum_by_averaging(&self, j: usize, t: f64) -> Result<f64> {
        self.check_order(j)?;
        let mut partial = 0.0;
        let mut total = 0.0;
        for k in 0..=j {
            partial = if k == 0 {
                self.coefficients[0].re
            } else {
                let phase = 2.0 * PI * (k as f64 * t).rem_euclid(1.0);
                partial + 2.0 * (self.coefficients[k] * Complex64::from_polar(1.0, phase)).re
            };
            total += partial;
        }
        Ok(total / (j + 1) as f64)
    }

    /// `S_j(t)` or `S~_j(t)`.
    pub fn sum(&self, summation: Summation, j: usize, t: f64) -> Result<f64> {
        match summation {
            Summation::Partial => self.partial_sum(j, t),
            Summation::Fejer => self.fejer_sum(j, t),
        }
    }

    /// Real form `w_0 Re xi_0 + 2 sum_{k>=1} w_k Re(xi_k e^{2 pi i k t})` for
    /// bulk evaluation; the phases are advanced by complex rotation.
    pub fn real_series(&self, weights: &[f64], t: f64) -> f64 {
        debug_assert!(weights.len() <= self.coefficients.len());
        let rot = Complex64::from_polar(1.0, 2.0 * PI * t.rem_euclid(1.0));
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = weights[0] * self.coefficients[0].re;
        for (w, c) in weights.iter().zip(&self.coefficients).skip(1) {
            phase *= rot;
            acc += 2.0 * w * (c * phase).re;
        }
        acc
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# source={} seed={} n_cells={} max_order={}",
            self.source_generator,
            self.source_seed,
            self.source.n_cells(),
            self.max_order
        )?;
        writeln!(w, "k,re,im")?;
        let k_max = self.max_order as i64;
        for k in -k_max..=k_max {
            let c = self.coefficient(k);
            writeln!(w, "{k},{:e},{:e}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Fourier coefficients of a deterministic function on `[0, 1]`, computed
/// with the composite midpoint rule.
#[derive(Debug, Clone)]
pub struct FunctionFourier {
    coefficients: Vec<Complex64>,
    cells: usize,
}

impl FunctionFourier {
    pub fn new<F: Fn(f64) -> f64>(f: F, max_order: usize, cells: usize) -> Result<Self> {
        if cells == 0 || cells < 4 * max_order {
            return Err(Error::Resolution(format!(
                "{cells} quadrature cells cannot resolve order {max_order} (need at least {})",
                (4 * max_order).max(1)
            )));
        }
        let samples: Vec<f64> = (0..cells)
            .map(|m| f((m as f64 + 0.5) / cells as f64))
            .collect();
        // Midpoints sit at odd multiples of 1 / (2 cells).
        let period = 2 * cells;
        let twiddles: Vec<Complex64> = (0..period)
            .map(|q| Complex64::from_polar(1.0, -2.0 * PI * q as f64 / period as f64))
            .collect();
        let coefficients = (0..=max_order)
            .map(|k| {
                let sum = samples
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (m, &v)| {
                        acc + twiddles[(k * (2 * m + 1)) % period] * v
                    });
                sum / cells as f64
            })
            .collect();
        Ok(Self {
            coefficients,
            cells,
        })
    }

    pub fn max_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        let c = self.coefficients[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn sum(&self, summation: Summation, j: usize, t: f64) -> Result<f64> {
        if j > self.max_order() {
            return Err(Error::Order {
                order: j,
                max_order: self.max_order(),
            });
        }
        let weights = summation.weights(j);
        let mut acc = weights[0] * self.coefficients[0].re;
        for (k, (w, c)) in weights
            .iter()
            .zip(&self.coefficients)
            .enumerate()
            .take(j + 1)
            .skip(1)
        {
            let phase = 2.0 * PI * (k as f64 * t).rem_euclid(1.0);
            acc += 2.0 * w * (c * Complex64::from_polar(1.0, phase)).re;
        }
        Ok(acc)
    }

    pub fn partial_sum(&self, j: usize, t: f64) -> Result<f64> {
        self.sum(Summation::Partial, j, t)
    }

    pub fn fejer_sum(&self, j: usize, t: f64) -> Result<f64> {
        self.sum(Summation::Fejer, j, t)
    }

    /// `S_0(t), ..., S_K(t)` accumulated in one pass.
    pub fn all_partial_sums(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coefficients.len());
        let mut acc = self.coefficients[0].re;
        out.push(acc);
        for (k, c) in self.coefficients.iter().enumerate().skip(1) {
            let phase = 2.0 * PI * (k as f64 * t).rem_euclid(1.0);
            acc += 2.0 * (c * Complex64::from_polar(1.0, phase)).re;
            out.push(acc);
        }
        out
    }
}

/// `j`-th symmetric Fourier partial sum of `f` at `t`.
pub fn deterministic_fourier_sum<F: Fn(f64) -> f64>(
    f: F,
    j: usize,
    t: f64,
    quadrature_cells: usize,
) -> Result<f64> {
    FunctionFourier::new(f, j, quadrature_cells)?.partial_sum(j, t)
}
