//! Exact Gaussian increment sampling through a Cholesky factor of the
//! increment covariance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{GeneratorTag, Partition, StochasticMeasurePath};
use crate::error::{Error, Result};

/// Relative diagonal shifts tried, in order, when the plain factorisation fails.
const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Gaussian processes on `[0, 1]` whose grid increments we can sample exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceModel {
    /// Fractional Brownian motion `W^H`, `Var W^H_1 = 1`.
    Fractional { hurst: f64 },
    /// Sub-fractional Brownian motion with covariance
    /// `s^{2H} + t^{2H} - ((s+t)^{2H} + |s-t|^{2H}) / 2`.
    SubFractional { hurst: f64 },
}

impl CovarianceModel {
    pub fn hurst(&self) -> f64 {
        match *self {
            CovarianceModel::Fractional { hurst } | CovarianceModel::SubFractional { hurst } => {
                hurst
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.hurst();
        let ok = match self {
            // H = 1/2 is admitted as the Brownian boundary case.
            CovarianceModel::Fractional { .. } => (0.5..=1.0).contains(&h),
            CovarianceModel::SubFractional { .. } => (0.5..1.0).contains(&h),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(
                "hurst",
                format!("H = {h} violates the Hurst range 1/2 <= H <= 1 (sub-fBm: H < 1) required for an SM"),
            ))
        }
    }

    /// Process covariance `E[X_s X_t]`.
    pub fn process_covariance(&self, s: f64, t: f64) -> f64 {
        match *self {
            CovarianceModel::Fractional { hurst } => {
                let e = 2.0 * hurst;
                0.5 * (s.powf(e) + t.powf(e) - (s - t).abs().powf(e))
            }
            CovarianceModel::SubFractional { hurst } => {
                let e = 2.0 * hurst;
                s.powf(e) + t.powf(e) - 0.5 * ((s + t).powf(e) + (s - t).abs().powf(e))
            }
        }
    }

    /// Covariance of the increments over cells `i` and `j` of `partition`.
    pub fn increment_covariance(&self, partition: Partition, i: usize, j: usize) -> f64 {
        match *self {
            CovarianceModel::Fractional { hurst } => {
                let e = 2.0 * hurst;
                let d = (i as f64 - j as f64).abs();
                0.5 * ((d + 1.0).powf(e) + (d - 1.0).abs().powf(e) - 2.0 * d.powf(e))
                    * (partition.n_cells() as f64).powf(-e)
            }
            CovarianceModel::SubFractional { .. } => {
                let (s0, s1) = (partition.left(i), partition.right(i));
                let (t0, t1) = (partition.left(j), partition.right(j));
                self.process_covariance(s1, t1)
                    - self.process_covariance(s1, t0)
                    - self.process_covariance(s0, t1)
                    + self.process_covariance(s0, t0)
            }
        }
    }

    fn tag(&self) -> GeneratorTag {
        match *self {
            CovarianceModel::Fractional { hurst } => GeneratorTag::Fbm { hurst },
            CovarianceModel::SubFractional { hurst } => GeneratorTag::SubFbm { hurst },
        }
    }
}

/// In-place lower Cholesky factor of a dense symmetric matrix stored row-major.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky_lower(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(matrix.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (row_i, row_j) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
            let v = matrix[i * n + j] - dot;
            if i == j {
                if !(v > 0.0) {
                    return None;
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Caches the Cholesky factor so that many seeds can be sampled cheaply.
#[derive(Debug, Clone)]
pub struct GaussianIncrementSampler {
    partition: Partition,
    model: CovarianceModel,
    factor: Vec<f64>,
    jitter: f64,
}

impl GaussianIncrementSampler {
    pub fn new(partition: Partition, model: CovarianceModel) -> Result<Self> {
        model.validate()?;
        let n = partition.n_cells();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let c = model.increment_covariance(partition, i, j);
                cov[i * n + j] = c;
                cov[j * n + i] = c;
            }
        }
        let scale = (0..n).map(|i| cov[i * n + i]).sum::<f64>() / n as f64;
        for &rel in &JITTER_LADDER {
            let mut shifted = cov.clone();
            if rel > 0.0 {
                for i in 0..n {
                    shifted[i * n + i] += rel * scale;
                }
            }
            if let Some(factor) = cholesky_lower(&shifted, n) {
                return Ok(Self {
                    partition,
                    model,
                    factor,
                    jitter: rel * scale,
                });
            }
        }
        Err(Error::Generation(format!(
            "increment covariance for {model:?} on {n} cells is not positive definite even after jitter"
        )))
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    /// Diagonal shift that was needed for the factorisation (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, seed: u64) -> StochasticMeasurePath {
        let n = self.partition.n_cells();
        let z = standard_normals(seed, n);
        let increments = (0..n)
            .map(|i| {
                self.factor[i * n..i * n + i + 1]
                    .iter()
                    .zip(&z)
                    .fold(0.0, |acc, (l, z)| acc + l * z)
            })
            .collect();
        StochasticMeasurePath {
            partition: self.partition,
            increments,
            seed,
            generator: self.model.tag(),
        }
    }
}

pub(crate) fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let m = [4.0, 2.0, 0.6, 2.0, 5.0, 1.5, 0.6, 1.5, 3.0];
        let l = cholesky_lower(&m, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - m[i * 3 + j]).abs() < 1e-14);
            }
        }
        assert!(cholesky_lower(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn fbm_increment_covariance_sums_to_unit_variance() {
        let p = Partition::new(16).unwrap();
        let m = CovarianceModel::Fractional { hurst: 0.75 };
        let total: f64 = (0..16)
            .flat_map(|i| (0..16).map(move |j| (i, j)))
            .map(|(i, j)| m.increment_covariance(p, i, j))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sub_fbm_terminal_variance() {
        let h: f64 = 0.7;
        let p = Partition::new(8).unwrap();
        let m = CovarianceModel::SubFractional { hurst: h };
        let total: f64 = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .map(|(i, j)| m.increment_covariance(p, i, j))
            .sum();
        assert!((total - (2.0 - 2f64.powf(2.0 * h - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn hurst_one_needs_jitter_but_factorises() {
        let p = Partition::new(8).unwrap();
        let s =
            GaussianIncrementSampler::new(p, CovarianceModel::Fractional { hurst: 1.0 }).unwrap();
        assert!(s.jitter() > 0.0);
        let path = s.sample(3);
        // W^1_t = t Z: all increments (nearly) equal.
        let first = path.increments()[0];
        for x in path.increments() {
            assert!((x - first).abs() < 1e-5 * first.abs().max(1e-3));
        }
    }

    #[test]
    fn hurst_range_is_enforced() {
        let p = Partition::new(8).unwrap();
        for h in [0.3, 0.49, 1.01] {
            assert!(matches!(
                GaussianIncrementSampler::new(p, CovarianceModel::Fractional { hurst: h }),
                Err(Error::Parameter { name: "hurst", .. })
            ));
        }
        assert!(
            GaussianIncrementSampler::new(p, CovarianceModel::SubFractional { hurst: 1.0 })
                .is_err()
        );
    }
}
