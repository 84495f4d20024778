use serde::{Deserialize, Serialize};

use super::functions::{Diffusion, Drift, Profile};
use crate::error::{Error, Result};

/// Sign between the two travelling waves in the d'Alembert part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DalembertSign {
    /// `(u0(x + at) + u0(x - at)) / 2`, which reproduces `u(0, x) = u0(x)`.
    #[default]
    Classical,
    /// `(u0(x + at) - u0(x - at)) / 2`, kept for comparison only.
    Minus,
}

/// Data of the mild wave equation
/// `u = D + (1/2a) int int f(s, y, u) dy ds + (1/2a) int dmu(s) int sigma(s, y) dy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProblem {
    pub speed: f64,
    #[serde(default)]
    pub u0: Profile,
    #[serde(default)]
    pub v0: Profile,
    #[serde(default)]
    pub drift: Drift,
    #[serde(default)]
    pub sigma: Diffusion,
    /// Declared Lipschitz constant of `f` in `(y, v)`.
    #[serde(default = "one")]
    pub lipschitz_f: f64,
    /// Declared Hölder constant and exponent of `sigma`.
    #[serde(default = "one")]
    pub lipschitz_sigma: f64,
    #[serde(default = "one")]
    pub beta_sigma: f64,
    #[serde(default)]
    pub sign: DalembertSign,
}

fn one() -> f64 {
    1.0
}

/// Suprema observed while validating a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationWitness {
    pub sup_u0: f64,
    pub sup_v0: f64,
    pub sup_f: f64,
    pub sup_sigma: f64,
}

/// Points at which the structural assumptions are checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationLattice {
    pub y_min: f64,
    pub y_max: f64,
    pub y_points: usize,
    pub s_points: usize,
    /// `v` ranges over `[-v_bound, v_bound]`.
    pub v_bound: f64,
    pub v_points: usize,
}

impl ValidationLattice {
    pub fn over(y_min: f64, y_max: f64) -> Self {
        Self {
            y_min,
            y_max,
            y_points: 17,
            s_points: 9,
            v_bound: 4.0,
            v_points: 9,
        }
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

// Relative slack for lattice inequality checks.
const SLACK: f64 = 1e-9;

impl WaveProblem {
    /// Zero data with unit constants; fields are set directly afterwards.
    pub fn new(speed: f64) -> Self {
        Self {
            speed,
            u0: Profile::Zero,
            v0: Profile::Zero,
            drift: Drift::Zero,
            sigma: Diffusion::Zero,
            lipschitz_f: 1.0,
            lipschitz_sigma: 1.0,
            beta_sigma: 1.0,
            sign: DalembertSign::Classical,
        }
    }

    /// Checks parameters, boundedness, the Lipschitz bound on `f` and the
    /// Hölder bound on `sigma` over `lat`.
    pub fn validate(&self, lat: &ValidationLattice) -> Result<ValidationWitness> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::param(
                "speed",
                format!("must be positive, got {}", self.speed),
            ));
        }
        if !(self.beta_sigma > 0.5 && self.beta_sigma <= 1.0) {
            return Err(Error::param(
                "beta_sigma",
                format!(
                    "Hölder exponent of sigma must lie in (1/2, 1], got {}",
                    self.beta_sigma
                ),
            ));
        }
        for (name, v) in [
            ("lipschitz_f", self.lipschitz_f),
            ("lipschitz_sigma", self.lipschitz_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be finite and nonnegative, got {v}"),
                ));
            }
        }
        let ys = lattice(lat.y_min, lat.y_max, lat.y_points);
        let ss = lattice(0.0, 1.0, lat.s_points);
        let vs = lattice(-lat.v_bound, lat.v_bound, lat.v_points);

        let sup = |name: &str, vals: &mut dyn Iterator<Item = f64>| -> Result<f64> {
            let mut m: f64 = 0.0;
            for v in vals {
                if !v.is_finite() {
                    return Err(Error::SpecValidation(format!(
                        "{name} is not finite on the validation lattice"
                    )));
                }
                m = m.max(v.abs());
            }
            Ok(m)
        };
        let sup_u0 = sup("u0", &mut ys.iter().map(|&y| self.u0.eval(y)))?;
        let sup_v0 = sup("v0", &mut ys.iter().map(|&y| self.v0.eval(y)))?;

        let mut f_vals = Vec::with_capacity(ss.len() * ys.len() * vs.len());
        for &s in &ss {
            for &y in &ys {
                for &v in &vs {
                    f_vals.push(self.drift.eval(s, y, v));
                }
            }
        }
        let sup_f = sup("f", &mut f_vals.iter().copied())?;
        let block = ys.len() * vs.len();
        for si in 0..ss.len() {
            let vals = &f_vals[si * block..(si + 1) * block];
            for p in 0..block {
                for q in p + 1..block {
                    let (y1, v1) = (ys[p / vs.len()], vs[p % vs.len()]);
                    let (y2, v2) = (ys[q / vs.len()], vs[q % vs.len()]);
                    let lhs = (vals[p] - vals[q]).abs();
                    let rhs = self.lipschitz_f * ((y1 - y2).abs() + (v1 - v2).abs());
                    if lhs > rhs * (1.0 + SLACK) + SLACK {
                        return Err(Error::SpecValidation(format!(
                            "f violates the Lipschitz bound {} at s={}, (y,v)=({y1},{v1}) vs ({y2},{v2})",
                            self.lipschitz_f, ss[si]
                        )));
                    }
                }
            }
        }

        let points: Vec<(f64, f64)> = ss
            .iter()
            .flat_map(|&s| ys.iter().map(move |&y| (s, y)))
            .collect();
        let sig: Vec<f64> = points.iter().map(|&(s, y)| self.sigma.eval(s, y)).collect();
        let sup_sigma = sup("sigma", &mut sig.iter().copied())?;
        for p in 0..points.len() {
            for q in p + 1..points.len() {
                let (s1, y1) = points[p];
                let (s2, y2) = points[q];
                let lhs = (sig[p] - sig[q]).abs();
                let dist =
                    (s1 - s2).abs().powf(self.beta_sigma) + (y1 - y2).abs().powf(self.beta_sigma);
                let rhs = self.lipschitz_sigma * dist;
                if lhs > rhs * (1.0 + SLACK) + SLACK {
                    return Err(Error::SpecValidation(format!(
                        "sigma violates the Hölder bound {} (exponent {}) at ({s1},{y1}) vs ({s2},{y2})",
                        self.lipschitz_sigma, self.beta_sigma
                    )));
                }
            }
        }
        Ok(ValidationWitness {
            sup_u0,
            sup_v0,
            sup_f,
            sup_sigma,
        })
    }
}
