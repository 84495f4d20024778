//! Parameterised catalog of initial data, diffusion coefficients and drift
//! terms. Each preset knows its values and, where one exists in closed form,
//! its antiderivative in the spatial variable.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;

type Fn1 = dyn Fn(f64) -> f64 + Send + Sync;
type Fn2 = dyn Fn(f64, f64) -> f64 + Send + Sync;
type Fn3 = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// A user-supplied closure; not serializable, compared by identity.
pub struct Custom<F: ?Sized>(pub Arc<F>);

impl<F: ?Sized> Clone for Custom<F> {
    fn clone(&self) -> Self {
        Custom(self.0.clone())
    }
}

impl<F: ?Sized> fmt::Debug for Custom<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<custom>")
    }
}

impl<F: ?Sized> PartialEq for Custom<F> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

fn zero() -> f64 {
    0.0
}

fn unit() -> f64 {
    1.0
}

/// Initial displacement or velocity profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * y + phase)`.
    Sine {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default = "unit")]
        frequency: f64,
        #[serde(default = "zero")]
        phase: f64,
    },
    /// `sum_i coefficients[i] * y^i`.
    Polynomial {
        coefficients: Vec<f64>,
    },
    #[serde(skip)]
    Custom(Custom<Fn1>),
}

impl Profile {
    pub fn sine() -> Self {
        Profile::Sine {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Profile::Custom(Custom(Arc::new(f)))
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * y + phase).sin(),
            Profile::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * y + c)
            }
            Profile::Custom(f) => (f.0)(y),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    /// Closed-form antiderivative, when the preset has one.
    pub fn antiderivative(&self, y: f64) -> Option<f64> {
        match self {
            Profile::Zero => Some(0.0),
            Profile::Constant { value } => Some(value * y),
            Profile::Sine {
                amplitude,
                frequency,
                phase,
            } => Some(if *frequency == 0.0 {
                amplitude * phase.sin() * y
            } else {
                -amplitude * (frequency * y + phase).cos() / frequency
            }),
            Profile::Polynomial { coefficients } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (i, c)| acc * y + c / (i + 1) as f64)
                    * y,
            ),
            Profile::Custom(_) => None,
        }
    }

    /// `int_lo^hi profile(y) dy`.
    pub fn window_integral(&self, lo: f64, hi: f64, rule: &GaussLegendre, panel_width: f64) -> f64 {
        if lo == hi {
            return 0.0;
        }
        match (self.antiderivative(hi), self.antiderivative(lo)) {
            (Some(b), Some(a)) => b - a,
            _ => rule.composite_by_width(lo, hi, panel_width, |y| self.eval(y)),
        }
    }
}

/// Diffusion coefficient `sigma(s, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `offset + amplitude * sin(frequency * y + time_frequency * s + phase)`.
    Sine {
        #[serde(default = "zero")]
        offset: f64,
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default = "unit")]
        frequency: f64,
        #[serde(default = "zero")]
        time_frequency: f64,
        #[serde(default = "zero")]
        phase: f64,
    },
    #[serde(skip)]
    Custom(Custom<Fn2>),
}

impl Diffusion {
    /// `(1 + sin y) / 2`.
    pub fn half_one_plus_sine() -> Self {
        Diffusion::Sine {
            offset: 0.5,
            amplitude: 0.5,
            frequency: 1.0,
            time_frequency: 0.0,
            phase: 0.0,
        }
    }

    pub fn custom<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Diffusion::Custom(Custom(Arc::new(f)))
    }

    pub fn eval(&self, s: f64, y: f64) -> f64 {
        match self {
            Diffusion::Zero => 0.0,
            Diffusion::Constant { value } => *value,
            Diffusion::Sine {
                offset,
                amplitude,
                frequency,
                time_frequency,
                phase,
            } => offset + amplitude * (frequency * y + time_frequency * s + phase).sin(),
            Diffusion::Custom(f) => (f.0)(s, y),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Diffusion::Zero)
    }

    /// `c * sigma`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Diffusion::Zero => Diffusion::Zero,
            Diffusion::Constant { value } => Diffusion::Constant { value: c * value },
            Diffusion::Sine {
                offset,
                amplitude,
                frequency,
                time_frequency,
                phase,
            } => Diffusion::Sine {
                offset: c * offset,
                amplitude: c * amplitude,
                frequency: *frequency,
                time_frequency: *time_frequency,
                phase: *phase,
            },
            Diffusion::Custom(f) => {
                let f = f.0.clone();
                Diffusion::custom(move |s, y| c * f(s, y))
            }
        }
    }

    /// Closed-form antiderivative in `y`, when the preset has one.
    pub fn antiderivative(&self, s: f64, y: f64) -> Option<f64> {
        match self {
            Diffusion::Zero => Some(0.0),
            Diffusion::Constant { value } => Some(value * y),
            Diffusion::Sine {
                offset,
                amplitude,
                frequency,
                time_frequency,
                phase,
            } => {
                let arg = frequency * y + time_frequency * s + phase;
                if *frequency == 0.0 {
                    Some((offset + amplitude * arg.sin()) * y)
                } else {
                    Some(offset * y - amplitude * arg.cos() / frequency)
                }
            }
            Diffusion::Custom(_) => None,
        }
    }

    /// `int_lo^hi sigma(s, y) dy`; closed form when available, otherwise a
    /// composite Gauss–Legendre rule with panels no wider than `panel_width`.
    pub fn window_integral(
        &self,
        s: f64,
        lo: f64,
        hi: f64,
        rule: &GaussLegendre,
        panel_width: f64,
    ) -> f64 {
        if lo == hi {
            return 0.0;
        }
        match (self.antiderivative(s, hi), self.antiderivative(s, lo)) {
            (Some(b), Some(a)) => b - a,
            _ => rule.composite_by_width(lo, hi, panel_width, |y| self.eval(s, y)),
        }
    }
}

/// Drift `f(s, y, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    #[default]
    Zero,
    /// `constant + y_coefficient * y + v_coefficient * v`.
    Linear {
        #[serde(default = "zero")]
        constant: f64,
        #[serde(default = "zero")]
        y_coefficient: f64,
        #[serde(default = "zero")]
        v_coefficient: f64,
    },
    /// `amplitude * sin(frequency * v)`.
    Sine {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default = "unit")]
        frequency: f64,
    },
    #[serde(skip)]
    Custom(Custom<Fn3>),
}

impl Drift {
    pub fn custom<F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Drift::Custom(Custom(Arc::new(f)))
    }

    pub fn eval(&self, s: f64, y: f64, v: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::Linear {
                constant,
                y_coefficient,
                v_coefficient,
            } => constant + y_coefficient * y + v_coefficient * v,
            Drift::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * v).sin(),
            Drift::Custom(f) => (f.0)(s, y, v),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Drift::Zero)
    }
}
