use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sm::{Partition, ALIGNMENT_TOLERANCE};

fn default_quad_order() -> usize {
    4
}

fn default_panel_width() -> f64 {
    0.25
}

/// Space-time grid `[0, 1 - delta] x [x_min, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid {
    pub delta: f64,
    pub n_t: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    /// Gauss–Legendre order per path cell and per spatial interval.
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    /// Maximal panel width for `dy` integrals without a closed form.
    #[serde(default = "default_panel_width")]
    pub y_panel_width: f64,
}

/// Time nodes of a grid expressed in path cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeAxis {
    pub partition: Partition,
    pub n_t: usize,
    /// Path cells per time step.
    pub stride: usize,
}

impl TimeAxis {
    pub fn time(&self, i: usize) -> f64 {
        (i * self.stride) as f64 / self.partition.n_cells() as f64
    }

    /// Path cells in `(0, t_i]`.
    pub fn cells_before(&self, i: usize) -> usize {
        i * self.stride
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.n_t)
    }
}

impl SolverGrid {
    pub fn new(delta: f64, n_t: usize, x_min: f64, x_max: f64, n_x: usize) -> Self {
        Self {
            delta,
            n_t,
            x_min,
            x_max,
            n_x,
            quad_order: default_quad_order(),
            y_panel_width: default_panel_width(),
        }
    }

    /// Grid whose time steps are `stride` cells of `partition`.
    pub fn aligned(
        partition: Partition,
        delta: f64,
        x_min: f64,
        x_max: f64,
        n_x: usize,
    ) -> Result<Self> {
        let cells = (1.0 - delta) * partition.n_cells() as f64;
        let grid = Self::new(delta, cells.round() as usize, x_min, x_max, n_x);
        grid.time_axis(partition)?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(
                "delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if self.n_t == 0 {
            return Err(Error::param("n_t", "at least one time step is required"));
        }
        if self.n_x == 0 {
            return Err(Error::param("n_x", "at least one spatial node is required"));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_max < self.x_min {
            return Err(Error::param("x_max", "window must satisfy x_min <= x_max"));
        }
        if self.n_x > 1 && self.x_max == self.x_min {
            return Err(Error::param(
                "x_max",
                "a window of zero width admits a single node",
            ));
        }
        if self.quad_order == 0 {
            return Err(Error::param("quad_order", "must be positive"));
        }
        if !(self.y_panel_width > 0.0) {
            return Err(Error::param("y_panel_width", "must be positive"));
        }
        Ok(())
    }

    /// Checks that every time node is a boundary of `partition`.
    pub fn time_axis(&self, partition: Partition) -> Result<TimeAxis> {
        self.validate()?;
        let n = partition.n_cells();
        if self.delta < 1.0 / n as f64 {
            return Err(Error::Configuration(format!(
                "delta = {} is below one path cell (1/{n}); the last time node would reach t = 1",
                self.delta
            )));
        }
        let cells = (1.0 - self.delta) * n as f64;
        let rounded = cells.round();
        if (cells - rounded).abs() > ALIGNMENT_TOLERANCE * n as f64 {
            return Err(Error::Alignment(format!(
                "1 - delta = {} is not a multiple of the path step 1/{n}",
                1.0 - self.delta
            )));
        }
        let cells = rounded as usize;
        if !cells.is_multiple_of(self.n_t) {
            return Err(Error::Alignment(format!(
                "{cells} path cells in [0, 1 - delta] cannot be split into {} equal time steps",
                self.n_t
            )));
        }
        Ok(TimeAxis {
            partition,
            n_t: self.n_t,
            stride: cells / self.n_t,
        })
    }

    pub fn dx(&self) -> f64 {
        if self.n_x > 1 {
            (self.x_max - self.x_min) / (self.n_x - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, m: usize) -> f64 {
        if self.n_x > 1 {
            self.x_min + (self.x_max - self.x_min) * m as f64 / (self.n_x - 1) as f64
        } else {
            self.x_min
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|m| self.x(m)).collect()
    }

    /// Same window with `extra` additional nodes on each side.
    pub(crate) fn widened(&self, extra: usize) -> Self {
        let dx = self.dx();
        Self {
            x_min: self.x_min - extra as f64 * dx,
            x_max: self.x_max + extra as f64 * dx,
            n_x: self.n_x + 2 * extra,
            ..self.clone()
        }
    }
}
