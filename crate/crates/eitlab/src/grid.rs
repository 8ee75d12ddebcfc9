//! Space–time discretization of the solver runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("n_xi must be at least 16 (got {0})")]
    TooFewPoints(usize),
    #[error("dt must be positive and finite (got {0})")]
    BadDt(f64),
    #[error("t_max must be positive and finite (got {0})")]
    BadTMax(f64),
    #[error("strobe_interval must be at least dt (got {strobe}, dt = {dt})")]
    BadStrobe { strobe: f64, dt: f64 },
}

/// Uniform grid over ξ ∈ [0, 1] and the run's time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Number of spatial points over ξ ∈ [0, 1].
    pub n_xi: usize,
    /// Time step \[µs\].
    #[serde(rename = "dt_us")]
    pub dt: f64,
    /// Total integration time \[µs\].
    #[serde(rename = "t_max_us")]
    pub t_max: f64,
    /// Cadence at which `|S|` frames are recorded \[µs\].
    #[serde(rename = "strobe_interval_us")]
    pub strobe_interval: f64,
}

impl Grid {
    pub fn new(n_xi: usize, dt: f64, t_max: f64, strobe_interval: f64) -> Result<Self, GridError> {
        let grid = Self {
            n_xi,
            dt,
            t_max,
            strobe_interval,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.n_xi < 16 {
            return Err(GridError::TooFewPoints(self.n_xi));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(GridError::BadDt(self.dt));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(GridError::BadTMax(self.t_max));
        }
        if self.strobe_interval < self.dt {
            return Err(GridError::BadStrobe {
                strobe: self.strobe_interval,
                dt: self.dt,
            });
        }
        Ok(())
    }

    /// Spatial spacing dξ.
    pub fn dxi(&self) -> f64 {
        1.0 / (self.n_xi - 1) as f64
    }

    /// The ξ coordinates of the grid nodes.
    pub fn xi(&self) -> Vec<f64> {
        let dxi = self.dxi();
        (0..self.n_xi).map(|j| j as f64 * dxi).collect()
    }

    /// Number of time steps to cover `t_max`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    /// Steps between recorded frames.
    pub fn strobe_steps(&self) -> usize {
        (self.strobe_interval / self.dt).round().max(1.0) as usize
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n_xi: 400,
            dt: 0.01,
            t_max: 30.0,
            strobe_interval: 1.0,
        }
    }
}
