use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time discretization `t_i = i * dt` of `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    n: usize,
}

impl TimeGrid {
    /// `n` is the number of steps; the grid has `n + 1` nodes.
    pub fn new(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be > 0, got {t_max}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("n must be >= 2, got {n}")));
        }
        Ok(Self { t_max, n })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n as f64
    }

    /// Node `i`; the last node is exactly `t_max`.
    pub fn t(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_max
        } else {
            i as f64 * self.t_max / self.n as f64
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.t(i))
    }

    /// Trapezoid weight of node `j` in the integral over `[t_0, t_i]`.
    pub(crate) fn trapezoid_weight(&self, j: usize, i: usize) -> f64 {
        debug_assert!(j <= i);
        if i == 0 {
            0.0
        } else if j == 0 || j == i {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

/// A scalar function sampled on every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} samples for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for TimeSeries {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Measured or synthesized flux `u_x(0, t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxData {
    pub grid: TimeGrid,
    pub g: Vec<f64>,
}

impl FluxData {
    pub fn new(grid: TimeGrid, g: Vec<f64>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} flux samples for a grid with {} nodes",
                g.len(),
                grid.len()
            )));
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("flux sample {i} is not finite")));
        }
        Ok(Self { grid, g })
    }

    pub fn from_fn(grid: TimeGrid, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(g).collect())
    }

    pub fn as_series(&self) -> TimeSeries {
        TimeSeries {
            grid: self.grid,
            values: self.g.clone(),
        }
    }
}
