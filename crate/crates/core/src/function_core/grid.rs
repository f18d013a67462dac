use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Uniform window `[t0, t1]` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        let grid = Self { t0, t1, n };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.t0.is_finite() && self.t1.is_finite(), || {
            format!("grid bounds must be finite, got [{}, {}]", self.t0, self.t1)
        })?;
        ensure(self.t0 < self.t1, || {
            format!("grid requires t0 < t1, got [{}, {}]", self.t0, self.t1)
        })?;
        ensure(self.n >= 2, || format!("grid needs at least 2 nodes, got {}", self.n))
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.n).map(move |i| self.t0 + i as f64 * h)
    }

    /// Same step, `left` extra nodes before `t0` and `right` after `t1`.
    pub fn padded(&self, left: usize, right: usize) -> Grid {
        let h = self.step();
        Grid {
            t0: self.t0 - left as f64 * h,
            t1: self.t1 + right as f64 * h,
            n: self.n + left + right,
        }
    }

    /// Grid with the same window and `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid { t0: self.t0, t1: self.t1, n: (self.n - 1) * factor + 1 }
    }
}

/// How a [`GridFunction`] is continued outside its window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extension {
    #[default]
    ClampEndpoint,
    Periodic { period: f64 },
}

/// Uniform samples with cubic Hermite interpolation.
///
/// Node slopes come from finite differences: fourth order in the interior,
/// dropping to second order on the two outermost nodes of each side.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    slopes: Vec<f64>,
    extension: Extension,
}

impl GridFunction {
    pub fn new(t0: f64, t1: f64, values: Vec<f64>, extension: Extension) -> Result<Self> {
        let grid = Grid::new(t0, t1, values.len())?;
        Self::on_grid(grid, values, extension)
    }

    pub fn on_grid(grid: Grid, values: Vec<f64>, extension: Extension) -> Result<Self> {
        grid.validate()?;
        ensure(values.len() == grid.n, || {
            format!("expected {} samples, got {}", grid.n, values.len())
        })?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(crate::Error::Evaluation { t: grid.node(i), value: *v });
        }
        if let Extension::Periodic { period } = extension {
            let span = grid.t1 - grid.t0;
            ensure(period > 0.0 && period <= span * (1.0 + 1e-12), || {
                format!("periodic extension needs 0 < period <= {span}, got {period}")
            })?;
        }
        let slopes = finite_difference_slopes(&values, grid.step());
        Ok(Self { grid, values, slopes, extension })
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(grid: Grid, extension: Extension, f: impl Fn(f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let values = grid.nodes().map(f).collect();
        Self::on_grid(grid, values, extension)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn t0(&self) -> f64 {
        self.grid.t0
    }

    pub fn t1(&self) -> f64 {
        self.grid.t1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.grid.node(i)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn with_extension(&self, extension: Extension) -> Result<Self> {
        Self::on_grid(self.grid, self.values.clone(), extension)
    }

    /// Max |value| over the nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bound on |interpolant| everywhere: the Hermite slope basis functions
    /// peak at 4/27, so the overshoot past the node extrema is at most
    /// `8/27 * h * max|slope|`.
    pub fn sup_bound(&self) -> f64 {
        let max_slope = self.slopes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.max_abs() + 8.0 / 27.0 * self.step() * max_slope
    }

    /// Sub-window of `len` nodes starting at node `start`.
    pub fn restrict(&self, start: usize, len: usize) -> Result<Self> {
        ensure(len >= 2 && start + len <= self.len(), || {
            format!("cannot restrict {} nodes to [{start}, {})", self.len(), start + len)
        })?;
        let grid = Grid { t0: self.node(start), t1: self.node(start + len - 1), n: len };
        Self::on_grid(grid, self.values[start..start + len].to_vec(), Extension::ClampEndpoint)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let Grid { t0, t1, n } = self.grid;
        let t = match self.extension {
            Extension::ClampEndpoint => t,
            Extension::Periodic { period } => t0 + (t - t0).rem_euclid(period),
        };
        if t <= t0 {
            return self.values[0];
        }
        if t >= t1 {
            return self.values[n - 1];
        }
        let h = self.grid.step();
        let pos = (t - t0) / h;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            return self.values[(nearest as usize).min(n - 1)];
        }
        let i = (pos.floor() as usize).min(n - 2);
        let s = (t - self.grid.node(i)) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

fn finite_difference_slopes(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    if n == 2 {
        let s = (v[1] - v[0]) / h;
        return vec![s, s];
    }
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Fourth-order central difference at interior node `i` (`2 <= i < n - 2`).
#[inline]
pub fn central_difference(values: &[f64], i: usize, h: f64) -> f64 {
    (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * h)
}
