use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::function_core::{BoundedFunction, Extension, Grid, GridFunction};

/// Relative slack allowed when checking sampled coefficients against `l`.
pub const LOWER_BOUND_SLACK: f64 = 1e-9;

/// Finest inner subdivision of a grid cell tried before giving up.
pub const MAX_SUBDIVISION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTolerances {
    /// Budget for the discarded part of the improper integral.
    pub tail_tol: f64,
    /// Budget for the inner quadrature.
    pub quad_tol: f64,
}

impl Default for KernelTolerances {
    fn default() -> Self {
        Self { tail_tol: 1e-9, quad_tol: 1e-9 }
    }
}

impl KernelTolerances {
    pub fn new(tail_tol: f64, quad_tol: f64) -> Self {
        Self { tail_tol, quad_tol }
    }

    pub fn budget(&self) -> f64 {
        self.tail_tol + self.quad_tol
    }
}

/// Truncation depth for the improper integral.
///
/// With `g >= l` the kernel weight at lag `u` is at most `exp(-l u)`, so
/// cutting the integral at lag `depth` discards at most
/// `sup|f| exp(-l depth) / l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub l: f64,
    pub tail_tol: f64,
    pub depth: f64,
}

impl TruncationPlan {
    pub fn new(l: f64, tail_tol: f64, sup_f: f64) -> Result<Self> {
        ensure(l > 0.0 && l.is_finite(), || format!("lower bound l must be positive, got {l}"))?;
        ensure(tail_tol > 0.0, || format!("tail_tol must be positive, got {tail_tol}"))?;
        ensure(sup_f.is_finite() && sup_f >= 0.0, || format!("invalid sup bound {sup_f}"))?;
        let depth =
            if sup_f > l * tail_tol { (sup_f / (l * tail_tol)).ln() / l } else { 0.0 };
        Ok(Self { l, tail_tol, depth })
    }

    /// Grid cells covering `depth`, rounded up to an even count.
    pub fn cells(&self, h: f64) -> usize {
        let m = (self.depth / h).ceil() as usize;
        m + m % 2
    }

    pub fn tail_bound(&self, sup_f: f64) -> f64 {
        sup_f * (-self.l * self.depth).exp() / self.l
    }
}

/// Running integral `∫_{t_left}^{t_i} g` on a uniform grid, built cell by
/// cell with the four-point (cubic) rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeIntegral {
    pub t_left: f64,
    pub step: f64,
    values: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn from_samples(t_left: f64, step: f64, g: &[f64]) -> Self {
        let n = g.len();
        let mut values = Vec::with_capacity(n);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..n.saturating_sub(1) {
            let cell = if n < 4 {
                0.5 * step * (g[k] + g[k + 1])
            } else if k == 0 {
                step / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
            } else if k == n - 2 {
                step / 24.0 * (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4])
            } else {
                step / 24.0 * (-g[k - 1] + 13.0 * g[k] + 13.0 * g[k + 1] - g[k + 2])
            };
            acc += cell;
            values.push(acc);
        }
        Self { t_left, step, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `∫_{-∞}^t exp(-∫_s^t g) f(s) ds`
    Forward,
    /// `∫_t^{∞} exp(-∫_t^s g) f(s) ds`
    Reverse,
}

/// Samples of `f`, `g` and the running integral of `g` on a fine grid.
struct KernelSamples {
    f: Vec<f64>,
    gcum: Vec<f64>,
}

impl KernelSamples {
    fn collect(
        f: &BoundedFunction,
        g: &BoundedFunction,
        l: f64,
        t_left: f64,
        delta: f64,
        count: usize,
    ) -> Result<Self> {
        let (fs, gs): (Vec<f64>, Vec<f64>) = (0..count)
            .into_par_iter()
            .map(|k| {
                let s = t_left + k as f64 * delta;
                (f.value(s), g.value(s))
            })
            .unzip();
        let floor = l * (1.0 - LOWER_BOUND_SLACK);
        for (k, (fv, gv)) in fs.iter().zip(&gs).enumerate() {
            let s = t_left + k as f64 * delta;
            if !fv.is_finite() {
                return Err(Error::Evaluation { t: s, value: *fv });
            }
            if !gv.is_finite() {
                return Err(Error::Evaluation { t: s, value: *gv });
            }
            if *gv < floor {
                return Err(Error::Precondition { t: s, value: *gv, bound: l });
            }
        }
        let gcum = CumulativeIntegral::from_samples(t_left, delta, &gs).values;
        Ok(Self { f: fs, gcum })
    }

    /// Simpson sum of `f_k exp(-|gcum_k - gcum_anchor|)` over `width` cells
    /// ending (forward) or starting (reverse) at `anchor`.
    #[inline]
    fn kernel_sum(&self, anchor: usize, width: usize, delta: f64, direction: Direction) -> f64 {
        if width == 0 {
            return 0.0;
        }
        let g_anchor = self.gcum[anchor];
        let (start, sign) = match direction {
            Direction::Forward => (anchor - width, 1.0),
            Direction::Reverse => (anchor, -1.0),
        };
        let mut acc = 0.0;
        for j in 0..=width {
            let k = start + j;
            let w = if j == 0 || j == width {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * self.f[k] * (sign * (self.gcum[k] - g_anchor)).exp();
        }
        acc * delta / 3.0
    }

    /// Decay factor across the inner cells `[start, start + width]` and the
    /// Simpson integral over them, weighted towards the far endpoint in the
    /// direction of integration.
    #[inline]
    fn cell(&self, start: usize, width: usize, delta: f64, direction: Direction) -> (f64, f64) {
        let end = start + width;
        let decay = (self.gcum[start] - self.gcum[end]).exp();
        let mut acc = 0.0;
        for j in 0..=width {
            let k = start + j;
            let w = if j == 0 || j == width {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let lag = match direction {
                Direction::Forward => self.gcum[end] - self.gcum[k],
                Direction::Reverse => self.gcum[k] - self.gcum[start],
            };
            acc += w * self.f[k] * (-lag).exp();
        }
        (decay, acc * delta / 3.0)
    }
}

/// Result of an operator application.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOutput {
    pub values: GridFunction,
    /// Inner quadrature points per grid cell.
    pub subdivision: usize,
    /// Truncation depth in grid cells.
    pub depth_cells: usize,
    /// Richardson estimate of the quadrature error; `None` when the
    /// subdivision was fixed by the caller.
    pub error_estimate: Option<f64>,
}

/// The exponential-kernel operator `T(f, g)` and its reverse-time mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernelOperator {
    pub l: f64,
    pub tolerances: KernelTolerances,
}

impl ExpKernelOperator {
    pub fn new(l: f64, tolerances: KernelTolerances) -> Result<Self> {
        ensure(l > 0.0 && l.is_finite(), || format!("lower bound l must be positive, got {l}"))?;
        ensure(tolerances.tail_tol > 0.0 && tolerances.quad_tol > 0.0, || {
            format!("tolerances must be positive, got {tolerances:?}")
        })?;
        Ok(Self { l, tolerances })
    }

    pub fn plan(&self, sup_f: f64) -> Result<TruncationPlan> {
        TruncationPlan::new(self.l, self.tolerances.tail_tol, sup_f)
    }

    /// Values on `grid` with a fixed truncation and subdivision.
    ///
    /// `f` and `g` are sampled on the grid refined `subdivision` times and
    /// extended by `depth_cells` cells on the side the integral reaches
    /// into; history beyond that extension is dropped. The integral is
    /// accumulated cell by cell, `T(t + h) = e^{-∫_t^{t+h} g} T(t) + ∫_t^{t+h} ...`,
    /// which is the composite Simpson rule over the whole extended range.
    pub fn evaluate(
        &self,
        f: &BoundedFunction,
        g: &BoundedFunction,
        grid: Grid,
        direction: Direction,
        depth_cells: usize,
        subdivision: usize,
    ) -> Result<Vec<f64>> {
        grid.validate()?;
        ensure(subdivision >= 2 && subdivision.is_multiple_of(2), || {
            format!("subdivision must be even and >= 2, got {subdivision}")
        })?;
        let h = grid.step();
        let delta = h / subdivision as f64;
        let cells = grid.n - 1 + depth_cells;
        let t_left = match direction {
            Direction::Forward => grid.t0 - depth_cells as f64 * h,
            Direction::Reverse => grid.t0,
        };
        let samples =
            KernelSamples::collect(f, g, self.l, t_left, delta, cells * subdivision + 1)?;
        let pieces: Vec<(f64, f64)> = (0..cells)
            .into_par_iter()
            .map(|c| samples.cell(c * subdivision, subdivision, delta, direction))
            .collect();
        let mut nodes = vec![0.0; cells + 1];
        match direction {
            Direction::Forward => {
                for (c, (decay, local)) in pieces.iter().enumerate() {
                    nodes[c + 1] = decay * nodes[c] + local;
                }
                Ok(nodes.split_off(depth_cells))
            }
            Direction::Reverse => {
                for (c, (decay, local)) in pieces.iter().enumerate().rev() {
                    nodes[c] = decay * nodes[c + 1] + local;
                }
                nodes.truncate(grid.n);
                Ok(nodes)
            }
        }
    }

    /// Values on `grid`, refining the inner quadrature until the Richardson
    /// estimate meets `quad_tol`.
    pub fn apply(
        &self,
        f: &BoundedFunction,
        g: &BoundedFunction,
        grid: Grid,
        direction: Direction,
    ) -> Result<KernelOutput> {
        let plan = self.plan(f.sup_bound())?;
        self.apply_with_depth(f, g, grid, direction, plan.cells(grid.step()))
    }

    pub fn apply_with_depth(
        &self,
        f: &BoundedFunction,
        g: &BoundedFunction,
        grid: Grid,
        direction: Direction,
        depth_cells: usize,
    ) -> Result<KernelOutput> {
        let mut previous = self.evaluate(f, g, grid, direction, depth_cells, 2)?;
        let mut subdivision = 4;
        let mut achieved = f64::INFINITY;
        while subdivision <= MAX_SUBDIVISION {
            let current = self.evaluate(f, g, grid, direction, depth_cells, subdivision)?;
            achieved = current
                .iter()
                .zip(&previous)
                .map(|(a, b)| (a - b).abs() / 15.0)
                .fold(0.0, f64::max);
            if achieved <= self.tolerances.quad_tol {
                return Ok(KernelOutput {
                    values: GridFunction::on_grid(grid, current, Extension::ClampEndpoint)?,
                    subdivision,
                    depth_cells,
                    error_estimate: Some(achieved),
                });
            }
            previous = current;
            subdivision *= 2;
        }
        Err(Error::Tolerance { requested: self.tolerances.quad_tol, achieved })
    }

    /// `∫_{t-A}^{t} g(s) exp(-∫_s^t g) ds`, which equals `1 - exp(-∫_{t-A}^t g)`.
    pub fn unit_mass(&self, g: &BoundedFunction, t: f64) -> Result<f64> {
        let plan = self.plan(g.sup_bound())?;
        if plan.depth == 0.0 {
            return Ok(0.0);
        }
        let t_left = t - plan.depth;
        let mass = |cells: usize| -> Result<f64> {
            let delta = plan.depth / cells as f64;
            let samples = KernelSamples::collect(g, g, self.l, t_left, delta, cells + 1)?;
            Ok(samples.kernel_sum(cells, cells, delta, Direction::Forward))
        };
        let mut cells = 32usize.max(2 * (plan.depth * g.sup_bound()).ceil() as usize);
        cells += cells % 2;
        let mut previous = mass(cells)?;
        let mut achieved = f64::INFINITY;
        while cells <= 1 << 22 {
            cells *= 2;
            let current = mass(cells)?;
            achieved = (current - previous).abs();
            if achieved <= self.tolerances.quad_tol {
                return Ok(current);
            }
            previous = current;
        }
        Err(Error::Tolerance { requested: self.tolerances.quad_tol, achieved })
    }
}

/// Samples of `T(f, g)` on `grid`.
pub fn apply_t(
    f: &BoundedFunction,
    g: &BoundedFunction,
    l: f64,
    grid: Grid,
    tolerances: KernelTolerances,
) -> Result<GridFunction> {
    Ok(ExpKernelOperator::new(l, tolerances)?.apply(f, g, grid, Direction::Forward)?.values)
}

/// Samples of the reverse-time operator `t -> ∫_t^∞ exp(∫_s^t g) f(s) ds`.
pub fn apply_t_reverse(
    f: &BoundedFunction,
    g: &BoundedFunction,
    l: f64,
    grid: Grid,
    tolerances: KernelTolerances,
) -> Result<GridFunction> {
    Ok(ExpKernelOperator::new(l, tolerances)?.apply(f, g, grid, Direction::Reverse)?.values)
}

/// Numerical value of `∫_{-∞}^t g(s) exp(-∫_s^t g) ds`; exactly one for any
/// `g` bounded below by a positive constant.
pub fn check_unit_mass(
    g: &BoundedFunction,
    l: f64,
    t: f64,
    tolerances: KernelTolerances,
) -> Result<f64> {
    ExpKernelOperator::new(l, tolerances)?.unit_mass(g, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> KernelTolerances {
        KernelTolerances::new(1e-10, 1e-10)
    }

    fn max_err(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        (0..g.len()).map(|i| (g.values()[i] - exact(g.node(i))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn truncation_depth_formula() {
        let plan = TruncationPlan::new(2.0, 1e-6, 3.0).unwrap();
        assert!((plan.depth - (3.0 / 2e-6_f64).ln() / 2.0).abs() < 1e-14);
        assert!((plan.tail_bound(3.0) - 1e-6).abs() < 1e-18);
        assert_eq!(TruncationPlan::new(1.0, 1e-3, 1e-4).unwrap().depth, 0.0);
        assert!(TruncationPlan::new(0.0, 1e-3, 1.0).is_err());
        assert_eq!(plan.cells(0.1) % 2, 0);
    }

    #[test]
    fn cumulative_integral_increments_respect_lower_bound() {
        let delta = 0.01;
        let gs: Vec<f64> = (0..2000).map(|k| 3.0 + (2.0 * k as f64 * delta).sin()).collect();
        let c = CumulativeIntegral::from_samples(0.0, delta, &gs);
        for w in c.values().windows(2) {
            assert!(w[1] - w[0] >= 2.0 * delta * (1.0 - 1e-9));
        }
        let end = 1999.0 * delta;
        let exact = 3.0 * end + (1.0 - (2.0 * end).cos()) / 2.0;
        // Global error of the cubic rule is O(δ⁴ · length · max|g''''|).
        assert!((c.values()[1999] - exact).abs() < 1e-8);
    }

    #[test]
    fn constant_coefficients_give_ratio() {
        let grid = Grid::new(-5.0, 5.0, 101).unwrap();
        let t = apply_t(
            &BoundedFunction::constant(1.5),
            &BoundedFunction::constant(3.0),
            3.0,
            grid,
            tol(),
        )
        .unwrap();
        assert!(max_err(&t, |_| 0.5) <= 2e-10);
        let r = apply_t_reverse(
            &BoundedFunction::constant(1.5),
            &BoundedFunction::constant(3.0),
            3.0,
            grid,
            tol(),
        )
        .unwrap();
        assert!(max_err(&r, |_| 0.5) <= 2e-10);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let grid = Grid::new(-2.0, 2.0, 41).unwrap();
        let g = BoundedFunction::closed_form(4.0, |t| 3.0 + t.sin());
        let t = apply_t(&BoundedFunction::zero(), &g, 2.0, grid, tol()).unwrap();
        assert_eq!(t.max_abs(), 0.0);
        let r = apply_t_reverse(&BoundedFunction::zero(), &g, 2.0, grid, tol()).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn sine_forcing_matches_closed_form() {
        let grid = Grid::new(-10.0, 10.0, 401).unwrap();
        let s = BoundedFunction::closed_form(1.0, f64::sin);
        let t = apply_t(&s, &BoundedFunction::constant(1.0), 1.0, grid, tol()).unwrap();
        assert!(max_err(&t, |t| (t.sin() - t.cos()) / 2.0) <= 1e-9);
    }

    #[test]
    fn reverse_cosine_matches_closed_form() {
        let grid = Grid::new(-10.0, 10.0, 401).unwrap();
        let c = BoundedFunction::closed_form(1.0, f64::cos);
        let t = apply_t_reverse(&c, &BoundedFunction::constant(2.0), 2.0, grid, tol()).unwrap();
        assert!(max_err(&t, |t| (2.0 * t.cos() - t.sin()) / 5.0) <= 1e-9);
    }

    #[test]
    fn coefficient_below_bound_is_rejected() {
        let grid = Grid::new(0.0, 1.0, 11).unwrap();
        let g = BoundedFunction::closed_form(2.0, |t| 1.0 + t.sin());
        let err = apply_t(&BoundedFunction::constant(1.0), &g, 0.5, grid, tol()).unwrap_err();
        assert!(matches!(err, Error::Precondition { value, .. } if value < 0.5));
    }

    #[test]
    fn non_finite_forcing_is_reported() {
        let grid = Grid::new(0.0, 1.0, 11).unwrap();
        let f = BoundedFunction::closed_form(1.0, |t| if t > 0.5 { f64::NAN } else { 0.0 });
        let err = apply_t(&f, &BoundedFunction::constant(1.0), 1.0, grid, tol()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn unit_mass_examples() {
        let tol = KernelTolerances::new(5e-7, 5e-7);
        let cases: Vec<(BoundedFunction, f64, f64)> = vec![
            (BoundedFunction::constant(2.0), 2.0, 13.0),
            (BoundedFunction::closed_form(4.0, |t| 3.0 + (2.0 * t).sin()), 2.0, 0.0),
            (
                BoundedFunction::closed_form(5.0, |t| 3.0 + (2.0 * t).sin() + 1.0 / (1.0 + t * t)),
                1.0,
                5.0,
            ),
        ];
        for (g, l, t) in cases {
            let m = check_unit_mass(&g, l, t, tol).unwrap();
            assert!((m - 1.0).abs() <= tol.budget(), "{m}");
        }
    }
}
