use serde::{Deserialize, Serialize};

use super::problem::{Problem, Sign};
use crate::error::{ensure, Result};
use crate::exp_kernel::{ExpKernelOperator, KernelTolerances, TruncationPlan};
use crate::function_core::{central_difference, BoundedFunction, Extension, Grid, GridFunction};
use crate::maps::HypothesisConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverTolerances {
    pub tail_tol: f64,
    pub quad_tol: f64,
    /// Stop once the sup-norm step between iterates falls below this.
    pub step_tol: f64,
    /// Second gate on the differential residual of the final iterate.
    pub residual_tol: f64,
    /// Relative slack for ratio checks.
    pub slack: f64,
    /// Allowed excursion of iterates outside the solution box.
    pub box_slack: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            tail_tol: 1e-9,
            quad_tol: 1e-9,
            step_tol: 1e-8,
            residual_tol: 1e-4,
            slack: 1e-2,
            box_slack: 1e-6,
        }
    }
}

impl SolverTolerances {
    pub fn kernel(&self) -> KernelTolerances {
        KernelTolerances::new(self.tail_tol, self.quad_tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.tail_tol,
            self.quad_tol,
            self.step_tol,
            self.residual_tol,
            self.slack,
            self.box_slack,
        ];
        ensure(all.iter().all(|v| *v > 0.0 && v.is_finite()), || {
            format!("all tolerances must be positive, got {self:?}")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    #[serde(default)]
    pub tolerances: SolverTolerances,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Relaxation `θ` in `x ← (1 - θ) x + θ Γ(x)`.
    #[serde(default = "default_damping")]
    pub damping: f64,
}

fn default_max_iter() -> usize {
    200
}

fn default_damping() -> f64 {
    1.0
}

impl SolverConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            tolerances: SolverTolerances::default(),
            max_iter: default_max_iter(),
            damping: default_damping(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        ensure(self.grid.n >= 9, || format!("grid needs at least 9 nodes, got {}", self.grid.n))?;
        self.tolerances.validate()?;
        ensure(self.damping > 0.0 && self.damping <= 1.0, || {
            format!("damping must lie in (0, 1], got {}", self.damping)
        })?;
        ensure(self.max_iter >= 1, || "max_iter must be at least 1".to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Final iterate on the requested grid.
    #[serde(skip)]
    pub solution: GridFunction,
    /// Final iterate on the grid extended by the truncation depth.
    #[serde(skip)]
    pub padded_solution: GridFunction,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub residual: f64,
    /// Largest distance of any iterate from the solution box.
    pub box_violation: f64,
    pub iterate_min: f64,
    pub iterate_max: f64,
    pub certified_error: Option<f64>,
    pub converged: bool,
    pub contraction_factor: f64,
    /// Relaxation in effect at the end of the run.
    pub damping: f64,
    pub subdivision: usize,
    pub depth_cells: usize,
    pub quadrature_error: Option<f64>,
    pub warnings: Vec<String>,
}

/// `Γ(x)` sampled on a fixed padded grid with the inner subdivision chosen
/// on first use and kept for later calls, so that successive iterates see
/// the same discrete map.
struct GammaMap<'a> {
    problem: &'a Problem,
    op: ExpKernelOperator,
    grid: Grid,
    depth_cells: usize,
    quad_tol: f64,
    subdivision: Option<usize>,
    error_estimate: Option<f64>,
}

impl<'a> GammaMap<'a> {
    fn new(problem: &'a Problem, grid: Grid, tol: &SolverTolerances) -> Result<Self> {
        let op = ExpKernelOperator::new(problem.constants.l, tol.kernel())?;
        let depth_cells = op.plan(problem.constants.r)?.cells(grid.step());
        Ok(Self {
            problem,
            op,
            grid,
            depth_cells,
            quad_tol: tol.quad_tol,
            subdivision: None,
            error_estimate: None,
        })
    }

    fn apply(&mut self, x: &GridFunction) -> Result<Vec<f64>> {
        let xb = BoundedFunction::from_grid(x.clone());
        let fx = self.problem.f.apply(&xb, self.quad_tol)?;
        let gx = self.problem.g.apply(&xb, self.quad_tol)?;
        let dir = self.problem.direction();
        let mut values = match self.subdivision {
            Some(s) => self.op.evaluate(&fx, &gx, self.grid, dir, self.depth_cells, s)?,
            None => {
                let out = self.op.apply_with_depth(&fx, &gx, self.grid, dir, self.depth_cells)?;
                self.subdivision = Some(out.subdivision);
                self.error_estimate = out.error_estimate;
                out.values.into_values()
            }
        };
        if self.problem.sign == Sign::MinusG {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(values)
    }
}

/// `Γ(x) = T(F(x), G(x))` on the grid of `x`, or `-T̃(F(x), G(x))` for the
/// reversed sign. Values of `x` outside its window are clamped.
pub fn gamma(p: &Problem, x: &GridFunction, tolerances: &SolverTolerances) -> Result<GridFunction> {
    p.validate()?;
    let mut map = GammaMap::new(p, x.grid(), tolerances)?;
    GridFunction::on_grid(x.grid(), map.apply(x)?, Extension::ClampEndpoint)
}

fn residual_range(p: &Problem, x: &GridFunction, lo: usize, hi: usize, quad_tol: f64) -> Result<f64> {
    let v = x.values();
    let h = x.step();
    let lo = lo.max(2);
    let hi = hi.min(v.len().saturating_sub(2));
    if lo >= hi {
        return Ok(0.0);
    }
    let xb = BoundedFunction::from_grid(x.clone());
    let fx = p.f.apply(&xb, quad_tol)?;
    let gx = p.g.apply(&xb, quad_tol)?;
    let sign = match p.sign {
        Sign::PlusG => 1.0,
        Sign::MinusG => -1.0,
    };
    let mut worst = 0.0_f64;
    for i in lo..hi {
        let t = x.node(i);
        let r = central_difference(v, i, h) + sign * gx.eval(t)? * v[i] - fx.eval(t)?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Max over interior nodes of `|D_h x ± G(x) x - F(x)|` with the
/// fourth-order central difference `D_h`.
pub fn residual(p: &Problem, x: &GridFunction, quad_tol: f64) -> Result<f64> {
    residual_range(p, x, 0, x.len(), quad_tol)
}

/// A-posteriori bound `q' / (1 - q') · ‖x_n - x_{n-1}‖` with `q'` the
/// contraction factor of the relaxed map, `1 - θ + θ q`.
pub fn certify(report: &SolveReport, c: &HypothesisConstants) -> Option<f64> {
    let q = 1.0 - report.damping + report.damping * c.q();
    let last = *report.step_norms.last()?;
    (q < 1.0).then(|| q / (1.0 - q) * last)
}

/// Picard iteration `x ← (1 - θ) x + θ Γ(x)` from `x0`, or from the
/// midpoint of the solution box.
///
/// Iterates live on the requested grid extended by the truncation depth for
/// the declared `r`. With the default `θ = 1`, oscillation switches the
/// relaxation to `θ = 0.5`: either two consecutive increases of the step
/// norm, or two consecutive steps that reverse direction without
/// shrinking by at least 10%.
pub fn solve_picard(p: &Problem, cfg: &SolverConfig, x0: Option<&GridFunction>) -> Result<SolveReport> {
    p.validate()?;
    cfg.validate()?;
    let tol = cfg.tolerances;
    let grid = cfg.grid;
    let depth_cells =
        TruncationPlan::new(p.constants.l, tol.tail_tol, p.constants.r)?.cells(grid.step());
    let (padded, offset) = match p.sign {
        Sign::PlusG => (grid.padded(depth_cells, 0), depth_cells),
        Sign::MinusG => (grid.padded(0, depth_cells), 0),
    };
    let user = offset..offset + grid.n;
    let (lo, hi) = p.solution_box();
    let initial: Vec<f64> = match x0 {
        Some(f) => padded.nodes().map(|t| f.eval(t)).collect(),
        None => vec![0.5 * (lo + hi); padded.n],
    };
    let mut x = GridFunction::on_grid(padded, initial, Extension::ClampEndpoint)?;

    let mut map = GammaMap::new(p, padded, &tol)?;
    let mut theta = cfg.damping;
    let mut warnings = Vec::new();
    let mut step_norms: Vec<f64> = Vec::new();
    let mut previous_delta: Option<Vec<f64>> = None;
    let mut flips = 0;
    let (mut it_min, mut it_max) = min_max(&x.values()[user.clone()]);

    for _ in 0..cfg.max_iter {
        let y = map.apply(&x)?;
        let next: Vec<f64> =
            x.values().iter().zip(&y).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        let delta: Vec<f64> =
            next[user.clone()].iter().zip(&x.values()[user.clone()]).map(|(a, b)| a - b).collect();
        let step = delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        step_norms.push(step);
        x = GridFunction::on_grid(padded, next, Extension::ClampEndpoint)?;
        let (a, b) = min_max(&x.values()[user.clone()]);
        it_min = it_min.min(a);
        it_max = it_max.max(b);
        if !step.is_finite() {
            warnings.push("iteration produced non-finite values".to_string());
            break;
        }
        if step <= tol.step_tol {
            break;
        }
        let n = step_norms.len();
        let rising = n >= 3 && step_norms[n - 1] > step_norms[n - 2] && step_norms[n - 2] > step_norms[n - 3];
        let flipped = previous_delta.as_ref().is_some_and(|d: &Vec<f64>| {
            d.iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>() < 0.0
        });
        let slow = n >= 2 && step_norms[n - 1] > 0.9 * step_norms[n - 2];
        flips = if flipped && slow { flips + 1 } else { 0 };
        if theta == 1.0 && (rising || flips >= 2) {
            theta = 0.5;
            warnings.push(format!("oscillation by iteration {n}; relaxing to 0.5"));
        }
        previous_delta = Some(delta);
    }

    let residual = residual_range(p, &x, user.start, user.end, tol.quad_tol)?;
    let box_violation = (lo - it_min).max(it_max - hi).max(0.0);
    if box_violation > tol.box_slack {
        warnings.push(format!(
            "hypothesis violation: iterates reached [{it_min}, {it_max}], outside [{lo}, {hi}]"
        ));
    }
    let last = step_norms.last().copied().unwrap_or(f64::INFINITY);
    let converged = last <= tol.step_tol && residual <= tol.residual_tol;
    if !converged {
        warnings.push(format!("not converged: last step {last}, residual {residual}"));
    }
    let solution =
        GridFunction::on_grid(grid, x.values()[user].to_vec(), Extension::ClampEndpoint)?;
    let mut report = SolveReport {
        solution,
        padded_solution: x,
        iterations: step_norms.len(),
        step_norms,
        residual,
        box_violation,
        iterate_min: it_min,
        iterate_max: it_max,
        certified_error: None,
        converged,
        contraction_factor: p.constants.q(),
        damping: theta,
        subdivision: map.subdivision.unwrap_or(0),
        depth_cells,
        quadrature_error: map.error_estimate,
        warnings,
    };
    report.certified_error = certify(&report, &p.constants);
    Ok(report)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}
