//! Forward attraction towards a computed solution.
//!
//! A perturbed initial value is integrated forward with the classical
//! Runge-Kutta method and the distance `W(t) = |x(t) - x*(t)|` is compared
//! with the envelope `W(t0) e^{-λ (t - t0)}`. This checks forward
//! attraction of `x*`, not the comparison of two whole-line solutions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::function_core::GridFunction;
use crate::solver::{solve_picard, Problem, Sign, SolveReport, SolverConfig};

pub const DEFAULT_DECAY_SLACK: f64 = 0.05;

/// Distances below this are treated as numerical noise in the envelope
/// check.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t_start: f64,
    pub h: f64,
    pub states: Vec<f64>,
    pub method: &'static str,
    /// A-priori bound `sup|F| / l + |x_start|`.
    pub bound: f64,
    pub bounded: bool,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.states.len() - 1)
    }
}

/// Classical fourth-order integration of `x' = -G(x, t) x + F(x, t)`
/// (`+G` for the reversed sign) from `(t_start, x_start)` to `t_end`.
pub fn integrate_ivp(p: &Problem, t_start: f64, x_start: f64, t_end: f64, h: f64) -> Result<Trajectory> {
    ensure(h > 0.0 && h.is_finite(), || format!("step must be positive, got {h}"))?;
    ensure(t_end > t_start, || format!("need t_end > t_start, got [{t_start}, {t_end}]"))?;
    ensure(x_start.is_finite(), || format!("initial value must be finite, got {x_start}"))?;
    let f = p.f.pointwise_map()?;
    let g = p.g.pointwise_map()?;
    let s = match p.sign {
        Sign::PlusG => -1.0,
        Sign::MinusG => 1.0,
    };
    let rhs = |t: f64, x: f64| s * g.eval(x, t) * x + f.eval(x, t);
    let steps = ((t_end - t_start) / h).round().max(1.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x_start;
    states.push(x);
    for i in 0..steps {
        let t = t_start + i as f64 * h;
        let k1 = rhs(t, x);
        let k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = rhs(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !x.is_finite() {
            return Err(Error::Evaluation { t: t + h, value: x });
        }
        states.push(x);
    }
    let (lo, hi) = p.solution_box();
    let input = x_start.abs().max(lo.abs()).max(hi.abs());
    let bound = p.f.bounds(input)?.sup / p.constants.l + x_start.abs();
    let bounded = states.iter().all(|v| v.abs() <= bound * (1.0 + 1e-9));
    Ok(Trajectory { t_start, h, states, method: "rk4", bound, bounded })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    #[serde(rename = "W0")]
    pub w0: f64,
    pub lambda_used: f64,
    /// Max of `W(t) / (W0 e^{-λ (t - t0)})` past the transient, over
    /// samples with `W` above the noise floor.
    pub max_ratio: f64,
    /// `h Σ W(t_i)`.
    pub integral: f64,
    /// `W0 / λ (1 + slack)` plus the noise floor over the overlap.
    pub integral_bound: f64,
    pub noise_floor: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn lyapunov_decay_check(
    traj: &Trajectory,
    x_star: &GridFunction,
    lambda: f64,
    slack: f64,
) -> Result<DecayReport> {
    lyapunov_decay_check_with_floor(traj, x_star, lambda, slack, DEFAULT_NOISE_FLOOR)
}

pub fn lyapunov_decay_check_with_floor(
    traj: &Trajectory,
    x_star: &GridFunction,
    lambda: f64,
    slack: f64,
    noise_floor: f64,
) -> Result<DecayReport> {
    ensure(lambda > 0.0, || format!("decay rate must be positive, got {lambda}"))?;
    let lo = traj.t_start.max(x_star.t0());
    let hi = traj.t_end().min(x_star.t1());
    let eps = 1e-9 * traj.h;
    let idx: Vec<usize> = (0..traj.states.len())
        .filter(|&i| traj.time(i) >= lo - eps && traj.time(i) <= hi + eps)
        .collect();
    ensure(!idx.is_empty(), || {
        format!("trajectory and solution do not overlap: [{lo}, {hi}]")
    })?;
    let w: Vec<f64> = idx.iter().map(|&i| (traj.states[i] - x_star.eval(traj.time(i))).abs()).collect();
    let t0 = traj.time(idx[0]);
    let w0 = w[0];
    let mut max_ratio = 0.0_f64;
    for (&i, &wi) in idx.iter().zip(&w) {
        let t = traj.time(i);
        if t < t0 + 2.0 * traj.h - eps || wi <= noise_floor {
            continue;
        }
        let envelope = w0 * (-lambda * (t - t0)).exp();
        max_ratio = max_ratio.max(if envelope > 0.0 { wi / envelope } else { f64::INFINITY });
    }
    let integral = traj.h * w.iter().sum::<f64>();
    let span = traj.time(*idx.last().unwrap()) - t0;
    let integral_bound = w0 / lambda * (1.0 + slack) + noise_floor * span;
    Ok(DecayReport {
        w0,
        lambda_used: lambda,
        max_ratio,
        integral,
        integral_bound,
        noise_floor,
        slack,
        pass: max_ratio <= 1.0 + slack && integral <= integral_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractReport {
    pub lambda: f64,
    pub perturbations: Vec<f64>,
    pub reports: Vec<DecayReport>,
    #[serde(skip)]
    pub solve: SolveReport,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

impl AttractReport {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Solves for `x*`, then integrates from `x*(0) + δ` over `[0, horizon]`
/// for each perturbation `δ` and checks decay at the declared rate.
pub fn attract_experiment(
    p: &Problem,
    solve: &SolverConfig,
    perturbations: &[f64],
    horizon: f64,
    h: f64,
    slack: f64,
) -> Result<AttractReport> {
    let lambda = p.constants.lambda();
    if lambda <= 0.0 {
        return Err(Error::ConditionViolation { lambda });
    }
    if !p.is_pointwise_only() {
        return Err(Error::Unsupported(
            "forward integration needs pointwise maps".to_string(),
        ));
    }
    ensure(solve.grid.t0 <= 0.0 && solve.grid.t1 >= horizon, || {
        format!("solve window [{}, {}] must cover [0, {horizon}]", solve.grid.t0, solve.grid.t1)
    })?;
    let report = solve_picard(p, solve, None)?;
    let x_star = &report.solution;
    let x0 = x_star.eval(0.0);
    let runs = perturbations
        .par_iter()
        .map(|d| {
            let traj = integrate_ivp(p, 0.0, x0 + d, horizon, h)?;
            let decay = lyapunov_decay_check(&traj, x_star, lambda, slack)?;
            Ok((traj, decay))
        })
        .collect::<Result<Vec<_>>>()?;
    let (trajectories, reports) = runs.into_iter().unzip();
    Ok(AttractReport {
        lambda,
        perturbations: perturbations.to_vec(),
        reports,
        solve: report,
        trajectories,
    })
}
