use serde::Serialize;

use super::operator::{Direction, ExpKernelOperator, KernelTolerances};
use crate::error::{ensure, Result};
use crate::function_core::{central_difference, BoundedFunction, Grid, GridFunction};

pub const DEFAULT_LIPSCHITZ_SLACK: f64 = 1e-3;

/// Max over interior nodes of `|D_h T + g T - f|`, with `D_h` the
/// fourth-order central difference. Small values confirm that `T` solves
/// `T' = -g T + f`.
pub fn derivative_identity_residual(
    t_fg: &GridFunction,
    f: &BoundedFunction,
    g: &BoundedFunction,
) -> f64 {
    identity_residual(t_fg, f, g, Direction::Forward)
}

/// Same for the reverse operator, whose identity reads `T' = g T - f`.
pub fn reverse_identity_residual(
    t_fg: &GridFunction,
    f: &BoundedFunction,
    g: &BoundedFunction,
) -> f64 {
    identity_residual(t_fg, f, g, Direction::Reverse)
}

fn identity_residual(
    t_fg: &GridFunction,
    f: &BoundedFunction,
    g: &BoundedFunction,
    direction: Direction,
) -> f64 {
    let v = t_fg.values();
    let h = t_fg.step();
    if v.len() < 5 {
        return f64::NAN;
    }
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Reverse => -1.0,
    };
    (2..v.len() - 2)
        .map(|i| {
            let t = t_fg.node(i);
            let d = central_difference(v, i, h);
            (d + sign * (g.value(t) * v[i] - f.value(t))).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzReport {
    /// Sampled `‖T(f1, g1) - T(f2, g2)‖∞`.
    pub lhs: f64,
    /// `max(r / l², 1 / l) (‖f1 - f2‖∞ + ‖g1 - g2‖∞)` from sampled norms.
    pub rhs: f64,
    pub pass: bool,
}

/// Compares both sides of the Lipschitz estimate for `T` on one pair of
/// inputs. The sup norms on the right are sampled over the whole window
/// the operator reads, including the truncated history.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_bound_check(
    (f1, g1): (&BoundedFunction, &BoundedFunction),
    (f2, g2): (&BoundedFunction, &BoundedFunction),
    l: f64,
    r: f64,
    grid: Grid,
    tolerances: KernelTolerances,
    slack: f64,
) -> Result<LipschitzReport> {
    let op = ExpKernelOperator::new(l, tolerances)?;
    let depth = op.plan(r)?.depth.max(op.plan(f1.sup_bound())?.depth).max(op.plan(f2.sup_bound())?.depth);
    let h = grid.step() / 4.0;
    let lo = grid.t0 - depth - grid.step();
    let count = ((grid.t1 - lo) / h).ceil() as usize + 1;
    let mut df = 0.0_f64;
    let mut dg = 0.0_f64;
    for k in 0..count {
        let s = lo + k as f64 * h;
        let (a, b) = (f1.eval(s)?, f2.eval(s)?);
        ensure(a.abs() <= r * (1.0 + 1e-12) && b.abs() <= r * (1.0 + 1e-12), || {
            format!("forcing exceeds r = {r} at t = {s}")
        })?;
        df = df.max((a - b).abs());
        dg = dg.max((g1.eval(s)? - g2.eval(s)?).abs());
    }
    let t1 = op.apply(f1, g1, grid, Direction::Forward)?.values;
    let t2 = op.apply(f2, g2, grid, Direction::Forward)?.values;
    let lhs = t1.values().iter().zip(t2.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rhs = (r / (l * l)).max(1.0 / l) * (df + dg);
    Ok(LipschitzReport { lhs, rhs, pass: lhs <= rhs * (1.0 + slack) })
}

/// Largest difference quotient of `T(f, g)` between adjacent nodes.
pub fn equicontinuity_modulus(
    f: &BoundedFunction,
    g: &BoundedFunction,
    l: f64,
    grid: Grid,
    tolerances: KernelTolerances,
) -> Result<f64> {
    let t = ExpKernelOperator::new(l, tolerances)?.apply(f, g, grid, Direction::Forward)?.values;
    let h = t.step();
    Ok(t.values().windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max))
}

/// Lipschitz bound `‖f‖∞ (‖g‖∞ / l + 1)` for `T(f, g)`.
pub fn equicontinuity_bound(f_sup: f64, g_sup: f64, l: f64) -> f64 {
    f_sup * (g_sup / l + 1.0)
}
