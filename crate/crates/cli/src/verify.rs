//! Checks of the kernel operator on a fixed corpus, each against an
//! analytic bound or closed form.

use std::collections::BTreeMap;
use std::f64::consts::{SQRT_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use boundedflow::catalog::builtin_problem;
use boundedflow::exp_kernel::{
    apply_t, apply_t_reverse, check_unit_mass, derivative_identity_residual, equicontinuity_bound,
    equicontinuity_modulus, lipschitz_bound_check, KernelTolerances, DEFAULT_LIPSCHITZ_SLACK,
};
use boundedflow::function_core::{BoundedFunction, Grid};

use crate::CliError;

pub const UNIT_MASS_TOL: f64 = 1e-6;
pub const ORACLE_TOL: f64 = 1e-6;
pub const DERIVATIVE_RATIO: f64 = 12.0;
/// Residuals below this are treated as the quadrature floor in the
/// convergence study.
pub const DERIVATIVE_FLOOR: f64 = 1e-9;
pub const LIPSCHITZ_PAIRS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: &[(&str, f64)], tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// One `(f, g, l)` triple of the fixed corpus.
#[derive(Clone)]
pub struct Case {
    pub name: &'static str,
    pub f: BoundedFunction,
    pub g: BoundedFunction,
    pub l: f64,
    /// Both `f` and `g` are `2π`-periodic.
    pub periodic: bool,
}

fn closed(sup: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> BoundedFunction {
    BoundedFunction::closed_form(sup, f)
}

pub fn corpus() -> Vec<Case> {
    vec![
        Case { name: "sin_unit", f: closed(1.0, f64::sin), g: BoundedFunction::constant(1.0), l: 1.0, periodic: true },
        Case {
            name: "zero_forcing",
            f: BoundedFunction::zero(),
            g: closed(3.0, |t: f64| 2.0 + t.cos()),
            l: 1.0,
            periodic: true,
        },
        Case {
            name: "trig_mixed",
            f: closed(1.5, |t: f64| t.cos() + 0.5 * (3.0 * t).sin()),
            g: closed(3.0, |t: f64| 2.0 + t.sin()),
            l: 1.0,
            periodic: true,
        },
        Case {
            name: "quasi_periodic",
            f: closed(2.0, |t: f64| t.sin() + (SQRT_2 * t).sin()),
            g: closed(4.0, |t: f64| 3.0 + (2.0 * t).sin()),
            l: 2.0,
            periodic: false,
        },
        Case {
            name: "ergodic_forcing",
            f: closed(1.0, |t: f64| 1.0 / (1.0 + t * t)),
            g: closed(3.0, |t: f64| 2.0 + t.cos()),
            l: 1.0,
            periodic: false,
        },
    ]
}

fn err(e: boundedflow::Error) -> CliError {
    CliError::from(e)
}

/// `|m - 1|` over the given evaluation points.
pub fn unit_mass_check(name: &str, g: &BoundedFunction, l: f64, ts: &[f64]) -> Result<Check, CliError> {
    let tol = KernelTolerances::new(5e-7, 5e-7);
    let mut worst = 0.0_f64;
    for &t in ts {
        worst = worst.max((check_unit_mass(g, l, t, tol).map_err(err)? - 1.0).abs());
    }
    Ok(Check::new(
        format!("unit_mass/{name}"),
        &[("max_deviation", worst), ("points", ts.len() as f64)],
        UNIT_MASS_TOL,
        worst <= UNIT_MASS_TOL,
    ))
}

/// Coefficients used by the unit-mass check: constants 1 and 3, `3 + sin 2t`
/// and the `G` of `ex0` at `x = 0`.
pub fn unit_mass_coefficients() -> Result<Vec<(&'static str, BoundedFunction, f64)>, CliError> {
    let ex0 = builtin_problem("ex0").map_err(err)?;
    let g0 = ex0.g.apply(&BoundedFunction::zero(), 1e-12).map_err(err)?;
    Ok(vec![
        ("const_1", BoundedFunction::constant(1.0), 1.0),
        ("const_3", BoundedFunction::constant(3.0), 3.0),
        ("three_plus_sin2t", BoundedFunction::closed_form(4.0, |t: f64| 3.0 + (2.0 * t).sin()), 2.0),
        ("ex0_g_at_zero", g0, 2.0),
    ])
}

pub fn random_points(rng: &mut ChaCha8Rng, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Sup-norm error of `T(sin, 1)` and `T̃(cos, 2)` against their closed
/// forms on `[-10, 10]`.
pub fn operator_oracle_checks() -> Result<Vec<Check>, CliError> {
    let grid = Grid { t0: -10.0, t1: 10.0, n: 2001 };
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let sin = BoundedFunction::closed_form(1.0, f64::sin);
    let cos = BoundedFunction::closed_form(1.0, f64::cos);
    let fwd = apply_t(&sin, &BoundedFunction::constant(1.0), 1.0, grid, tol).map_err(err)?;
    let rev = apply_t_reverse(&cos, &BoundedFunction::constant(2.0), 2.0, grid, tol).map_err(err)?;
    let sup_err = |v: &[f64], exact: &dyn Fn(f64) -> f64| {
        v.iter().enumerate().map(|(i, x)| (x - exact(grid.node(i))).abs()).fold(0.0, f64::max)
    };
    let e1 = sup_err(fwd.values(), &|t: f64| (t.sin() - t.cos()) / 2.0);
    let e2 = sup_err(rev.values(), &|t: f64| (2.0 * t.cos() - t.sin()) / 5.0);
    Ok(vec![
        Check::new("operator_oracle/forward_sin", &[("sup_error", e1)], ORACLE_TOL, e1 <= ORACLE_TOL),
        Check::new("operator_oracle/reverse_cos", &[("sup_error", e2)], ORACLE_TOL, e2 <= ORACLE_TOL),
    ])
}

/// Random trigonometric polynomial with `|f| <= amplitude`.
pub fn random_trig(rng: &mut ChaCha8Rng, amplitude: f64, offset: f64) -> BoundedFunction {
    let n = rng.gen_range(1..=3);
    let terms: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.2..3.0), rng.gen_range(0.0..TAU)))
        .collect();
    let total: f64 = terms.iter().map(|t| t.0.abs()).sum::<f64>().max(1e-12);
    let scale = amplitude * rng.gen_range(0.1..1.0) / total;
    BoundedFunction::closed_form(offset.abs() + amplitude, move |t: f64| {
        offset + scale * terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum::<f64>()
    })
}

/// Lipschitz estimate of `T` on `pairs` random pairs with `r = 2`, `l = 1`.
pub fn lipschitz_check(rng: &mut ChaCha8Rng, pairs: usize) -> Result<Check, CliError> {
    let grid = Grid { t0: -2.0, t1: 2.0, n: 41 };
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let mut worst = 0.0_f64;
    let mut failures = 0usize;
    for _ in 0..pairs {
        let f1 = random_trig(rng, 2.0, 0.0);
        let f2 = random_trig(rng, 2.0, 0.0);
        let g1 = random_trig(rng, 0.5, 1.5);
        let g2 = random_trig(rng, 0.5, 1.5);
        let rep = lipschitz_bound_check((&f1, &g1), (&f2, &g2), 1.0, 2.0, grid, tol, DEFAULT_LIPSCHITZ_SLACK)
            .map_err(err)?;
        if rep.rhs > 0.0 {
            worst = worst.max(rep.lhs / rep.rhs);
        }
        failures += usize::from(!rep.pass);
    }
    Ok(Check::new(
        "lipschitz/random_pairs",
        &[("max_lhs_over_rhs", worst), ("pairs", pairs as f64), ("failures", failures as f64)],
        1.0 + DEFAULT_LIPSCHITZ_SLACK,
        failures == 0,
    ))
}

pub fn equicontinuity_check(case: &Case) -> Result<Check, CliError> {
    let grid = Grid { t0: -5.0, t1: 5.0, n: 501 };
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let modulus = equicontinuity_modulus(&case.f, &case.g, case.l, grid, tol).map_err(err)?;
    let bound = equicontinuity_bound(case.f.sup_bound(), case.g.sup_bound(), case.l);
    Ok(Check::new(
        format!("equicontinuity/{}", case.name),
        &[("modulus", modulus), ("bound", bound)],
        bound,
        modulus <= bound * (1.0 + 1e-9) + 1e-12,
    ))
}

/// Residual of `T' + g T = f` at steps `h`, `h/2`, `h/4` on `[-2, 2]`.
pub fn derivative_study(case: &Case, h: f64) -> Result<[f64; 3], CliError> {
    let tol = KernelTolerances::new(1e-12, 1e-12);
    let mut out = [0.0; 3];
    for (i, step) in [h, h / 2.0, h / 4.0].into_iter().enumerate() {
        let n = (4.0 / step).round() as usize + 1;
        let t = apply_t(&case.f, &case.g, case.l, Grid { t0: -2.0, t1: 2.0, n }, tol).map_err(err)?;
        out[i] = derivative_identity_residual(&t, &case.f, &case.g);
    }
    Ok(out)
}

/// Every halving either reduces the residual by `DERIVATIVE_RATIO` or
/// lands on the quadrature floor.
pub fn derivative_converges(res: &[f64; 3]) -> (bool, f64) {
    let mut min_ratio = f64::INFINITY;
    let mut pass = true;
    for w in res.windows(2) {
        if w[1] <= DERIVATIVE_FLOOR {
            continue;
        }
        let ratio = w[0] / w[1];
        min_ratio = min_ratio.min(ratio);
        pass &= ratio >= DERIVATIVE_RATIO;
    }
    (pass, min_ratio)
}

pub fn derivative_check(case: &Case) -> Result<Check, CliError> {
    let res = derivative_study(case, 0.2)?;
    let (pass, min_ratio) = derivative_converges(&res);
    Ok(Check::new(
        format!("derivative_identity/{}", case.name),
        &[("residual_h", res[0]), ("residual_h2", res[1]), ("residual_h4", res[2]), ("min_ratio", min_ratio)],
        DERIVATIVE_RATIO,
        pass,
    ))
}

/// `max |T(t + 2π) - T(t)|` on a grid with 200 cells per period.
pub fn period_defect(case: &Case, tol: KernelTolerances) -> Result<f64, CliError> {
    let grid = Grid { t0: -8.0, t1: -8.0 + 4.0 * TAU, n: 801 };
    let t = apply_t(&case.f, &case.g, case.l, grid, tol).map_err(err)?;
    let v = t.values();
    Ok((0..v.len() - 200).map(|i| (v[i + 200] - v[i]).abs()).fold(0.0, f64::max))
}

pub fn periodicity_check(case: &Case) -> Result<Check, CliError> {
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let defect = period_defect(case, tol)?;
    let bound = 10.0 * tol.budget();
    Ok(Check::new(format!("periodicity/{}", case.name), &[("defect", defect)], bound, defect <= bound))
}

pub fn run_verify(seed: u64) -> Result<VerifyReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let ts = random_points(&mut rng, 20, -50.0, 50.0);
    for (name, g, l) in unit_mass_coefficients()? {
        checks.push(unit_mass_check(name, &g, l, &ts)?);
    }
    checks.extend(operator_oracle_checks()?);
    checks.push(lipschitz_check(&mut rng, LIPSCHITZ_PAIRS)?);
    for case in corpus() {
        checks.push(equicontinuity_check(&case)?);
        checks.push(derivative_check(&case)?);
        if case.periodic {
            checks.push(periodicity_check(&case)?);
        }
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { seed, checks, all_pass })
}
