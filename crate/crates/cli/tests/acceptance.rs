//! Acceptance run: one PASS/FAIL line per criterion, then a non-zero exit if
//! any criterion fails.

use std::f64::consts::TAU;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use boundedflow::attractivity::attract_experiment;
use boundedflow::catalog::{builtin_problem, Catalog};
use boundedflow::exp_kernel::{
    apply_t, apply_t_reverse, check_unit_mass, derivative_identity_residual, lipschitz_bound_check,
    KernelTolerances,
};
use boundedflow::function_core::{BoundedFunction, Extension, Grid, GridFunction};
use boundedflow::maps::{contraction_factor, verify_box, EstimatorConfig};
use boundedflow::solver::{solve_picard, SolveReport, SolverConfig};
use boundedflow_cli::verify::{corpus, random_trig};
use boundedflow_cli::{cmd_solve, RunConfig};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn default_config(id: &str) -> SolverConfig {
    SolverConfig::new(Catalog::builtin().get(id).unwrap().default_grid())
}

fn sup_error(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    (0..g.len()).map(|i| (g.values()[i] - exact(g.node(i))).abs()).fold(0.0, f64::max)
}

fn constant_start(grid: Grid, c: f64) -> GridFunction {
    GridFunction::on_grid(grid, vec![c; grid.n], Extension::ClampEndpoint).unwrap()
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn contraction() -> Outcome {
    let p = builtin_problem("c2pi").map_err(e)?;
    let q = contraction_factor(&p.constants);
    Ok((q == 0.75, format!("q = {q:?}")))
}

fn unit_mass() -> Outcome {
    let tol = KernelTolerances::new(5e-7, 5e-7);
    let ex0 = builtin_problem("ex0").map_err(e)?;
    let ex0_g = ex0.g.apply(&BoundedFunction::zero(), 1e-12).map_err(e)?;
    let cases = [
        (BoundedFunction::constant(1.0), 1.0),
        (BoundedFunction::constant(3.0), 3.0),
        (BoundedFunction::closed_form(4.0, |t: f64| 3.0 + (2.0 * t).sin()), 2.0),
        (ex0_g, 2.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ts: Vec<f64> = (0..20).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let mut worst = 0.0_f64;
    for (g, l) in &cases {
        for &t in &ts {
            worst = worst.max((check_unit_mass(g, *l, t, tol).map_err(e)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |m - 1| = {worst:.3e} over 80 evaluations")))
}

fn operator_oracle() -> Outcome {
    let grid = Grid::new(-10.0, 10.0, 2001).map_err(e)?;
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let sin = BoundedFunction::closed_form(1.0, f64::sin);
    let cos = BoundedFunction::closed_form(1.0, f64::cos);
    let fwd = apply_t(&sin, &BoundedFunction::constant(1.0), 1.0, grid, tol).map_err(e)?;
    let rev = apply_t_reverse(&cos, &BoundedFunction::constant(2.0), 2.0, grid, tol).map_err(e)?;
    let e1 = sup_error(&fwd, |t| (t.sin() - t.cos()) / 2.0);
    let e2 = sup_error(&rev, |t| (2.0 * t.cos() - t.sin()) / 5.0);
    Ok((e1 <= 1e-6 && e2 <= 1e-6, format!("forward {e1:.3e}, reverse {e2:.3e}")))
}

fn lipschitz() -> Outcome {
    let grid = Grid::new(-2.0, 2.0, 41).map_err(e)?;
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for _ in 0..200 {
        let f1 = random_trig(&mut rng, 2.0, 0.0);
        let f2 = random_trig(&mut rng, 2.0, 0.0);
        let g1 = random_trig(&mut rng, 0.5, 1.5);
        let g2 = random_trig(&mut rng, 0.5, 1.5);
        let rep = lipschitz_bound_check((&f1, &g1), (&f2, &g2), 1.0, 2.0, grid, tol, 1e-3).map_err(e)?;
        if rep.lhs > rep.rhs * 1.001 {
            failures += 1;
        }
        if rep.rhs > 0.0 {
            worst = worst.max(rep.lhs / rep.rhs);
        }
    }
    Ok((failures == 0, format!("200 pairs, {failures} failures, max lhs/rhs = {worst:.4}")))
}

fn c2pi_run(x0: f64) -> Result<SolveReport, String> {
    let p = builtin_problem("c2pi").map_err(e)?;
    let cfg = default_config("c2pi");
    solve_picard(&p, &cfg, Some(&constant_start(cfg.grid, x0))).map_err(e)
}

fn c2pi_solve() -> Outcome {
    let (a, b) = (c2pi_run(0.0)?, c2pi_run(0.5)?);
    let mut pass = true;
    let mut notes = Vec::new();
    for (x0, rep) in [(0.0, &a), (0.5, &b)] {
        let in_box = rep.iterate_min >= -1e-6 && rep.iterate_max <= 0.5 + 1e-6;
        let worst_ratio = rep
            .step_norms
            .windows(2)
            .skip(1)
            .filter(|w| w[1] > 1e-7)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max);
        let ratios_ok = worst_ratio <= 0.75 * 1.01;
        pass &= rep.converged && in_box && rep.residual <= 1e-4 && ratios_ok;
        notes.push(format!(
            "x0={x0}: converged {}, iterates [{:.4}, {:.4}] in box {in_box}, residual {:.1e}, max ratio {worst_ratio:.3}",
            rep.converged, rep.iterate_min, rep.iterate_max, rep.residual
        ));
    }
    let diff = a.solution.values().iter().zip(b.solution.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let bound = match (a.certified_error, b.certified_error) {
        (Some(ea), Some(eb)) => ea + eb + 1e-6,
        _ => return Ok((false, format!("missing certified error; {}", notes.join("; ")))),
    };
    pass &= diff <= bound;
    notes.push(format!("run difference {diff:.2e} <= {bound:.2e}"));
    Ok((pass, notes.join("; ")))
}

fn exatt_pipeline() -> Outcome {
    let p = builtin_problem("exatt").map_err(e)?;
    let cfg = default_config("exatt");
    let rep = solve_picard(&p, &cfg, None).map_err(e)?;
    let (lo, hi) = (rep.solution.min_value(), rep.solution.max_value());
    let in_box = lo >= -1e-6 && hi <= 0.4 + 1e-6;
    let att = attract_experiment(&p, &cfg, &[0.1, -0.1, 0.3], 20.0, 1e-3, 0.05).map_err(e)?;
    let pass = rep.converged && in_box && att.lambda == 0.5 && att.all_pass();
    let ratios: Vec<String> = att.reports.iter().map(|r| format!("{:.3}", r.max_ratio)).collect();
    Ok((
        pass,
        format!(
            "converged {}, solution [{lo:.4}, {hi:.4}], lambda {}, decay max ratios [{}]",
            rep.converged,
            att.lambda,
            ratios.join(", ")
        ),
    ))
}

fn ex0_feasibility() -> Outcome {
    let p = builtin_problem("ex0").map_err(e)?;
    let b = verify_box(&p.f, &p.g, -1.0, 1.0, &EstimatorConfig::default()).map_err(e)?;
    let cfg = SolverConfig { damping: 0.5, ..default_config("ex0") };
    let rep = solve_picard(&p, &cfg, None).map_err(e)?;
    let pass = b.pass && rep.residual <= 1e-3;
    Ok((
        pass,
        format!(
            "ratio in [{:.4}, {:.4}] over {} probes, damped solve residual {:.2e}, converged {}",
            b.ratio_min, b.ratio_max, b.probes, rep.residual, rep.converged
        ),
    ))
}

fn derivative_order() -> Outcome {
    let tol = KernelTolerances::new(1e-12, 1e-12);
    let mut pass = true;
    let mut notes = Vec::new();
    for case in corpus().into_iter().filter(|c| c.name != "zero_forcing") {
        let mut res = Vec::new();
        for step in [0.2, 0.1, 0.05] {
            let n = (4.0_f64 / step).round() as usize + 1;
            let t = apply_t(&case.f, &case.g, case.l, Grid::new(-2.0, 2.0, n).map_err(e)?, tol).map_err(e)?;
            res.push(derivative_identity_residual(&t, &case.f, &case.g));
        }
        let ratios: Vec<f64> = res.windows(2).filter(|w| w[1] > 1e-9).map(|w| w[0] / w[1]).collect();
        pass &= ratios.iter().all(|r| *r >= 12.0);
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
        notes.push(format!("{} [{}]", case.name, shown.join(", ")));
    }
    Ok((pass, format!("halving ratios: {}", notes.join("; "))))
}

fn periodicity() -> Outcome {
    let tol = KernelTolerances::new(1e-9, 1e-9);
    let bound = 10.0 * (tol.tail_tol + tol.quad_tol);
    let grid = Grid::new(-8.0, -8.0 + 4.0 * TAU, 801).map_err(e)?;
    let mut worst = 0.0_f64;
    for case in corpus().into_iter().filter(|c| c.periodic) {
        let t = apply_t(&case.f, &case.g, case.l, grid, tol).map_err(e)?;
        let v = t.values();
        worst = (0..v.len() - 200).map(|i| (v[i + 200] - v[i]).abs()).fold(worst, f64::max);
    }
    Ok((worst <= bound, format!("max defect {worst:.3e} <= {bound:.1e}")))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(e)?, tempfile::tempdir().map_err(e)?];
    for d in &dirs {
        let c = RunConfig { out: d.path().to_path_buf(), ..RunConfig::default() };
        cmd_solve(&c).map_err(e)?;
    }
    let mut same = true;
    for name in ["solution.csv", "report.json"] {
        let a = fs::read(dirs[0].path().join(name)).map_err(e)?;
        let b = fs::read(dirs[1].path().join(name)).map_err(e)?;
        same &= a == b;
    }
    Ok((same, format!("solution.csv and report.json identical: {same}")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("contraction factor", Duration::from_millis(1), contraction),
        ("unit kernel mass", Duration::from_secs(1), unit_mass),
        ("operator oracle", Duration::from_secs(1), operator_oracle),
        ("operator Lipschitz bound", Duration::from_secs(30), lipschitz),
        ("c2pi box, solve and uniqueness", Duration::from_secs(60), c2pi_solve),
        ("exatt solve and attraction", Duration::from_secs(120), exatt_pipeline),
        ("ex0 box and damped solve", Duration::from_secs(120), ex0_feasibility),
        ("derivative identity order", Duration::from_secs(30), derivative_order),
        ("periodicity preservation", Duration::from_secs(10), periodicity),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && elapsed <= *limit, detail),
            Err(msg) => (false, format!("error: {msg}")),
        };
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {:>2} {name}: {detail} ({:.3} s, limit {} s)",
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
