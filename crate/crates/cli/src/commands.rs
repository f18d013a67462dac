//! The four pipelines. Each writes its artifacts plus `manifest.json` into
//! the output directory and returns the exit status.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use boundedflow::attractivity::attract_experiment;
use boundedflow::function_core::Grid;
use boundedflow::solver::{solve_picard, SolveReport};

use crate::config::RunConfig;
use crate::hypotheses::run_hypotheses;
use crate::output::{write_csv, write_json};
use crate::verify::run_verify;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub pass: bool,
}

/// Config echo, versions, stage timings and one entry per executed check.
/// Timings make this file the only non-reproducible artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config: RunConfig,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub timings: Vec<Timing>,
    pub checks: Vec<CheckSummary>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Run {
    command: &'static str,
    config: RunConfig,
    timings: Vec<Timing>,
    checks: Vec<CheckSummary>,
    files: Vec<PathBuf>,
}

impl Run {
    fn new(command: &'static str, config: &RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        Ok(Self { command, config: config.clone(), timings: Vec::new(), checks: Vec::new(), files: Vec::new() })
    }

    fn timed<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing { stage, seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn check(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(CheckSummary { name: name.into(), pass });
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = write_json(&self.config.out, name, value)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, exit_code: i32, summary: String) -> Result<Outcome, CliError> {
        let versions = BTreeMap::from([
            ("boundedflow", boundedflow::VERSION),
            ("boundedflow-cli", env!("CARGO_PKG_VERSION")),
        ]);
        let manifest = RunManifest {
            command: self.command,
            config: self.config.clone(),
            versions,
            timings: std::mem::take(&mut self.timings),
            checks: std::mem::take(&mut self.checks),
            exit_code,
        };
        self.json("manifest.json", &manifest)?;
        Ok(Outcome { exit_code, summary, files: self.files })
    }
}

#[derive(Serialize)]
struct SolveArtifact<'a> {
    problem: &'a str,
    grid: Grid,
    #[serde(flatten)]
    report: &'a SolveReport,
}

/// `solution.csv` and `report.json`. Exit 3 when iterates leave the
/// declared box, 4 when not converged, 0 otherwise.
pub fn cmd_solve(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut run = Run::new("solve", config)?;
    let p = config.problem()?;
    let solver = config.solver()?;
    let report = run.timed("solve", || Ok(solve_picard(&p, &solver, None)?))?;
    let x = &report.solution;
    let rows = (0..x.len()).map(|i| vec![x.node(i), x.values()[i]]);
    run.files.push(write_csv(&config.out, "solution.csv", &["t".into(), "x".into()], rows)?);
    run.json("report.json", &SolveArtifact { problem: config.problem_id(), grid: solver.grid, report: &report })?;

    let in_box = report.box_violation <= solver.tolerances.box_slack;
    let residual_ok = report.residual <= solver.tolerances.residual_tol;
    run.check("converged", report.converged);
    run.check("residual", residual_ok);
    run.check("box", in_box);
    let exit_code = if !in_box {
        3
    } else if !report.converged || !residual_ok {
        4
    } else {
        0
    };
    let summary = format!(
        "{}: {} iterations, converged {}, residual {:e}, iterates in [{}, {}], q = {}",
        config.problem_id(),
        report.iterations,
        report.converged,
        report.residual,
        report.iterate_min,
        report.iterate_max,
        report.contraction_factor
    );
    run.finish(exit_code, summary)
}

/// `verify.json` with one entry per operator check on the fixed corpus.
pub fn cmd_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut run = Run::new("verify", config)?;
    let report = run.timed("verify", || run_verify(config.seed))?;
    for c in &report.checks {
        run.check(c.name.clone(), c.pass);
    }
    run.json("verify.json", &report)?;
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    let summary = format!("{} checks, {failed} failed", report.checks.len());
    run.finish(if report.all_pass { 0 } else { 3 }, summary)
}

#[derive(Serialize)]
struct AttractArtifact<'a> {
    problem: &'a str,
    horizon: f64,
    h: f64,
    #[serde(flatten)]
    report: &'a boundedflow::attractivity::AttractReport,
}

/// `trajectories.csv` and `attract.json`. Exit 3 when `λ <= 0` or any
/// decay check fails.
pub fn cmd_attract(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut run = Run::new("attract", config)?;
    let p = config.problem()?;
    let solver = config.solver()?;
    let a = &config.attract;
    let report =
        run.timed("attract", || Ok(attract_experiment(&p, &solver, &a.perturbations, a.horizon, a.h, a.slack)?))?;

    let steps = (a.horizon / a.h).round().max(1.0) as usize;
    let mut header = vec!["t".to_string(), "x_star".to_string()];
    header.extend((0..report.trajectories.len()).map(|i| format!("x_delta_{i}")));
    let x_star = &report.solve.solution;
    let rows = (0..=steps).map(|i| {
        let t = i as f64 * a.h;
        let mut row = vec![t, x_star.eval(t)];
        row.extend(report.trajectories.iter().map(|tr| tr.states[i]));
        row
    });
    run.files.push(write_csv(&config.out, "trajectories.csv", &header, rows)?);
    run.json("attract.json", &AttractArtifact { problem: config.problem_id(), horizon: a.horizon, h: a.h, report: &report })?;
    for (d, r) in report.perturbations.iter().zip(&report.reports) {
        run.check(format!("decay/{d}"), r.pass);
    }
    let summary = format!(
        "{}: lambda = {}, {} of {} perturbations pass",
        config.problem_id(),
        report.lambda,
        report.reports.iter().filter(|r| r.pass).count(),
        report.reports.len()
    );
    run.finish(if report.all_pass() { 0 } else { 3 }, summary)
}

/// `hypotheses.json`. Exit 3 unless every declared constant dominates its
/// estimate and the ratio box check passes.
pub fn cmd_hypotheses(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut run = Run::new("hypotheses", config)?;
    let p = config.problem()?;
    let est = config.estimator();
    let report = run.timed("hypotheses", || run_hypotheses(config.problem_id(), &p, &est))?;
    for c in &report.checks {
        run.check(c.name, c.dominates);
    }
    run.check("box", report.box_check.pass);
    run.json("hypotheses.json", &report)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.dominates).map(|c| c.name).collect();
    let summary = format!(
        "{}: q = {}, lambda = {}, box {}, failing constants {:?}",
        config.problem_id(),
        report.contraction_factor,
        report.attractivity_rate,
        if report.box_check.pass { "holds" } else { "fails" },
        failed
    );
    run.finish(if report.all_dominate { 0 } else { 3 }, summary)
}
