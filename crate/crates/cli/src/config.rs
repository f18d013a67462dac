//! Run configuration: JSON file plus dotted command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use boundedflow::catalog::Catalog;
use boundedflow::function_core::Grid;
use boundedflow::maps::{EstimatorConfig, HypothesisConstants};
use boundedflow::solver::{Problem, SolverConfig, SolverTolerances};

use crate::CliError;

/// A built-in problem id or an inline problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Id(String),
    Inline(Box<Problem>),
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self::Id("c2pi".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttractConfig {
    pub perturbations: Vec<f64>,
    pub horizon: f64,
    pub h: f64,
    pub slack: f64,
}

impl Default for AttractConfig {
    fn default() -> Self {
        Self {
            perturbations: vec![0.1, -0.1, 0.3],
            horizon: 20.0,
            h: 1e-3,
            slack: boundedflow::attractivity::DEFAULT_DECAY_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Replaces the declared constants of the problem.
    pub constants: Option<HypothesisConstants>,
    /// Defaults to the built-in problem's grid, or `[-20, 20]` with 4001
    /// nodes for inline problems.
    pub grid: Option<Grid>,
    pub tolerances: SolverTolerances,
    pub max_iter: usize,
    pub damping: f64,
    pub attract: AttractConfig,
    /// Probe settings for the hypothesis estimators; the seed is taken from
    /// `seed`.
    pub estimator: EstimatorConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::new(default_grid());
        Self {
            problem: ProblemSpec::default(),
            constants: None,
            grid: None,
            tolerances: solver.tolerances,
            max_iter: solver.max_iter,
            damping: solver.damping,
            attract: AttractConfig::default(),
            estimator: EstimatorConfig::default(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn default_grid() -> Grid {
    Grid { t0: -20.0, t1: 20.0, n: 4001 }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Sets one field by dotted key, e.g. `grid.n` or `tol.step`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let grid = |c: &mut Self| -> Result<Grid, CliError> { c.resolved_grid() };
        match key {
            "problem" => self.problem = ProblemSpec::Id(value.to_string()),
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "max_iter" | "max-iter" => self.max_iter = parse(key, value)?,
            "damping" => self.damping = parse(key, value)?,
            "grid.t0" => self.grid = Some(Grid { t0: parse(key, value)?, ..grid(self)? }),
            "grid.t1" => self.grid = Some(Grid { t1: parse(key, value)?, ..grid(self)? }),
            "grid.n" => self.grid = Some(Grid { n: parse(key, value)?, ..grid(self)? }),
            "tol.tail" | "tol.tail_tol" => self.tolerances.tail_tol = parse(key, value)?,
            "tol.quad" | "tol.quad_tol" => self.tolerances.quad_tol = parse(key, value)?,
            "tol.step" | "tol.step_tol" => self.tolerances.step_tol = parse(key, value)?,
            "tol.residual" | "tol.residual_tol" => self.tolerances.residual_tol = parse(key, value)?,
            "tol.slack" => self.tolerances.slack = parse(key, value)?,
            "tol.box" | "tol.box_slack" => self.tolerances.box_slack = parse(key, value)?,
            "attract.horizon" => self.attract.horizon = parse(key, value)?,
            "attract.h" => self.attract.h = parse(key, value)?,
            "attract.slack" => self.attract.slack = parse(key, value)?,
            "attract.perturbations" => {
                self.attract.perturbations = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_, _>>()?;
            }
            "estimator.t0" => self.estimator.t0 = parse(key, value)?,
            "estimator.t1" => self.estimator.t1 = parse(key, value)?,
            "estimator.n_samples" => self.estimator.n_samples = parse(key, value)?,
            "estimator.n_probes" => self.estimator.n_probes = parse(key, value)?,
            "estimator.n_pairs" => self.estimator.n_pairs = parse(key, value)?,
            "estimator.quad_tol" => self.estimator.quad_tol = parse(key, value)?,
            _ => {
                let Some(name) = key.strip_prefix("constants.") else {
                    return Err(CliError::Config(format!("unknown setting `{key}`")));
                };
                let mut c = self.problem()?.constants;
                let v = parse(key, value)?;
                match name {
                    "l" => c.l = v,
                    "k" => c.k = v,
                    "M" | "m" => c.m = v,
                    "r" => c.r = v,
                    "L_F" | "lip_f" => c.lip_f = v,
                    "L_G" | "lip_g" => c.lip_g = v,
                    _ => return Err(CliError::Config(format!("unknown constant `{name}`"))),
                }
                self.constants = Some(c);
            }
        }
        Ok(())
    }

    pub fn problem_id(&self) -> &str {
        match &self.problem {
            ProblemSpec::Id(id) => id,
            ProblemSpec::Inline(_) => "inline",
        }
    }

    /// The problem with any constants override applied.
    pub fn problem(&self) -> Result<Problem, CliError> {
        let mut p = match &self.problem {
            ProblemSpec::Id(id) => Catalog::builtin().get(id).map_err(config_error)?.build(),
            ProblemSpec::Inline(p) => (**p).clone(),
        };
        if let Some(c) = self.constants {
            p.constants = c;
        }
        p.validate().map_err(config_error)?;
        Ok(p)
    }

    pub fn resolved_grid(&self) -> Result<Grid, CliError> {
        if let Some(g) = self.grid {
            return Ok(g);
        }
        Ok(match &self.problem {
            ProblemSpec::Id(id) => Catalog::builtin().get(id).map_err(config_error)?.default_grid(),
            ProblemSpec::Inline(_) => default_grid(),
        })
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            grid: self.resolved_grid()?,
            tolerances: self.tolerances,
            max_iter: self.max_iter,
            damping: self.damping,
        };
        cfg.validate().map_err(config_error)?;
        Ok(cfg)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig { seed: self.seed, ..self.estimator }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.problem()?;
        self.solver()?;
        let a = &self.attract;
        let ok = a.horizon > 0.0 && a.h > 0.0 && a.slack >= 0.0 && a.perturbations.iter().all(|d| d.is_finite());
        if !ok {
            return Err(CliError::Config(format!("invalid attract settings {a:?}")));
        }
        Ok(())
    }
}

fn config_error(e: boundedflow::Error) -> CliError {
    CliError::Config(e.to_string())
}
