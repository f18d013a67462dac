//! Declared constants of a problem against sampled estimates.

use serde::Serialize;

use boundedflow::maps::{
    attractivity_rate, contraction_factor, estimate_inf, estimate_lipschitz, verify_ratio,
    BoxReport, EstimatorConfig, HypothesisConstants, MapDescriptor,
};
use boundedflow::solver::{Problem, Sign};
use boundedflow::Error;

use crate::CliError;

/// Relative slack when comparing declared constants with sampled values.
pub const DOMINANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCheck {
    pub name: &'static str,
    pub declared: f64,
    pub estimated: f64,
    /// Bound propagated through the descriptor tree, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagated: Option<f64>,
    /// `"declared <= estimated"` for lower bounds, `"declared >= estimated"`
    /// for upper bounds.
    pub relation: &'static str,
    pub dominates: bool,
}

impl ConstantCheck {
    fn lower(name: &'static str, declared: f64, estimated: f64) -> Self {
        let dominates = declared <= estimated + DOMINANCE_SLACK * (1.0 + estimated.abs());
        Self { name, declared, estimated, propagated: None, relation: "declared <= estimated", dominates }
    }

    fn upper(name: &'static str, declared: f64, estimated: f64, propagated: Option<f64>) -> Self {
        let dominates = declared * (1.0 + DOMINANCE_SLACK) + DOMINANCE_SLACK >= estimated;
        Self { name, declared, estimated, propagated, relation: "declared >= estimated", dominates }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCheck {
    pub probe_box: (f64, f64),
    pub ratio_box: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoxReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesesReport {
    pub problem: String,
    pub constants: HypothesisConstants,
    pub contraction_factor: f64,
    pub contraction: bool,
    pub attractivity_rate: f64,
    pub attractivity: bool,
    pub checks: Vec<ConstantCheck>,
    #[serde(rename = "box")]
    pub box_check: BoxCheck,
    pub estimator: EstimatorConfig,
    pub all_dominate: bool,
}

/// `sup |m(x)(t)|` over the probes, through the infima of `m` and `-m`.
fn estimate_sup_abs(m: &MapDescriptor, lo: f64, hi: f64, cfg: &EstimatorConfig) -> boundedflow::Result<f64> {
    let min = estimate_inf(m, lo, hi, cfg)?;
    let max = -estimate_inf(&MapDescriptor::scale(-1.0, m.clone()), lo, hi, cfg)?;
    Ok(min.abs().max(max.abs()))
}

pub fn run_hypotheses(id: &str, p: &Problem, cfg: &EstimatorConfig) -> Result<HypothesesReport, CliError> {
    let c = p.constants;
    let (lo, hi) = p.solution_box();
    let b = c.input_bound().max(lo.abs()).max(hi.abs());
    let inf_g = estimate_inf(&p.g, lo, hi, cfg)?;
    let sup_f = estimate_sup_abs(&p.f, lo, hi, cfg)?;
    let lip_f = estimate_lipschitz(&p.f, lo, hi, cfg)?;
    let lip_g = estimate_lipschitz(&p.g, lo, hi, cfg)?;
    let checks = vec![
        ConstantCheck::lower("l", c.l, inf_g),
        ConstantCheck::upper("r", c.r, sup_f, Some(p.f.bounds(b)?.sup)),
        ConstantCheck::upper("L_F", c.lip_f, lip_f, Some(p.f.bounds(b)?.lipschitz)),
        ConstantCheck::upper("L_G", c.lip_g, lip_g, Some(p.g.bounds(b)?.lipschitz)),
    ];
    let ratio_box = (c.k, c.m);
    let probe_box = match p.sign {
        Sign::PlusG => ratio_box,
        Sign::MinusG => (-c.m, -c.k),
    };
    let box_check = match verify_ratio(&p.f, &p.g, probe_box, ratio_box, cfg) {
        Ok(r) => BoxCheck { probe_box, ratio_box, pass: r.pass, report: Some(r), error: None },
        Err(Error::HypothesisViolation(m)) => {
            BoxCheck { probe_box, ratio_box, report: None, error: Some(m), pass: false }
        }
        Err(e) => return Err(e.into()),
    };
    let all_dominate = checks.iter().all(|c| c.dominates) && box_check.pass;
    let q = contraction_factor(&c);
    let lambda = attractivity_rate(&c);
    Ok(HypothesesReport {
        problem: id.to_string(),
        constants: c,
        contraction_factor: q,
        contraction: q < 1.0,
        attractivity_rate: lambda,
        attractivity: lambda > 0.0 && p.is_pointwise_only(),
        checks,
        box_check,
        estimator: *cfg,
        all_dominate,
    })
}
