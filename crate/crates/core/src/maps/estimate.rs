//! Sampling estimators for the constants of a map on a box.
//!
//! All estimates are one-sided: sampled infima are upper bounds of the true
//! infimum and sampled Lipschitz quotients are lower bounds of the true
//! constant. They are reported next to declared analytic constants and never
//! replace them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descriptor::MapDescriptor;
use crate::error::{ensure, Error, Result};
use crate::function_core::{BoundedFunction, Extension, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub t0: f64,
    pub t1: f64,
    pub n_samples: usize,
    pub n_probes: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub quad_tol: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            t0: -10.0,
            t1: 10.0,
            n_samples: 201,
            n_probes: 64,
            n_pairs: 200,
            seed: 0,
            quad_tol: 1e-10,
        }
    }
}

impl EstimatorConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.t0 < self.t1 && self.n_samples >= 2, || {
            format!("estimator window [{}, {}] with {} samples", self.t0, self.t1, self.n_samples)
        })
    }

    fn samples(&self) -> Vec<f64> {
        let h = (self.t1 - self.t0) / (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|i| self.t0 + i as f64 * h).collect()
    }
}

fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

fn random_trig(rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<(f64, f64, f64)> {
    let terms = rng.gen_range(1..=3);
    (0..terms)
        .map(|_| {
            (
                rng.gen_range(0.0..=amplitude),
                rng.gen_range(0.1..=5.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

fn trig_eval(terms: &[(f64, f64, f64)], t: f64) -> f64 {
    terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum()
}

/// Box-valued probe functions: the constants `k`, `M` and `(k + M) / 2`
/// first, then alternating clipped trigonometric polynomials and clipped
/// random grid functions on `[span.0, span.1]`.
pub fn probes(k: f64, m: f64, span: (f64, f64), count: usize, seed: u64) -> Vec<BoundedFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    probes_from(&mut rng, k, m, span, count)
}

fn probes_from(
    rng: &mut ChaCha8Rng,
    k: f64,
    m: f64,
    span: (f64, f64),
    count: usize,
) -> Vec<BoundedFunction> {
    let bound = k.abs().max(m.abs());
    let mut out: Vec<BoundedFunction> =
        [k, m, 0.5 * (k + m)].into_iter().take(count).map(BoundedFunction::constant).collect();
    while out.len() < count {
        if m == k {
            out.push(BoundedFunction::constant(k));
        } else if out.len() % 2 == 1 {
            let center = rng.gen_range(k..=m);
            let terms = random_trig(rng, 0.5 * (m - k));
            out.push(BoundedFunction::closed_form(bound, move |t| {
                clip(center + trig_eval(&terms, t), k, m)
            }));
        } else {
            let nodes = rng.gen_range(8..=64);
            let values: Vec<f64> = (0..nodes).map(|_| rng.gen_range(k..=m)).collect();
            let g = GridFunction::new(span.0, span.1, values, Extension::ClampEndpoint)
                .expect("probe grid is valid");
            out.push(BoundedFunction::closed_form(bound, move |t| clip(g.eval(t), k, m)));
        }
    }
    out
}

/// Region on which `x` must be known to evaluate `m(x)` on the window.
fn read_span(m: &MapDescriptor, cfg: &EstimatorConfig) -> Result<(f64, f64)> {
    let reach = m.reach()?;
    let (lo, hi) = if m.is_pointwise_only() {
        (cfg.t0, cfg.t1)
    } else {
        (cfg.t0.min(0.0), cfg.t1.max(1.0))
    };
    Ok((lo - reach, hi + reach))
}

fn sampled(f: &BoundedFunction, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter().map(|&t| f.eval(t)).collect()
}

/// Smallest sampled value of `m(x)(t)` over box-valued probes `x`.
pub fn estimate_inf(m: &MapDescriptor, k: f64, big_m: f64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    ensure(k <= big_m, || format!("need k <= M, got {k}, {big_m}"))?;
    let span = read_span(m, cfg)?;
    let ts = cfg.samples();
    let mins = probes(k, big_m, span, cfg.n_probes.max(1), cfg.seed)
        .par_iter()
        .map(|x| {
            let y = m.apply(x, cfg.quad_tol)?;
            Ok(sampled(&y, &ts)?.into_iter().fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Largest sampled quotient `‖m(x) - m(y)‖ / ‖x - y‖` over random probe
/// pairs: half independent, half small box-clipped perturbations.
pub fn estimate_lipschitz(
    m: &MapDescriptor,
    k: f64,
    big_m: f64,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    cfg.validate()?;
    ensure(cfg.n_pairs >= 2, || format!("need at least 2 pairs, got {}", cfg.n_pairs))?;
    ensure(k <= big_m, || format!("need k <= M, got {k}, {big_m}"))?;
    if k == big_m {
        return Ok(0.0);
    }
    let span = read_span(m, cfg)?;
    let ts = cfg.samples();
    // Denominator samples include the numerator samples, so pointwise maps
    // are dominated exactly.
    let fine = ((span.1 - span.0) / 2e-3).ceil() as usize;
    let mut den_ts: Vec<f64> =
        (0..=fine).map(|i| span.0 + (span.1 - span.0) * i as f64 / fine as f64).collect();
    den_ts.extend_from_slice(&ts);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(cfg.n_pairs);
    let pool = probes_from(&mut rng, k, big_m, span, cfg.n_pairs);
    for (i, x) in pool.iter().enumerate() {
        if i % 2 == 0 {
            let j = rng.gen_range(0..pool.len());
            pairs.push((x.clone(), pool[j].clone()));
        } else {
            let eps = (big_m - k) * 10f64.powf(rng.gen_range(-3.0..=-1.0));
            let terms = random_trig(&mut rng, eps);
            let base = x.clone();
            let y = BoundedFunction::closed_form(x.sup_bound(), move |t| {
                clip(base.value(t) + trig_eval(&terms, t), k, big_m)
            });
            pairs.push((x.clone(), y));
        }
    }

    let quotients = pairs
        .par_iter()
        .map(|(x, y)| {
            let den = den_ts
                .iter()
                .map(|&t| (x.value(t) - y.value(t)).abs())
                .fold(0.0, f64::max);
            if den == 0.0 {
                return Ok(None);
            }
            let (mx, my) = (m.apply(x, cfg.quad_tol)?, m.apply(y, cfg.quad_tol)?);
            let num = sampled(&mx, &ts)?
                .into_iter()
                .zip(sampled(&my, &ts)?)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(Some(num / den))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    Ok(quotients.into_iter().flatten().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxReport {
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub probes: usize,
    pub pass: bool,
}

/// Checks `k <= F(x)(t) / G(x)(t) <= M` for probes `x` valued in `[k, M]`.
pub fn verify_box(
    f: &MapDescriptor,
    g: &MapDescriptor,
    k: f64,
    m: f64,
    cfg: &EstimatorConfig,
) -> Result<BoxReport> {
    verify_ratio(f, g, (k, m), (k, m), cfg)
}

/// Probes take values in `probe_box`; the ratio `F / G` is compared with
/// `ratio_box`. The two differ for the reversed-sign equation, whose
/// solutions live in `[-M, -k]`.
pub fn verify_ratio(
    f: &MapDescriptor,
    g: &MapDescriptor,
    probe_box: (f64, f64),
    ratio_box: (f64, f64),
    cfg: &EstimatorConfig,
) -> Result<BoxReport> {
    cfg.validate()?;
    let (k, m) = ratio_box;
    ensure(k <= m && probe_box.0 <= probe_box.1, || {
        format!("need ordered boxes, got {probe_box:?} and {ratio_box:?}")
    })?;
    let rf = read_span(f, cfg)?;
    let rg = read_span(g, cfg)?;
    let span = (rf.0.min(rg.0), rf.1.max(rg.1));
    let ts = cfg.samples();
    let xs = probes(probe_box.0, probe_box.1, span, cfg.n_probes.max(1), cfg.seed);
    let ranges = xs
        .par_iter()
        .map(|x| {
            let fv = sampled(&f.apply(x, cfg.quad_tol)?, &ts)?;
            let gv = sampled(&g.apply(x, cfg.quad_tol)?, &ts)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for ((t, a), b) in ts.iter().zip(fv).zip(gv) {
                if b <= 0.0 {
                    return Err(Error::HypothesisViolation(format!(
                        "G(x, t) = {b} <= 0 at t = {t}"
                    )));
                }
                lo = lo.min(a / b);
                hi = hi.max(a / b);
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio_min = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let ratio_max = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * (1.0 + k.abs().max(m.abs()));
    Ok(BoxReport {
        k,
        m,
        ratio_min,
        ratio_max,
        probes: xs.len(),
        pass: ratio_min >= k - slack && ratio_max <= m + slack,
    })
}
