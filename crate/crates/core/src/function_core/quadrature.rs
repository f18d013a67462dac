//! Composite Simpson rule with step halving.
//!
//! The panel count doubles until two successive estimates agree; the
//! Richardson difference `|S(h/2) - S(h)| / 15` serves as the error estimate.

use crate::error::{Error, Result};

pub const DEFAULT_INITIAL_PANELS: usize = 16;
pub const DEFAULT_MAX_PANELS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    simpson_with(f, a, b, tol, DEFAULT_INITIAL_PANELS, DEFAULT_MAX_PANELS)
}

pub fn simpson_with(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    initial_panels: usize,
    max_panels: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, panels: 0 });
    }
    let checked = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t, value: v })
        }
    };
    let mut panels = initial_panels.max(2);
    panels += panels % 2;
    let width = b - a;
    let ends = checked(a)? + checked(b)?;
    let h = width / panels as f64;
    let (mut odd, mut even) = (0.0, 0.0);
    for i in 1..panels {
        let v = checked(a + i as f64 * h)?;
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    loop {
        let next_panels = panels * 2;
        if next_panels > max_panels {
            return Err(Error::Tolerance { requested: tol, achieved: f64::INFINITY });
        }
        let next_h = width / next_panels as f64;
        let mut mids = 0.0;
        for i in 0..panels {
            mids += checked(a + (2 * i + 1) as f64 * next_h)?;
        }
        even += odd;
        odd = mids;
        let next = next_h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        let err = (next - estimate).abs() / 15.0;
        panels = next_panels;
        estimate = next;
        if err <= tol {
            return Ok(Quadrature { value: estimate, error_estimate: err, panels });
        }
        if panels * 2 > max_panels {
            return Err(Error::Tolerance { requested: tol, achieved: err });
        }
    }
}

/// Composite Simpson sum over equally spaced samples; `samples.len()` must be odd.
#[inline]
pub fn simpson_samples(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    debug_assert!(n % 2 == 1);
    if n < 3 {
        return 0.0;
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in samples[1..n - 1].iter().enumerate() {
        if i % 2 == 0 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (samples[0] + samples[n - 1] + 4.0 * odd + 2.0 * even)
}
