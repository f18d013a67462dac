use super::bounded::BoundedFunction;
use super::kernel::L1Kernel;
use super::quadrature::simpson;
use crate::error::{ensure, Error, Result};

/// Max of `|f|` over `n` uniform samples of `[t0, t1]`: an empirical lower
/// bound for the sup norm.
pub fn sup_norm_estimate(f: &BoundedFunction, t0: f64, t1: f64, n: usize) -> Result<f64> {
    ensure(t0 < t1 && n >= 2, || format!("need t0 < t1 and n >= 2, got [{t0}, {t1}], n = {n}"))?;
    let h = (t1 - t0) / (n - 1) as f64;
    let mut best = 0.0_f64;
    for i in 0..n {
        best = best.max(f.eval(t0 + i as f64 * h)?.abs());
    }
    Ok(best)
}

/// `(x * alpha)(t) = ∫ x(s) alpha(s - t) ds`.
///
/// The sign convention is the reflected one: the kernel is evaluated at
/// `s - t`, not `t - s`. For even kernels the two agree.
pub fn convolve(x: &BoundedFunction, alpha: &L1Kernel, t: f64, quad_tol: f64) -> Result<f64> {
    let r = alpha.radius();
    Ok(simpson(|s| x.value(s) * alpha.value(s - t), t - r, t + r, quad_tol)?.value)
}

/// `∫_0^1 |x(s)| ds`.
pub fn seminorm_01(x: &BoundedFunction, quad_tol: f64) -> Result<f64> {
    Ok(simpson(|s| x.value(s).abs(), 0.0, 1.0, quad_tol)?.value)
}

/// `(1 / 2r) ∫_{-r}^{r} |g(t)| dt`; the tolerance applies to the mean.
pub fn ergodic_mean(g: &BoundedFunction, r: f64, quad_tol: f64) -> Result<f64> {
    ensure(r > 0.0, || format!("ergodic mean needs r > 0, got {r}"))?;
    let q = simpson(|t| g.value(t).abs(), -r, r, quad_tol * 2.0 * r)?;
    Ok(q.value / (2.0 * r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodScan {
    pub eps: f64,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_step: f64,
    /// Translations are tested at `samples` points of `[-window, window]`.
    pub window: f64,
    pub samples: usize,
}

/// Smallest scanned `tau` with `max_t |f(t + tau) - f(t)| < eps` at the
/// sample points. Finding one is a necessary condition for almost
/// periodicity, nothing more.
pub fn epsilon_period_search(f: &BoundedFunction, scan: &PeriodScan) -> Result<Option<f64>> {
    let PeriodScan { eps, scan_lo, scan_hi, scan_step, window, samples } = *scan;
    ensure(eps > 0.0 && scan_lo < scan_hi && window > 0.0 && scan_step > 0.0 && samples >= 2, || {
        format!("invalid period scan {scan:?}")
    })?;
    let dt = 2.0 * window / (samples - 1) as f64;
    let ts: Vec<f64> = (0..samples).map(|i| -window + i as f64 * dt).collect();
    let base = ts.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>>>()?;
    let steps = ((scan_hi - scan_lo) / scan_step).floor() as usize;
    for k in 0..=steps {
        let tau = scan_lo + k as f64 * scan_step;
        let mut ok = true;
        for (t, v) in ts.iter().zip(&base) {
            let shifted = f.value(t + tau);
            if !shifted.is_finite() {
                return Err(Error::Evaluation { t: t + tau, value: shifted });
            }
            if (shifted - v).abs() >= eps {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(tau));
        }
    }
    Ok(None)
}

/// `max |f(t + w) - f(t)|` over `n` uniform samples `t` of `[t0, t1]`.
pub fn period_defect(f: impl Fn(f64) -> f64, w: f64, t0: f64, t1: f64, n: usize) -> f64 {
    let h = (t1 - t0) / (n.max(2) - 1) as f64;
    (0..n).map(|i| t0 + i as f64 * h).map(|t| (f(t + w) - f(t)).abs()).fold(0.0, f64::max)
}
