use std::fmt;
use std::sync::Arc;

use statrs::function::erf::erfc;

use crate::error::{ensure, Result};

/// An integrable kernel with compact (or truncated) support `[-radius, radius]`.
///
/// `tail_tol` bounds the mass discarded on each side when an infinite-support
/// kernel is truncated; it is zero for compactly supported shapes.
#[derive(Clone)]
pub struct L1Kernel {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    l1_norm: f64,
    radius: f64,
    tail_tol: f64,
}

impl fmt::Debug for L1Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("L1Kernel")
            .field("l1_norm", &self.l1_norm)
            .field("radius", &self.radius)
            .field("tail_tol", &self.tail_tol)
            .finish_non_exhaustive()
    }
}

impl L1Kernel {
    pub fn custom(
        l1_norm: f64,
        radius: f64,
        tail_tol: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        ensure(radius > 0.0 && radius.is_finite(), || {
            format!("kernel radius must be positive and finite, got {radius}")
        })?;
        ensure(l1_norm >= 0.0 && tail_tol >= 0.0, || {
            format!("kernel norm and tail tolerance must be >= 0, got {l1_norm}, {tail_tol}")
        })?;
        Ok(Self { eval: Arc::new(eval), l1_norm, radius, tail_tol })
    }

    /// Hat function of half-width `radius` with integral `mass`.
    pub fn triangular(radius: f64, mass: f64) -> Result<Self> {
        let peak = mass / radius;
        Self::custom(mass.abs(), radius, 0.0, move |u| {
            let a = 1.0 - u.abs() / radius;
            if a > 0.0 {
                peak * a
            } else {
                0.0
            }
        })
    }

    /// Indicator of `[-half_width, half_width]` scaled to integral `mass`.
    pub fn boxcar(half_width: f64, mass: f64) -> Result<Self> {
        let height = mass / (2.0 * half_width);
        Self::custom(mass.abs(), half_width, 0.0, move |u| {
            if u.abs() <= half_width {
                height
            } else {
                0.0
            }
        })
    }

    /// Normal density with standard deviation `sigma`, scaled to integral
    /// `mass` and cut at the radius where each tail holds at most `tail_tol`.
    pub fn gaussian(sigma: f64, mass: f64, tail_tol: f64) -> Result<Self> {
        ensure(sigma > 0.0 && tail_tol > 0.0, || {
            format!("gaussian kernel needs sigma > 0 and tail_tol > 0, got {sigma}, {tail_tol}")
        })?;
        let one_side = |r: f64| 0.5 * mass.abs() * erfc(r / (sigma * std::f64::consts::SQRT_2));
        let mut radius = sigma;
        while one_side(radius) > tail_tol {
            radius += 0.25 * sigma;
        }
        let norm = mass / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let r = radius;
        Self::custom(mass.abs(), radius, tail_tol, move |u| {
            if u.abs() <= r {
                norm * (-0.5 * (u / sigma).powi(2)).exp()
            } else {
                0.0
            }
        })
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }
}
