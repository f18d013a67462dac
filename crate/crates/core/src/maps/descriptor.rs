use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::scalar::{lookup_scalar_fn, ScalarFn};
use super::time_fn::TimeFunction;
use crate::error::{Error, Result};
use crate::function_core::{convolve, seminorm_01, BoundedFunction, L1Kernel};

fn identity() -> String {
    "identity".to_string()
}

fn unit_weight() -> TimeFunction {
    TimeFunction::constant(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Triangular { radius: f64, mass: f64 },
    Boxcar { half_width: f64, mass: f64 },
    Gaussian { sigma: f64, mass: f64, tail_tol: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<L1Kernel> {
        match *self {
            Self::Triangular { radius, mass } => L1Kernel::triangular(radius, mass),
            Self::Boxcar { half_width, mass } => L1Kernel::boxcar(half_width, mass),
            Self::Gaussian { sigma, mass, tail_tol } => L1Kernel::gaussian(sigma, mass, tail_tol),
        }
    }
}

/// Expression tree for a map `x -> m(x)` between bounded functions.
///
/// Leaves may carry declared constants; when present they replace the
/// propagated ones for that leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    /// `t -> value(t)`, independent of `x`.
    Const { value: TimeFunction },
    /// `t -> weight(t) · post(x(t))`
    Pointwise {
        post: String,
        #[serde(default = "unit_weight")]
        weight: TimeFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
    /// `t -> weight(t) · post((x * kernel)(t))`
    Convolution {
        kernel: KernelSpec,
        #[serde(default = "identity")]
        post: String,
        #[serde(default = "unit_weight")]
        weight: TimeFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
    /// `t -> post(∫_0^1 |x(s)| ds)`
    Seminorm01 {
        #[serde(default = "identity")]
        post: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
    Sum { terms: Vec<MapDescriptor> },
    Product { factors: Vec<MapDescriptor> },
    Exp { arg: Box<MapDescriptor> },
    Scale { factor: f64, arg: Box<MapDescriptor> },
}

/// Sup bound of `m(x)` and Lipschitz constant of `m` (sup norm to sup
/// norm) over inputs with `‖x‖∞ <= B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapBounds {
    pub sup: f64,
    pub lipschitz: f64,
}

impl MapDescriptor {
    pub fn constant(c: f64) -> Self {
        Self::Const { value: TimeFunction::constant(c) }
    }

    pub fn time(value: TimeFunction) -> Self {
        Self::Const { value }
    }

    pub fn pointwise(post: &str, weight: TimeFunction) -> Self {
        Self::Pointwise { post: post.to_string(), weight, lipschitz: None, sup_bound: None }
    }

    pub fn convolution(kernel: KernelSpec, post: &str, weight: TimeFunction) -> Self {
        Self::Convolution {
            kernel,
            post: post.to_string(),
            weight,
            lipschitz: None,
            sup_bound: None,
        }
    }

    pub fn seminorm(post: &str) -> Self {
        Self::Seminorm01 { post: post.to_string(), lipschitz: None, sup_bound: None }
    }

    pub fn sum(terms: Vec<MapDescriptor>) -> Self {
        Self::Sum { terms }
    }

    pub fn product(factors: Vec<MapDescriptor>) -> Self {
        Self::Product { factors }
    }

    pub fn exp(arg: MapDescriptor) -> Self {
        Self::Exp { arg: Box::new(arg) }
    }

    pub fn scale(factor: f64, arg: MapDescriptor) -> Self {
        Self::Scale { factor, arg: Box::new(arg) }
    }

    /// True when `m(x)(t)` depends only on `x(t)` and `t`.
    pub fn is_pointwise_only(&self) -> bool {
        match self {
            Self::Const { .. } | Self::Pointwise { .. } => true,
            Self::Convolution { .. } | Self::Seminorm01 { .. } => false,
            Self::Sum { terms } => terms.iter().all(Self::is_pointwise_only),
            Self::Product { factors } => factors.iter().all(Self::is_pointwise_only),
            Self::Exp { arg } | Self::Scale { arg, .. } => arg.is_pointwise_only(),
        }
    }

    /// Largest kernel radius in the tree; `m(x)(t)` reads `x` on
    /// `[t - reach, t + reach]` plus `[0, 1]` for seminorm terms.
    pub fn reach(&self) -> Result<f64> {
        Ok(match self {
            Self::Const { .. } | Self::Pointwise { .. } | Self::Seminorm01 { .. } => 0.0,
            Self::Convolution { kernel, .. } => kernel.build()?.radius(),
            Self::Sum { terms } | Self::Product { factors: terms } => {
                terms.iter().map(Self::reach).try_fold(0.0, |a, r| r.map(|r| f64::max(a, r)))?
            }
            Self::Exp { arg } | Self::Scale { arg, .. } => arg.reach()?,
        })
    }

    pub fn bounds(&self, input_bound: f64) -> Result<MapBounds> {
        let b = input_bound.abs();
        Ok(match self {
            Self::Const { value } => MapBounds { sup: value.sup_bound(), lipschitz: 0.0 },
            Self::Pointwise { post, weight, lipschitz, sup_bound } => {
                let f = lookup_scalar_fn(post)?;
                let w = weight.sup_bound();
                MapBounds {
                    sup: sup_bound.unwrap_or(w * f.sup_abs_on(b)),
                    lipschitz: lipschitz.unwrap_or(w * f.lipschitz_on(b)),
                }
            }
            Self::Convolution { kernel, post, weight, lipschitz, sup_bound } => {
                let f = lookup_scalar_fn(post)?;
                let norm = kernel.build()?.l1_norm();
                let w = weight.sup_bound();
                MapBounds {
                    sup: sup_bound.unwrap_or(w * f.sup_abs_on(b * norm)),
                    lipschitz: lipschitz.unwrap_or(w * f.lipschitz_on(b * norm) * norm),
                }
            }
            Self::Seminorm01 { post, lipschitz, sup_bound } => {
                let f = lookup_scalar_fn(post)?;
                MapBounds {
                    sup: sup_bound.unwrap_or(f.sup_abs_on(b)),
                    lipschitz: lipschitz.unwrap_or(f.lipschitz_on(b)),
                }
            }
            Self::Sum { terms } => {
                let mut acc = MapBounds { sup: 0.0, lipschitz: 0.0 };
                for t in terms {
                    let m = t.bounds(b)?;
                    acc.sup += m.sup;
                    acc.lipschitz += m.lipschitz;
                }
                acc
            }
            Self::Product { factors } => {
                let mut acc = MapBounds { sup: 1.0, lipschitz: 0.0 };
                for f in factors {
                    let m = f.bounds(b)?;
                    acc = MapBounds {
                        sup: acc.sup * m.sup,
                        lipschitz: acc.sup * m.lipschitz + m.sup * acc.lipschitz,
                    };
                }
                acc
            }
            Self::Exp { arg } => {
                let m = arg.bounds(b)?;
                let e = m.sup.exp();
                MapBounds { sup: e, lipschitz: m.lipschitz * e }
            }
            Self::Scale { factor, arg } => {
                let m = arg.bounds(b)?;
                MapBounds { sup: factor.abs() * m.sup, lipschitz: factor.abs() * m.lipschitz }
            }
        })
    }

    fn compile(&self) -> Result<Compiled> {
        Ok(match self {
            Self::Const { value } => Compiled::Time(value.clone()),
            Self::Pointwise { post, weight, .. } => {
                Compiled::Pointwise { post: lookup_scalar_fn(post)?, weight: weight.clone() }
            }
            Self::Convolution { kernel, post, weight, .. } => Compiled::Convolution {
                kernel: kernel.build()?,
                post: lookup_scalar_fn(post)?,
                weight: weight.clone(),
            },
            Self::Seminorm01 { post, .. } => Compiled::Seminorm { post: lookup_scalar_fn(post)? },
            Self::Sum { terms } => {
                Compiled::Sum(terms.iter().map(Self::compile).collect::<Result<_>>()?)
            }
            Self::Product { factors } => {
                Compiled::Product(factors.iter().map(Self::compile).collect::<Result<_>>()?)
            }
            Self::Exp { arg } => Compiled::Exp(Box::new(arg.compile()?)),
            Self::Scale { factor, arg } => Compiled::Scale(*factor, Box::new(arg.compile()?)),
        })
    }

    /// `t -> m(x)(t)`. Convolution values are cached per evaluation time.
    pub fn apply(&self, x: &BoundedFunction, quad_tol: f64) -> Result<BoundedFunction> {
        self.apply_with(x, quad_tol, true)
    }

    /// Same as [`apply`](Self::apply) with convolution caching disabled.
    pub fn apply_uncached(&self, x: &BoundedFunction, quad_tol: f64) -> Result<BoundedFunction> {
        self.apply_with(x, quad_tol, false)
    }

    fn apply_with(&self, x: &BoundedFunction, quad_tol: f64, cache: bool) -> Result<BoundedFunction> {
        let sup = self.bounds(x.sup_bound())?.sup;
        let node = Arc::new(self.compile()?.bind(x, quad_tol, cache)?);
        Ok(BoundedFunction::closed_form(sup, move |t| node.eval(t)))
    }

    /// Resolved `(v, t) -> m(v)(t)` for pointwise-only descriptors.
    pub fn pointwise_map(&self) -> Result<PointwiseMap> {
        if !self.is_pointwise_only() {
            return Err(Error::Unsupported(
                "map has nonlocal terms and no pointwise form".to_string(),
            ));
        }
        Ok(PointwiseMap { node: Arc::new(self.compile()?) })
    }
}

enum Compiled {
    Time(TimeFunction),
    Pointwise { post: Arc<dyn ScalarFn>, weight: TimeFunction },
    Convolution { kernel: L1Kernel, post: Arc<dyn ScalarFn>, weight: TimeFunction },
    Seminorm { post: Arc<dyn ScalarFn> },
    Sum(Vec<Compiled>),
    Product(Vec<Compiled>),
    Exp(Box<Compiled>),
    Scale(f64, Box<Compiled>),
}

impl Compiled {
    fn bind(self, x: &BoundedFunction, quad_tol: f64, cache: bool) -> Result<Bound> {
        let bind_all = |v: Vec<Compiled>| {
            v.into_iter().map(|c| c.bind(x, quad_tol, cache)).collect::<Result<Vec<_>>>()
        };
        Ok(match self {
            Self::Time(f) => Bound::Time(f),
            Self::Pointwise { post, weight } => Bound::Pointwise { post, weight, x: x.clone() },
            Self::Convolution { kernel, post, weight } => Bound::Convolution(ConvolutionTerm {
                x: x.clone(),
                kernel,
                post,
                weight,
                quad_tol,
                cache: cache.then(|| Mutex::new(HashMap::new())),
            }),
            Self::Seminorm { post } => {
                let v = post.eval(seminorm_01(x, quad_tol)?);
                if !v.is_finite() {
                    return Err(Error::Evaluation { t: f64::NAN, value: v });
                }
                Bound::Scalar(v)
            }
            Self::Sum(v) => Bound::Sum(bind_all(v)?),
            Self::Product(v) => Bound::Product(bind_all(v)?),
            Self::Exp(a) => Bound::Exp(Box::new(a.bind(x, quad_tol, cache)?)),
            Self::Scale(c, a) => Bound::Scale(c, Box::new(a.bind(x, quad_tol, cache)?)),
        })
    }

    fn eval_pointwise(&self, v: f64, t: f64) -> f64 {
        match self {
            Self::Time(f) => f.eval(t),
            Self::Pointwise { post, weight } => weight.eval(t) * post.eval(v),
            Self::Convolution { .. } | Self::Seminorm { .. } => f64::NAN,
            Self::Sum(v_) => v_.iter().map(|c| c.eval_pointwise(v, t)).sum(),
            Self::Product(v_) => v_.iter().map(|c| c.eval_pointwise(v, t)).product(),
            Self::Exp(a) => a.eval_pointwise(v, t).exp(),
            Self::Scale(c, a) => c * a.eval_pointwise(v, t),
        }
    }
}

struct ConvolutionTerm {
    x: BoundedFunction,
    kernel: L1Kernel,
    post: Arc<dyn ScalarFn>,
    weight: TimeFunction,
    quad_tol: f64,
    cache: Option<Mutex<HashMap<u64, f64>>>,
}

impl ConvolutionTerm {
    fn inner(&self, t: f64) -> f64 {
        let compute = || convolve(&self.x, &self.kernel, t, self.quad_tol).unwrap_or(f64::NAN);
        match &self.cache {
            None => compute(),
            Some(cache) => {
                if let Some(&v) = cache.lock().expect("cache poisoned").get(&t.to_bits()) {
                    return v;
                }
                let v = compute();
                cache.lock().expect("cache poisoned").insert(t.to_bits(), v);
                v
            }
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.weight.eval(t) * self.post.eval(self.inner(t))
    }
}

enum Bound {
    Time(TimeFunction),
    Pointwise { post: Arc<dyn ScalarFn>, weight: TimeFunction, x: BoundedFunction },
    Convolution(ConvolutionTerm),
    Scalar(f64),
    Sum(Vec<Bound>),
    Product(Vec<Bound>),
    Exp(Box<Bound>),
    Scale(f64, Box<Bound>),
}

impl Bound {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Time(f) => f.eval(t),
            Self::Pointwise { post, weight, x } => weight.eval(t) * post.eval(x.value(t)),
            Self::Convolution(c) => c.eval(t),
            Self::Scalar(v) => *v,
            Self::Sum(v) => v.iter().map(|b| b.eval(t)).sum(),
            Self::Product(v) => v.iter().map(|b| b.eval(t)).product(),
            Self::Exp(a) => a.eval(t).exp(),
            Self::Scale(c, a) => c * a.eval(t),
        }
    }
}

/// A pointwise-only map resolved to a function of `(x(t), t)`.
#[derive(Clone)]
pub struct PointwiseMap {
    node: Arc<Compiled>,
}

impl PointwiseMap {
    #[inline]
    pub fn eval(&self, v: f64, t: f64) -> f64 {
        self.node.eval_pointwise(v, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2pi_g() -> MapDescriptor {
        MapDescriptor::sum(vec![
            MapDescriptor::constant(4.0),
            MapDescriptor::product(vec![
                MapDescriptor::sum(vec![MapDescriptor::constant(1.0), MapDescriptor::seminorm("identity")]),
                MapDescriptor::time(TimeFunction::sum(vec![
                    TimeFunction::constant(1.0),
                    TimeFunction::sin(1.0, 1.0),
                ])),
            ]),
        ])
    }

    #[test]
    fn seminorm_map_at_zero() {
        let out = c2pi_g().apply(&BoundedFunction::zero(), 1e-12).unwrap();
        for t in [-3.0, 0.0, 1.7, 40.0] {
            assert!((out.eval(t).unwrap() - (5.0 + f64::sin(t))).abs() < 1e-14);
        }
    }

    #[test]
    fn propagated_constants() {
        let b = c2pi_g().bounds(0.5).unwrap();
        assert_eq!(b.lipschitz, 2.0);
        assert_eq!(b.sup, 4.0 + 1.5 * 2.0);
        let e = MapDescriptor::exp(MapDescriptor::scale(-2.0, MapDescriptor::pointwise("sin", TimeFunction::constant(1.0))));
        let b = e.bounds(10.0).unwrap();
        assert!((b.sup - 2f64.exp()).abs() < 1e-15);
        assert!((b.lipschitz - 2.0 * 2f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn declared_leaf_constants_override() {
        let m = MapDescriptor::Pointwise {
            post: "square".into(),
            weight: TimeFunction::constant(1.0),
            lipschitz: Some(7.0),
            sup_bound: Some(9.0),
        };
        assert_eq!(m.bounds(1.0).unwrap(), MapBounds { sup: 9.0, lipschitz: 7.0 });
    }

    #[test]
    fn const_ignores_input() {
        let m = MapDescriptor::time(TimeFunction::cos(2.0, 3.0));
        let x = BoundedFunction::closed_form(1.0, f64::sin);
        let out = m.apply(&x, 1e-9).unwrap();
        assert_eq!(out.eval(0.4).unwrap(), 2.0 * (3.0 * 0.4f64).cos());
        assert_eq!(m.bounds(100.0).unwrap().lipschitz, 0.0);
    }

    #[test]
    fn convolution_of_constant() {
        let m = MapDescriptor::convolution(
            KernelSpec::Triangular { radius: 1.0, mass: 1.0 },
            "identity",
            TimeFunction::inverse_quadratic(1.0),
        );
        let out = m.apply(&BoundedFunction::constant(0.5), 1e-12).unwrap();
        assert!((out.eval(1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!(!m.is_pointwise_only());
        assert_eq!(m.reach().unwrap(), 1.0);
    }

    #[test]
    fn unknown_post_function_is_reported() {
        let m = MapDescriptor::pointwise("nope", TimeFunction::constant(1.0));
        assert!(matches!(m.apply(&BoundedFunction::zero(), 1e-9), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn non_finite_values_surface_on_evaluation() {
        let m = MapDescriptor::exp(MapDescriptor::pointwise("square", TimeFunction::constant(1.0)));
        let x = BoundedFunction::closed_form(1e3, |t| t);
        let out = m.apply(&x, 1e-9).unwrap();
        assert!(matches!(out.eval(100.0), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn pointwise_map_matches_apply() {
        let m = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::cos(0.1, 1.0)),
            MapDescriptor::pointwise("sin", TimeFunction::inverse_quadratic(0.1)),
        ]);
        let x = BoundedFunction::closed_form(1.0, |t| (3.0 * t).cos());
        let out = m.apply(&x, 1e-9).unwrap();
        let pm = m.pointwise_map().unwrap();
        for t in [-2.0, 0.3, 5.0] {
            assert_eq!(pm.eval(x.value(t), t), out.value(t));
        }
        assert!(c2pi_g().pointwise_map().is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = serde_json::to_string(&c2pi_g()).unwrap();
        assert_eq!(serde_json::from_str::<MapDescriptor>(&json).unwrap(), c2pi_g());
        let m: MapDescriptor =
            serde_json::from_str(r#"{"kind": "pointwise", "post": "cos", "lipschitz": 1.0}"#).unwrap();
        assert_eq!(
            m,
            MapDescriptor::Pointwise {
                post: "cos".into(),
                weight: TimeFunction::constant(1.0),
                lipschitz: Some(1.0),
                sup_bound: None
            }
        );
    }
}
