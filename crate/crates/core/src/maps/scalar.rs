use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// A real function of one variable used as the outer function of a map term,
/// e.g. `cos` in `t -> cos(x(t))`.
pub trait ScalarFn: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, v: f64) -> f64;

    /// Lipschitz constant on `[-bound, bound]`.
    fn lipschitz_on(&self, bound: f64) -> f64;

    /// `sup |φ(v)|` over `|v| <= bound`.
    fn sup_abs_on(&self, bound: f64) -> f64;
}

struct Identity;

impl ScalarFn for Identity {
    fn name(&self) -> &str {
        "identity"
    }
    fn eval(&self, v: f64) -> f64 {
        v
    }
    fn lipschitz_on(&self, _: f64) -> f64 {
        1.0
    }
    fn sup_abs_on(&self, bound: f64) -> f64 {
        bound
    }
}

struct Sin;

impl ScalarFn for Sin {
    fn name(&self) -> &str {
        "sin"
    }
    fn eval(&self, v: f64) -> f64 {
        v.sin()
    }
    fn lipschitz_on(&self, _: f64) -> f64 {
        1.0
    }
    fn sup_abs_on(&self, bound: f64) -> f64 {
        if bound >= std::f64::consts::FRAC_PI_2 {
            1.0
        } else {
            bound.sin()
        }
    }
}

struct Cos;

impl ScalarFn for Cos {
    fn name(&self) -> &str {
        "cos"
    }
    fn eval(&self, v: f64) -> f64 {
        v.cos()
    }
    fn lipschitz_on(&self, _: f64) -> f64 {
        1.0
    }
    fn sup_abs_on(&self, _: f64) -> f64 {
        1.0
    }
}

struct Abs;

impl ScalarFn for Abs {
    fn name(&self) -> &str {
        "abs"
    }
    fn eval(&self, v: f64) -> f64 {
        v.abs()
    }
    fn lipschitz_on(&self, _: f64) -> f64 {
        1.0
    }
    fn sup_abs_on(&self, bound: f64) -> f64 {
        bound
    }
}

struct Tanh;

impl ScalarFn for Tanh {
    fn name(&self) -> &str {
        "tanh"
    }
    fn eval(&self, v: f64) -> f64 {
        v.tanh()
    }
    fn lipschitz_on(&self, _: f64) -> f64 {
        1.0
    }
    fn sup_abs_on(&self, bound: f64) -> f64 {
        bound.tanh()
    }
}

struct Square;

impl ScalarFn for Square {
    fn name(&self) -> &str {
        "square"
    }
    fn eval(&self, v: f64) -> f64 {
        v * v
    }
    fn lipschitz_on(&self, bound: f64) -> f64 {
        2.0 * bound
    }
    fn sup_abs_on(&self, bound: f64) -> f64 {
        bound * bound
    }
}

/// Outer functions addressable by name from map descriptors.
#[derive(Clone, Default)]
pub struct ScalarFnRegistry {
    entries: BTreeMap<String, Arc<dyn ScalarFn>>,
}

impl ScalarFnRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        for f in [
            Arc::new(Identity) as Arc<dyn ScalarFn>,
            Arc::new(Sin),
            Arc::new(Cos),
            Arc::new(Abs),
            Arc::new(Tanh),
            Arc::new(Square),
        ] {
            r.register(f);
        }
        r
    }

    pub fn register(&mut self, f: Arc<dyn ScalarFn>) -> Option<Arc<dyn ScalarFn>> {
        self.entries.insert(f.name().to_string(), f)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ScalarFn>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName { kind: "scalar function", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

static GLOBAL: Lazy<RwLock<ScalarFnRegistry>> =
    Lazy::new(|| RwLock::new(ScalarFnRegistry::with_builtins()));

/// Adds (or replaces) an outer function in the process-wide registry used
/// when descriptors are applied.
pub fn register_scalar_fn(f: Arc<dyn ScalarFn>) -> Option<Arc<dyn ScalarFn>> {
    GLOBAL.write().expect("scalar registry poisoned").register(f)
}

pub fn lookup_scalar_fn(name: &str) -> Result<Arc<dyn ScalarFn>> {
    GLOBAL.read().expect("scalar registry poisoned").get(name)
}

pub fn scalar_fn_names() -> Vec<String> {
    GLOBAL.read().expect("scalar registry poisoned").names().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve_by_name() {
        for name in ["identity", "sin", "cos", "abs", "tanh", "square"] {
            assert_eq!(lookup_scalar_fn(name).unwrap().name(), name);
        }
        assert!(matches!(lookup_scalar_fn("erf"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn declared_constants_dominate_samples() {
        let reg = ScalarFnRegistry::with_builtins();
        for name in reg.names() {
            let f = reg.get(name).unwrap();
            for bound in [0.3, 1.0, 2.5] {
                let n = 2000;
                let vs: Vec<f64> = (0..=n).map(|i| -bound + 2.0 * bound * i as f64 / n as f64).collect();
                let sup = vs.iter().map(|&v| f.eval(v).abs()).fold(0.0, f64::max);
                assert!(sup <= f.sup_abs_on(bound) * (1.0 + 1e-12), "{name}");
                let lip = vs
                    .windows(2)
                    .map(|w| (f.eval(w[1]) - f.eval(w[0])).abs() / (w[1] - w[0]))
                    .fold(0.0, f64::max);
                assert!(lip <= f.lipschitz_on(bound) * (1.0 + 1e-9), "{name} at {bound}");
            }
        }
    }

    struct Cube;
    impl ScalarFn for Cube {
        fn name(&self) -> &str {
            "cube"
        }
        fn eval(&self, v: f64) -> f64 {
            v * v * v
        }
        fn lipschitz_on(&self, b: f64) -> f64 {
            3.0 * b * b
        }
        fn sup_abs_on(&self, b: f64) -> f64 {
            b * b * b
        }
    }

    #[test]
    fn user_functions_can_be_registered() {
        register_scalar_fn(Arc::new(Cube));
        assert_eq!(lookup_scalar_fn("cube").unwrap().eval(2.0), 8.0);
        assert!(scalar_fn_names().iter().any(|n| n == "cube"));
    }
}
