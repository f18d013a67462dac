//! Built-in problems, addressable by id.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function_core::Grid;
use crate::maps::{HypothesisConstants, KernelSpec, MapDescriptor, TimeFunction};
use crate::solver::{Problem, Sign};

pub trait ProblemFactory: Send + Sync {
    fn id(&self) -> &str;
    fn summary(&self) -> &str;
    fn build(&self) -> Problem;
    fn default_grid(&self) -> Grid;
}

#[derive(Clone, Default)]
pub struct Catalog {
    entries: BTreeMap<String, Arc<dyn ProblemFactory>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut c = Self::new();
        c.register(Arc::new(Ex0));
        c.register(Arc::new(Ex1));
        c.register(Arc::new(C2Pi));
        c.register(Arc::new(Exatt));
        c
    }

    pub fn register(&mut self, f: Arc<dyn ProblemFactory>) {
        self.entries.insert(f.id().to_string(), f);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn ProblemFactory>> {
        self.entries
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownName { kind: "problem", name: id.to_string() })
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn builtin_problem(id: &str) -> Result<Problem> {
    Ok(Catalog::builtin().get(id)?.build())
}

fn grid(t0: f64, t1: f64, n: usize) -> Grid {
    Grid { t0, t1, n }
}

fn bump(amplitude: f64) -> TimeFunction {
    TimeFunction::inverse_quadratic(amplitude)
}

/// Kernel of the convolution terms in `ex0`: the unit-mass hat on `[-1, 1]`.
pub fn ex0_kernel() -> KernelSpec {
    KernelSpec::Triangular { radius: 1.0, mass: 1.0 }
}

/// Convolution terms with a unit-mass kernel on the box `[-1, 1]`:
///
/// `F(x)(t) = (sin t + sin √2t + (x * α)(t) / (1 + t²)) / 3`
/// `G(x)(t) = 3 + sin 2t + cos((x * β)(t)) / (1 + t²)`
///
/// The box is scoped to `‖x‖∞ <= 1`, where `|F| <= 1`; `F` is unbounded
/// on the whole space.
pub struct Ex0;

impl ProblemFactory for Ex0 {
    fn id(&self) -> &str {
        "ex0"
    }
    fn summary(&self) -> &str {
        "convolution terms, box [-1, 1], no contraction certificate"
    }
    fn build(&self) -> Problem {
        let f = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::sum(vec![
                TimeFunction::sin(1.0 / 3.0, 1.0),
                TimeFunction::sin(1.0 / 3.0, SQRT_2),
            ])),
            MapDescriptor::convolution(ex0_kernel(), "identity", bump(1.0 / 3.0)),
        ]);
        let g = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::sum(vec![
                TimeFunction::constant(3.0),
                TimeFunction::sin(1.0, 2.0),
            ])),
            MapDescriptor::convolution(ex0_kernel(), "cos", bump(1.0)),
        ]);
        Problem {
            f,
            g,
            constants: HypothesisConstants { l: 1.0, k: -1.0, m: 1.0, r: 1.0, lip_f: 1.0, lip_g: 1.0 },
            sign: Sign::PlusG,
        }
    }
    fn default_grid(&self) -> Grid {
        grid(-20.0, 20.0, 2001)
    }
}

/// Seminorm and exponential terms:
///
/// `G(x)(t) = exp(‖x‖₀₁ + sin(x(t)) / (1 + t²))`
/// `F(x)(t) = 3 + sin ‖x‖₀₁ + cos(x(t)) / (1 + t²)`
///
/// with `‖x‖₀₁ = ∫_0^1 |x|`. Only the box hypothesis holds; the solver
/// result is a search, not a certificate.
pub struct Ex1;

impl ProblemFactory for Ex1 {
    fn id(&self) -> &str {
        "ex1"
    }
    fn summary(&self) -> &str {
        "seminorm inside an exponential, box [0, 5e], no contraction certificate"
    }
    fn build(&self) -> Problem {
        let g = MapDescriptor::exp(MapDescriptor::sum(vec![
            MapDescriptor::seminorm("identity"),
            MapDescriptor::pointwise("sin", bump(1.0)),
        ]));
        let f = MapDescriptor::sum(vec![
            MapDescriptor::constant(3.0),
            MapDescriptor::seminorm("sin"),
            MapDescriptor::pointwise("cos", bump(1.0)),
        ]);
        let m = 5.0 * E;
        Problem {
            f,
            g,
            constants: HypothesisConstants {
                l: (-1.0f64).exp(),
                k: 0.0,
                m,
                r: 5.0,
                lip_f: 2.0,
                lip_g: 2.0 * (m + 1.0).exp(),
            },
            sign: Sign::PlusG,
        }
    }
    fn default_grid(&self) -> Grid {
        grid(-5.0, 5.0, 1001)
    }
}

/// `2π`-periodic data with a contraction certificate `q = 3/4`:
///
/// `G(x)(t) = 4 + (1 + ‖x‖₀₁)(1 + sin t)`
/// `F(x)(t) = 2 + sin t + cos(x(t))`
pub struct C2Pi;

impl ProblemFactory for C2Pi {
    fn id(&self) -> &str {
        "c2pi"
    }
    fn summary(&self) -> &str {
        "periodic seminorm coefficient, q = 3/4, declared box [0, 1/2]"
    }
    fn build(&self) -> Problem {
        let g = MapDescriptor::sum(vec![
            MapDescriptor::constant(4.0),
            MapDescriptor::product(vec![
                MapDescriptor::sum(vec![MapDescriptor::constant(1.0), MapDescriptor::seminorm("identity")]),
                MapDescriptor::time(TimeFunction::sum(vec![
                    TimeFunction::constant(1.0),
                    TimeFunction::sin(1.0, 1.0),
                ])),
            ]),
        ]);
        let f = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::sum(vec![
                TimeFunction::constant(2.0),
                TimeFunction::sin(1.0, 1.0),
            ])),
            MapDescriptor::pointwise("cos", TimeFunction::constant(1.0)),
        ]);
        Problem {
            f,
            g,
            constants: HypothesisConstants { l: 4.0, k: 0.0, m: 0.5, r: 4.0, lip_f: 1.0, lip_g: 2.0 },
            sign: Sign::PlusG,
        }
    }
    fn default_grid(&self) -> Grid {
        grid(-20.0, 20.0, 4001)
    }
}

/// Pointwise maps satisfying the attractivity condition with rate `1/2`:
///
/// `G(x)(t) = 4 + sin t + sin √2t + cos(x(t)) / (1 + t²)`
/// `F(x)(t) = (2 + cos t + sin(x(t)) / (1 + t²)) / 10`
pub struct Exatt;

impl ProblemFactory for Exatt {
    fn id(&self) -> &str {
        "exatt"
    }
    fn summary(&self) -> &str {
        "pointwise maps, box [0, 0.4], attractivity rate 1/2"
    }
    fn build(&self) -> Problem {
        let g = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::sum(vec![
                TimeFunction::constant(4.0),
                TimeFunction::sin(1.0, 1.0),
                TimeFunction::sin(1.0, SQRT_2),
            ])),
            MapDescriptor::pointwise("cos", bump(1.0)),
        ]);
        let f = MapDescriptor::sum(vec![
            MapDescriptor::time(TimeFunction::sum(vec![
                TimeFunction::constant(0.2),
                TimeFunction::cos(0.1, 1.0),
            ])),
            MapDescriptor::pointwise("sin", bump(0.1)),
        ]);
        Problem {
            f,
            g,
            constants: HypothesisConstants { l: 1.0, k: 0.0, m: 0.4, r: 0.4, lip_f: 0.1, lip_g: 1.0 },
            sign: Sign::PlusG,
        }
    }
    fn default_grid(&self) -> Grid {
        grid(-20.0, 20.0, 4001)
    }
}
