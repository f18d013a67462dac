//! Bounded whole-line solutions of `x' + G(x, t) x = F(x, t)`.
//!
//! `function_core` holds bounded functions and grids, `exp_kernel` the
//! operator `T(f, g)(t) = ∫_{-∞}^t exp(-∫_s^t g) f(s) ds`, `maps` the
//! declarative superposition maps `F` and `G`, `solver` the Picard
//! iteration for `x = T(F(x), G(x))` and `attractivity` the forward decay
//! experiment. `catalog` registers the built-in problems.

pub mod attractivity;
pub mod catalog;
pub mod error;
pub mod exp_kernel;
pub mod function_core;
pub mod maps;
pub mod solver;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
