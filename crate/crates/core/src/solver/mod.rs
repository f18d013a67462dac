//! Fixed-point solver for `x' + G(x, t) x = F(x, t)` on the whole line.
//!
//! Bounded solutions are the fixed points of `Γ(x) = T(F(x), G(x))`; the
//! solver runs (optionally relaxed) Picard iteration on a uniform grid and
//! checks the result against the differential form.

mod picard;
mod problem;

pub use picard::{certify, gamma, residual, solve_picard, SolveReport, SolverConfig, SolverTolerances};
pub use problem::{Problem, Sign};
