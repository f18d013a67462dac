//! Bounded continuous functions on the real line and the function-space
//! diagnostics used to probe them: convolution against L¹ kernels, ergodic
//! means, sampled ε-almost-periods and the `∫_0^1 |x|` seminorm.

mod bounded;
mod diagnostics;
mod grid;
mod kernel;
pub mod quadrature;

pub use bounded::{BoundedFunction, FunctionKind};
pub use diagnostics::{
    convolve, epsilon_period_search, ergodic_mean, period_defect, seminorm_01, sup_norm_estimate,
    PeriodScan,
};
pub use grid::{central_difference, Extension, Grid, GridFunction};
pub use kernel::L1Kernel;
