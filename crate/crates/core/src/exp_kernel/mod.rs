//! The integral operator
//!
//! ```text
//! T(f, g)(t) = ∫_{-∞}^t exp(-∫_s^t g(u) du) f(s) ds
//! ```
//!
//! which for `g >= l > 0` is the unique bounded solution of `y' + g y = f`,
//! together with its reverse-time mirror and numerical checks of its
//! basic properties (unit kernel mass, the derivative identity, the sup
//! and Lipschitz bounds).
//!
//! Evaluation truncates the history at the depth given by
//! [`TruncationPlan`], precomputes the running integral of `g` once per
//! application, and forms the kernel as `exp(Gcum(s) - Gcum(t))` so the
//! exponent is never positive.

mod checks;
mod operator;

pub use checks::{
    derivative_identity_residual, equicontinuity_bound, equicontinuity_modulus,
    lipschitz_bound_check, reverse_identity_residual, LipschitzReport, DEFAULT_LIPSCHITZ_SLACK,
};
pub use operator::{
    apply_t, apply_t_reverse, check_unit_mass, CumulativeIntegral, Direction, ExpKernelOperator,
    KernelOutput, KernelTolerances, TruncationPlan, LOWER_BOUND_SLACK, MAX_SUBDIVISION,
};
