//! Declarative maps `x -> F(x)` between bounded functions and estimators for
//! the constants they satisfy on a box.
//!
//! A [`MapDescriptor`] is a serializable expression tree. Leaves are
//! pointwise compositions, convolutions and the `[0, 1]` integral seminorm;
//! combinators are sums, products, exponentials and scalings. Sup bounds
//! and Lipschitz constants propagate through the tree.

mod descriptor;
mod estimate;
mod hypotheses;
mod scalar;
mod time_fn;

pub use descriptor::{KernelSpec, MapBounds, MapDescriptor, PointwiseMap};
pub use estimate::{
    estimate_inf, estimate_lipschitz, probes, verify_box, verify_ratio, BoxReport, EstimatorConfig,
};
pub use hypotheses::{attractivity_rate, contraction_factor, HypothesisConstants};
pub use scalar::{lookup_scalar_fn, register_scalar_fn, scalar_fn_names, ScalarFn, ScalarFnRegistry};
pub use time_fn::TimeFunction;
