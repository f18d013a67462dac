use std::fmt;
use std::sync::Arc;

use super::grid::GridFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    ClosedForm,
    Grid,
    Sum,
    Product,
    Scaled,
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on the whole line together with a claimed bound
/// `|f(t)| <= sup_bound` for every `t`.
#[derive(Clone)]
pub struct BoundedFunction {
    eval: Evaluator,
    sup_bound: f64,
    kind: FunctionKind,
}

impl fmt::Debug for BoundedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedFunction")
            .field("kind", &self.kind)
            .field("sup_bound", &self.sup_bound)
            .finish_non_exhaustive()
    }
}

impl BoundedFunction {
    pub fn closed_form(sup_bound: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_kind(FunctionKind::ClosedForm, sup_bound, f)
    }

    pub fn with_kind(
        kind: FunctionKind,
        sup_bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Arc::new(f), sup_bound: sup_bound.abs(), kind }
    }

    pub fn constant(c: f64) -> Self {
        Self::closed_form(c.abs(), move |_| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn from_grid(g: GridFunction) -> Self {
        let bound = g.sup_bound();
        Self::with_kind(FunctionKind::Grid, bound, move |t| g.eval(t))
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = (self.eval)(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t, value: v })
        }
    }

    /// Unchecked evaluation for inner loops; callers validate finiteness of
    /// the samples they keep.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn sum(&self, other: &BoundedFunction) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::with_kind(FunctionKind::Sum, self.sup_bound + other.sup_bound, move |t| a(t) + b(t))
    }

    pub fn product(&self, other: &BoundedFunction) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::with_kind(FunctionKind::Product, self.sup_bound * other.sup_bound, move |t| {
            a(t) * b(t)
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let a = self.eval.clone();
        Self::with_kind(FunctionKind::Scaled, c.abs() * self.sup_bound, move |t| c * a(t))
    }

    /// `t -> f(-t)`.
    pub fn reflected(&self) -> Self {
        let a = self.eval.clone();
        Self::with_kind(self.kind, self.sup_bound, move |t| a(-t))
    }

    /// `t -> f(t + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let a = self.eval.clone();
        Self::with_kind(self.kind, self.sup_bound, move |t| a(t + shift))
    }

    /// Same evaluator with a different claimed bound.
    pub fn with_sup_bound(&self, sup_bound: f64) -> Self {
        Self { eval: self.eval.clone(), sup_bound: sup_bound.abs(), kind: self.kind }
    }
}
