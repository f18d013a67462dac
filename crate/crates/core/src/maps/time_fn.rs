use serde::{Deserialize, Serialize};

use crate::function_core::BoundedFunction;

fn one() -> f64 {
    1.0
}

/// Closed-form time profiles used as constant terms and weights in map
/// descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `amplitude · sin(frequency · t + phase)`
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude · cos(frequency · t + phase)`
    Cos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude / (1 + t²)`
    InverseQuadratic {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Sum {
        terms: Vec<TimeFunction>,
    },
    Product {
        factors: Vec<TimeFunction>,
    },
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn sin(amplitude: f64, frequency: f64) -> Self {
        Self::Sin { amplitude, frequency, phase: 0.0 }
    }

    pub fn cos(amplitude: f64, frequency: f64) -> Self {
        Self::Cos { amplitude, frequency, phase: 0.0 }
    }

    pub fn inverse_quadratic(amplitude: f64) -> Self {
        Self::InverseQuadratic { amplitude }
    }

    pub fn sum(terms: Vec<TimeFunction>) -> Self {
        Self::Sum { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Sin { amplitude, frequency, phase } => amplitude * (frequency * t + phase).sin(),
            Self::Cos { amplitude, frequency, phase } => amplitude * (frequency * t + phase).cos(),
            Self::InverseQuadratic { amplitude } => amplitude / (1.0 + t * t),
            Self::Sum { terms } => terms.iter().map(|f| f.eval(t)).sum(),
            Self::Product { factors } => factors.iter().map(|f| f.eval(t)).product(),
        }
    }

    /// Bound on `sup_t |f(t)|` from the triangle inequality.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Constant { value } => value.abs(),
            Self::Sin { amplitude, .. } | Self::Cos { amplitude, .. } => amplitude.abs(),
            Self::InverseQuadratic { amplitude } => amplitude.abs(),
            Self::Sum { terms } => terms.iter().map(Self::sup_bound).sum(),
            Self::Product { factors } => factors.iter().map(Self::sup_bound).product(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::Sin { amplitude, .. } | Self::Cos { amplitude, .. } => *amplitude == 0.0,
            Self::InverseQuadratic { amplitude } => *amplitude == 0.0,
            Self::Sum { terms } => terms.iter().all(Self::is_constant),
            Self::Product { factors } => factors.iter().all(Self::is_constant),
        }
    }

    pub fn to_function(&self) -> BoundedFunction {
        let f = self.clone();
        BoundedFunction::closed_form(self.sup_bound(), move |t| f.eval(t))
    }
}
