use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Analytic constants of a problem on the box `[k, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConstants {
    /// Lower bound for `G`.
    pub l: f64,
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Bound for `‖F(x)‖∞` over the box.
    pub r: f64,
    #[serde(rename = "L_F")]
    pub lip_f: f64,
    #[serde(rename = "L_G")]
    pub lip_g: f64,
}

impl HypothesisConstants {
    pub fn validate(&self) -> Result<()> {
        ensure(self.l > 0.0 && self.l.is_finite(), || format!("l must be positive, got {}", self.l))?;
        ensure(self.k <= self.m, || format!("need k <= M, got k = {}, M = {}", self.k, self.m))?;
        ensure(self.r >= 0.0 && self.lip_f >= 0.0 && self.lip_g >= 0.0, || {
            format!("r, L_F and L_G must be >= 0, got {}, {}, {}", self.r, self.lip_f, self.lip_g)
        })
    }

    /// `max(r / l², 1 / l) (L_F + L_G)`
    pub fn q(&self) -> f64 {
        (self.r / (self.l * self.l)).max(1.0 / self.l) * (self.lip_f + self.lip_g)
    }

    /// `l - (L_G max(M, -k) + L_F)`
    pub fn lambda(&self) -> f64 {
        self.l - (self.lip_g * self.m.max(-self.k) + self.lip_f)
    }

    pub fn input_bound(&self) -> f64 {
        self.k.abs().max(self.m.abs())
    }
}

pub fn contraction_factor(c: &HypothesisConstants) -> f64 {
    c.q()
}

pub fn attractivity_rate(c: &HypothesisConstants) -> f64 {
    c.lambda()
}
