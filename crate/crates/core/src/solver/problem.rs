use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exp_kernel::Direction;
use crate::maps::{HypothesisConstants, MapDescriptor};

/// Which equation the problem poses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// `x' + G(x, t) x = F(x, t)`
    #[default]
    PlusG,
    /// `x' - G(x, t) x = F(x, t)`
    MinusG,
}

/// `F`, `G` and the declared constants of one equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(rename = "F")]
    pub f: MapDescriptor,
    #[serde(rename = "G")]
    pub g: MapDescriptor,
    pub constants: HypothesisConstants,
    #[serde(default)]
    pub sign: Sign,
}

impl Problem {
    pub fn new(f: MapDescriptor, g: MapDescriptor, constants: HypothesisConstants) -> Result<Self> {
        let p = Self { f, g, constants, sign: Sign::PlusG };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()
    }

    /// Interval the solution is sought in: `[k, M]`, or `[-M, -k]` for the
    /// reversed sign, whose fixed point is `-T̃(F, G)`.
    pub fn solution_box(&self) -> (f64, f64) {
        let c = &self.constants;
        match self.sign {
            Sign::PlusG => (c.k, c.m),
            Sign::MinusG => (-c.m, -c.k),
        }
    }

    pub fn direction(&self) -> Direction {
        match self.sign {
            Sign::PlusG => Direction::Forward,
            Sign::MinusG => Direction::Reverse,
        }
    }

    pub fn is_pointwise_only(&self) -> bool {
        self.f.is_pointwise_only() && self.g.is_pointwise_only()
    }
}
