//! Link functions mapping a comparison-function gap to a win probability.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkFamily {
    /// Bradley-Terry-Luce.
    Logistic,
    /// Thurstone (standard normal CDF).
    Probit,
    /// Clamped affine ramp.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFunction {
    pub family: LinkFamily,
    pub temperature: f64,
}

impl LinkFunction {
    pub fn new(family: LinkFamily, temperature: f64) -> Result<Self> {
        let link = LinkFunction { family, temperature };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "link temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// Probability that the first arm wins when its comparison value leads by `u`.
    pub fn eval(&self, u: f64) -> f64 {
        let z = u / self.temperature;
        match self.family {
            LinkFamily::Logistic => {
                // split by sign so the exponential never overflows
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            LinkFamily::Probit => 0.5 * erfc(-z / std::f64::consts::SQRT_2),
            LinkFamily::Linear => ((1.0 + z) / 2.0).clamp(0.0, 1.0),
        }
    }
}

pub fn link_eval(link: &LinkFunction, u: f64) -> f64 {
    link.eval(u)
}
