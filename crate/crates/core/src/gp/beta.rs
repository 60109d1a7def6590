//! Confidence-width multipliers.

use super::info_gain::InfoGainCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    /// `2B + sqrt(2 (gamma_{t-1} + 1 + ln(1/delta)))`
    Theoretical,
    /// `0.5 ln(2t + epsilon)`
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct BetaSchedule {
    mode: BetaMode,
    rkhs_bound: f64,
    delta: f64,
    epsilon: f64,
    curve: Option<InfoGainCurve>,
}

impl BetaSchedule {
    pub fn heuristic(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("heuristic epsilon must be positive, got {epsilon}")));
        }
        Ok(BetaSchedule {
            mode: BetaMode::Heuristic,
            rkhs_bound: 0.0,
            delta: 0.0,
            epsilon,
            curve: None,
        })
    }

    /// `rkhs_bound` bounds the RKHS norm of the modeled function; `delta` is the failure probability.
    pub fn theoretical(rkhs_bound: f64, delta: f64, curve: InfoGainCurve) -> Result<Self> {
        if !(rkhs_bound >= 0.0 && rkhs_bound.is_finite()) {
            return Err(Error::invalid(format!("RKHS bound must be nonnegative, got {rkhs_bound}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(BetaSchedule {
            mode: BetaMode::Theoretical,
            rkhs_bound,
            delta,
            epsilon: 0.0,
            curve: Some(curve),
        })
    }

    pub fn mode(&self) -> BetaMode {
        self.mode
    }

    /// Multiplier at step `t >= 1`.
    pub fn value(&mut self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::invalid("beta is defined for t >= 1"));
        }
        Ok(match self.mode {
            BetaMode::Heuristic => 0.5 * (2.0 * t as f64 + self.epsilon).ln(),
            BetaMode::Theoretical => {
                let curve = self.curve.as_mut().expect("theoretical schedule carries a curve");
                let gain = curve.value(t - 1);
                2.0 * self.rkhs_bound + (2.0 * (gain + 1.0 + (1.0 / self.delta).ln())).sqrt()
            }
        })
    }
}

pub fn beta_value(schedule: &mut BetaSchedule, t: usize) -> Result<f64> {
    schedule.value(t)
}
