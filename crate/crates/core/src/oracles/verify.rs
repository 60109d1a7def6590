//! Empirical checks of the structural assumptions linking the two functions.

use super::borda::{nonempty, BordaTruth};
use super::oracle::DuelingOracle;
use crate::error::{Error, Result};

/// Grid points whose comparison gap to the optimum is below this are skipped.
pub const MIN_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// Reciprocal of the smallest Borda-gap to comparison-gap ratio.
    pub l1: f64,
    /// Largest Borda-gap to comparison-gap ratio.
    pub l2: f64,
    /// Grid points that entered the ratios.
    pub used: usize,
}

/// Ratios `(f_r* - f_r(x)) / (f_c* - f_c(x))` over `grid`, summarized as `(1/min, max)`.
pub fn verify_assumption2(bt: &BordaTruth, grid: &[Vec<f64>]) -> Result<LipschitzEstimate> {
    nonempty(grid)?;
    let fc_best = bt.comparison_best();
    let fr_best = bt.best();
    let (mut lo, mut hi, mut used) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for x in grid {
        let gap = fc_best - bt.comparison_value(x);
        if gap < MIN_GAP {
            continue;
        }
        let ratio = (fr_best - bt.value(x)?) / gap;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        used += 1;
    }
    if used == 0 {
        return Err(Error::invalid("no grid point has a comparison gap above the admissibility floor"));
    }
    Ok(LipschitzEstimate { l1: 1.0 / lo, l2: hi, used })
}

/// Largest disagreement between the centered gaps of the target and the comparison function.
pub fn verify_assumption1(oracle: &DuelingOracle, grid: &[Vec<f64>]) -> Result<f64> {
    nonempty(grid)?;
    let f_best = oracle.target_optimum().value;
    let fc_best = oracle.comparison_optimum().value;
    let mut worst: f64 = 0.0;
    for x in grid {
        oracle.domain().check_contains(x)?;
        let diff = (fc_best - oracle.comparison_value(x)) - (f_best - oracle.target_value(x));
        worst = worst.max(diff.abs());
    }
    Ok(worst)
}
