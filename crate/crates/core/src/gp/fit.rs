//! Maximum-marginal-likelihood kernel hyperparameters.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::posterior::GpPosterior;
use crate::error::{Error, Result};
use crate::global_opt::{direct_maximize, BoxDomain};

pub const DEFAULT_FIT_BUDGET: usize = 200;

/// Closed intervals for the lengthscale and the output scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBounds {
    pub lengthscale: [f64; 2],
    pub scale: [f64; 2],
}

impl FitBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("lengthscale", self.lengthscale), ("scale", self.scale)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::invalid(format!("{name} bounds must satisfy 0 < lo <= hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn midpoint(&self) -> (f64, f64) {
        (
            0.5 * (self.lengthscale[0] + self.lengthscale[1]),
            0.5 * (self.scale[0] + self.scale[1]),
        )
    }
}

/// Maximizes the zero-mean log marginal likelihood over `(log lengthscale, log scale)`.
///
/// The kernel family (and smoothness) comes from `base`. The arithmetic
/// midpoint of the bounds is always probed, so the result never scores below it.
pub fn fit_hyperparams(
    base: &KernelSpec,
    xs: &[Vec<f64>],
    ys: &[f64],
    noise: f64,
    bounds: &FitBounds,
    budget: usize,
) -> Result<KernelSpec> {
    bounds.validate()?;
    if budget == 0 {
        return Err(Error::invalid("fit budget must be at least 1"));
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let lml = |rho: f64, scale: f64| -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        match base.with_hyperparams(rho, scale) {
            Ok(spec) => GpPosterior::from_data(spec, noise, xs, ys)
                .map(|gp| gp.log_marginal_likelihood())
                .unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (mid_rho, mid_scale) = bounds.midpoint();
    let mut best = (mid_rho, mid_scale, lml(mid_rho, mid_scale));

    let lo = [bounds.lengthscale[0].ln(), bounds.scale[0].ln()];
    let hi = [bounds.lengthscale[1].ln(), bounds.scale[1].ln()];
    // Degenerate (zero-width) bounds leave nothing to search.
    if lo.iter().zip(&hi).all(|(a, b)| a < b) && budget > 1 {
        let domain = BoxDomain::new(lo.to_vec(), hi.to_vec())?;
        let found = direct_maximize(|p| lml(p[0].exp(), p[1].exp()), &domain, budget - 1)?;
        if found.value > best.2 {
            best = (found.argmax[0].exp(), found.argmax[1].exp(), found.value);
        }
    }
    let rho = best.0.clamp(bounds.lengthscale[0], bounds.lengthscale[1]);
    let scale = best.1.clamp(bounds.scale[0], bounds.scale[1]);
    base.with_hyperparams(rho, scale)
}
