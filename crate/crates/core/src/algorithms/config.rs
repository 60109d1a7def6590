//! Policy configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{FitBounds, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Label-only upper-confidence-bound search.
    GpUcb,
    /// Two-phase duel-then-label search with a known bias bound.
    CompGpUcb,
    /// Two-phase search that doubles its bias guess on a label schedule.
    CompGpUcbAdaptive,
    /// Duels only; the two-phase search with zero bias and zero threshold.
    ComparisonOnly,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::GpUcb => "gp_ucb",
            Policy::CompGpUcb => "comp_gp_ucb",
            Policy::CompGpUcbAdaptive => "comp_gp_ucb_adaptive",
            Policy::ComparisonOnly => "comparison_only",
        }
    }

    pub fn uses_comparisons(&self) -> bool {
        !matches!(self, Policy::GpUcb)
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaConfig {
    Heuristic {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Theoretical {
        rkhs_bound: f64,
        delta: f64,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
}

impl Default for BetaConfig {
    fn default() -> Self {
        BetaConfig::Heuristic {
            epsilon: default_epsilon(),
        }
    }
}

fn default_epsilon() -> f64 {
    1.0
}
fn default_grid_points() -> usize {
    512
}

/// Everything a single run needs besides the oracle, the costs and the seed.
///
/// Coordinates seen by the models are the unit cube mapped onto the oracle's
/// box, so lengthscales are fractions of each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgConfig {
    pub policy: Policy,
    /// Known bias bound between the target and the comparison function.
    #[serde(default)]
    pub zeta: f64,
    /// Confidence width below which duels hand over to labels.
    #[serde(default)]
    pub gamma: f64,
    /// Borda-to-comparison Lipschitz constant.
    #[serde(default = "one")]
    pub l2: f64,
    /// Starting bias guess of the adaptive policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<f64>,
    /// Upper bound on the bias for the adaptive policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_max: Option<f64>,
    #[serde(default)]
    pub beta_label: BetaConfig,
    #[serde(default)]
    pub beta_comp: BetaConfig,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "default_acq_per_dim")]
    pub acq_evals_per_dim: usize,
    /// Budget spent on uniform random queries before the policy starts.
    #[serde(default = "default_warm_start")]
    pub warm_start: f64,
    /// Observation noise of the Gaussian model fed with 0/1 duel outcomes.
    #[serde(default = "half")]
    pub comp_noise: f64,
    /// Prior mean of the duel model; a Borda score averages one half over the domain.
    #[serde(default = "half")]
    pub comp_prior_mean: f64,
    /// Label noise used by the label model; `None` takes the oracle's noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(default = "yes")]
    pub refit: bool,
    #[serde(default = "default_refit_comp")]
    pub refit_comp_every: usize,
    #[serde(default = "default_refit_label")]
    pub refit_label_every: usize,
    /// Each duel-model refit interval is at least this multiple of the duels seen
    /// so far, so the schedule turns geometric once the model is large (0 keeps it fixed).
    #[serde(default = "default_refit_growth")]
    pub refit_comp_growth: f64,
    #[serde(default = "default_fit_budget")]
    pub fit_budget: usize,
    /// Hyperparameter fits use at most this many (evenly strided) observations.
    #[serde(default = "default_fit_points")]
    pub fit_max_points: usize,
    #[serde(default = "default_lengthscale_bounds")]
    pub lengthscale_bounds: [f64; 2],
    /// Raise the phase-one lower bound with later duels.
    #[serde(default)]
    pub refresh_lcb: bool,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn default_kernel() -> KernelSpec {
    KernelSpec::squared_exponential(0.2, 1.0).expect("valid default kernel")
}
fn default_acq_per_dim() -> usize {
    500
}
fn default_warm_start() -> f64 {
    10.0
}
fn default_refit_comp() -> usize {
    20
}
fn default_refit_label() -> usize {
    5
}
fn default_refit_growth() -> f64 {
    0.5
}
fn default_fit_budget() -> usize {
    crate::gp::DEFAULT_FIT_BUDGET
}
fn default_fit_points() -> usize {
    150
}
fn default_lengthscale_bounds() -> [f64; 2] {
    [0.02, 2.0]
}

impl AlgConfig {
    pub fn new(policy: Policy) -> Self {
        AlgConfig {
            policy,
            zeta: 0.0,
            gamma: 0.0,
            l2: one(),
            zeta0: None,
            zeta_max: None,
            beta_label: BetaConfig::default(),
            beta_comp: BetaConfig::default(),
            kernel: default_kernel(),
            acq_evals_per_dim: default_acq_per_dim(),
            warm_start: default_warm_start(),
            comp_noise: half(),
            comp_prior_mean: half(),
            label_noise: None,
            refit: true,
            refit_comp_every: default_refit_comp(),
            refit_label_every: default_refit_label(),
            refit_comp_growth: default_refit_growth(),
            fit_budget: default_fit_budget(),
            fit_max_points: default_fit_points(),
            lengthscale_bounds: default_lengthscale_bounds(),
            refresh_lcb: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be a nonnegative number, got {v}")))
            }
        };
        nonneg("zeta", self.zeta)?;
        nonneg("gamma", self.gamma)?;
        nonneg("warm_start", self.warm_start)?;
        if !(self.l2 > 0.0 && self.l2.is_finite()) {
            return Err(Error::invalid(format!("l2 must be positive, got {}", self.l2)));
        }
        if !(self.comp_noise > 0.0) {
            return Err(Error::invalid("comp_noise must be positive"));
        }
        if self.acq_evals_per_dim == 0 || self.fit_budget == 0 {
            return Err(Error::invalid("acquisition and fit budgets must be positive"));
        }
        if self.refit && (self.refit_comp_every == 0 || self.refit_label_every == 0) {
            return Err(Error::invalid("refit intervals must be positive"));
        }
        if !(self.refit_comp_growth >= 0.0 && self.refit_comp_growth.is_finite()) {
            return Err(Error::invalid("refit growth must be a nonnegative number"));
        }
        FitBounds {
            lengthscale: self.lengthscale_bounds,
            scale: [1.0, 1.0],
        }
        .validate()?;
        for beta in [self.beta_label, self.beta_comp] {
            match beta {
                BetaConfig::Heuristic { epsilon } if !(epsilon > 0.0) => {
                    return Err(Error::invalid("heuristic beta epsilon must be positive"));
                }
                BetaConfig::Theoretical { delta, grid_points, rkhs_bound }
                    if !(delta > 0.0 && delta < 1.0) || grid_points == 0 || !(rkhs_bound >= 0.0) =>
                {
                    return Err(Error::invalid("theoretical beta needs delta in (0,1), rkhs_bound >= 0, grid_points > 0"));
                }
                _ => {}
            }
        }
        if self.policy == Policy::CompGpUcbAdaptive {
            let (z0, zmax) = self.adaptive_range()?;
            if !(z0 > 0.0 && zmax >= z0) {
                return Err(Error::invalid(format!("need 0 < zeta0 <= zeta_max, got {z0} and {zmax}")));
            }
        }
        Ok(())
    }

    pub(crate) fn adaptive_range(&self) -> Result<(f64, f64)> {
        match (self.zeta0, self.zeta_max) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::invalid("the adaptive policy needs zeta0 and zeta_max")),
        }
    }

    /// Dividing-rectangles budget per acquisition step.
    pub fn acq_evals(&self, dim: usize) -> usize {
        self.acq_evals_per_dim * dim
    }
}
