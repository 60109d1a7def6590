//! Experiment configuration file (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accounting::CostModel;
use crate::algorithms::{AlgConfig, BetaConfig, Policy};
use crate::error::{Error, Result};
use crate::gp::KernelSpec;
use crate::oracles::{Benchmark, OracleSettings};

pub const DEFAULT_SEEDS: usize = 20;
pub const DEFAULT_WARM_START: f64 = 10.0;
pub const DEFAULT_EPSILON_HEUR: f64 = 1.0;

fn default_seeds() -> usize {
    DEFAULT_SEEDS
}
fn default_warm_start() -> f64 {
    DEFAULT_WARM_START
}
fn default_epsilon_heur() -> f64 {
    DEFAULT_EPSILON_HEUR
}
fn default_budgets() -> Vec<f64> {
    vec![25.0, 50.0, 75.0, 100.0]
}
fn default_label_cost() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub policies: Vec<PolicySpec>,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<f64>,
    pub costs: CostSpec,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_warm_start")]
    pub warm_start: f64,
    #[serde(default = "default_epsilon_heur")]
    pub epsilon_heur: f64,
    #[serde(default)]
    pub oracle: OracleSettings,
    /// Output directory; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Label cost plus either one comparison cost or a list of label/comparison cost ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(default = "default_label_cost")]
    pub label_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// An equal `comparison_cost` is rejected unless this is set. Listing ratio 1
    /// in `ratios` asks for the equal-cost regime explicitly.
    #[serde(default)]
    pub allow_equal_costs: bool,
}

/// Per-policy settings. Bias, Lipschitz and threshold values left out are
/// filled from measurements of the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub policy: Policy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_label: Option<BetaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_comp: Option<BetaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acq_evals_per_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comp_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refit: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_max_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refresh_lcb: Option<bool>,
}

impl PolicySpec {
    pub fn new(policy: Policy) -> Self {
        PolicySpec {
            policy,
            zeta: None,
            gamma: None,
            l2: None,
            zeta0: None,
            zeta_max: None,
            beta_label: None,
            beta_comp: None,
            kernel: None,
            acq_evals_per_dim: None,
            comp_noise: None,
            label_noise: None,
            refit: None,
            fit_max_points: None,
            refresh_lcb: None,
        }
    }

    /// A display label: the policy name, or `name@k` for the k-th repeat of a policy.
    pub fn label(&self, specs: &[PolicySpec], index: usize) -> String {
        let repeats = specs[..index].iter().filter(|s| s.policy == self.policy).count();
        if repeats == 0 {
            self.policy.name().to_string()
        } else {
            format!("{}@{}", self.policy.name(), repeats)
        }
    }

    /// Concrete run configuration, with measured oracle constants filling the gaps.
    pub fn resolve(&self, measured: &Measured, warm_start: f64, epsilon_heur: f64) -> AlgConfig {
        let mut c = AlgConfig::new(self.policy);
        let zeta = self.zeta.unwrap_or(measured.zeta);
        let l2 = self.l2.unwrap_or(measured.l2);
        c.l2 = l2;
        c.warm_start = warm_start;
        let heuristic = BetaConfig::Heuristic { epsilon: epsilon_heur };
        c.beta_label = self.beta_label.unwrap_or(heuristic);
        c.beta_comp = self.beta_comp.unwrap_or(heuristic);
        match self.policy {
            Policy::ComparisonOnly | Policy::GpUcb => {
                c.zeta = 0.0;
                c.gamma = 0.0;
            }
            Policy::CompGpUcb => {
                c.zeta = zeta;
                c.gamma = self.gamma.unwrap_or(l2 * zeta);
            }
            Policy::CompGpUcbAdaptive => {
                let z0 = self.zeta0.unwrap_or(measured.zeta / 8.0);
                c.zeta = z0;
                c.zeta0 = Some(z0);
                c.zeta_max = Some(self.zeta_max.unwrap_or(8.0 * measured.zeta));
                c.gamma = self.gamma.unwrap_or(l2 * z0);
            }
        }
        if let Some(k) = self.kernel {
            c.kernel = k;
        }
        if let Some(v) = self.acq_evals_per_dim {
            c.acq_evals_per_dim = v;
        }
        if let Some(v) = self.comp_noise {
            c.comp_noise = v;
        }
        c.label_noise = self.label_noise;
        if let Some(v) = self.refit {
            c.refit = v;
        }
        if let Some(v) = self.fit_max_points {
            c.fit_max_points = v;
        }
        if let Some(v) = self.refresh_lcb {
            c.refresh_lcb = v;
        }
        c
    }
}

/// Oracle constants estimated on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub zeta: f64,
    pub l1: f64,
    pub l2: f64,
}

impl CostSpec {
    /// One cost model per comparison cost (or ratio), each with the given budget.
    pub fn models(&self, budget: f64) -> Result<Vec<(f64, CostModel)>> {
        self.comparison_costs()?
            .into_iter()
            .map(|(ratio, cc)| Ok((ratio, CostModel::new(self.label_cost, cc, budget)?)))
            .collect()
    }

    /// `(ratio, comparison cost)` pairs.
    pub fn comparison_costs(&self) -> Result<Vec<(f64, f64)>> {
        match (&self.comparison_cost, &self.ratios) {
            (Some(cc), None) => Ok(vec![(self.label_cost / cc, *cc)]),
            (None, Some(rs)) => Ok(rs.iter().map(|r| (*r, self.label_cost / r)).collect()),
            _ => Err(Error::config("costs", "give exactly one of `comparison_cost` or `ratios`")),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.label_cost > 0.0 && self.label_cost.is_finite()) {
            return Err(Error::config("costs.label_cost", "must be positive"));
        }
        if let Some(rs) = &self.ratios {
            if rs.is_empty() {
                return Err(Error::config("costs.ratios", "must not be empty"));
            }
        }
        for (ratio, cc) in self.comparison_costs()? {
            if !(cc > 0.0 && cc.is_finite() && ratio.is_finite()) {
                return Err(Error::config("costs", format!("comparison cost must be positive, got {cc}")));
            }
            if cc > self.label_cost {
                return Err(Error::config(
                    "costs",
                    format!("comparison cost {cc} exceeds label cost {}", self.label_cost),
                ));
            }
            if cc == self.label_cost && self.ratios.is_none() && !self.allow_equal_costs {
                return Err(Error::config(
                    "costs.allow_equal_costs",
                    "equal label and comparison costs need `allow_equal_costs = true`",
                ));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::config("seeds", "must be at least 1"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "must not be empty"));
        }
        if self.budgets.is_empty() {
            return Err(Error::config("budgets", "must not be empty"));
        }
        if !(self.warm_start >= 0.0 && self.warm_start.is_finite()) {
            return Err(Error::config("warm_start", "must be nonnegative"));
        }
        if !(self.epsilon_heur > 0.0) {
            return Err(Error::config("epsilon_heur", "must be positive"));
        }
        for (i, b) in self.budgets.iter().enumerate() {
            if !(*b > 0.0 && b.is_finite()) {
                return Err(Error::config(format!("budgets[{i}]"), format!("must be positive, got {b}")));
            }
            if *b <= self.warm_start {
                return Err(Error::config(
                    format!("budgets[{i}]"),
                    format!("budget {b} must exceed the warm-start budget {}", self.warm_start),
                ));
            }
        }
        self.costs.validate()?;
        if let Some(t) = self.oracle.temperature {
            if !(t > 0.0) {
                return Err(Error::config("oracle.temperature", "must be positive"));
            }
        }
        if let Some(n) = self.oracle.noise {
            if !(n >= 0.0) {
                return Err(Error::config("oracle.noise", "must be nonnegative"));
            }
        }
        for (i, p) in self.policies.iter().enumerate() {
            let measured = Measured {
                zeta: 1.0,
                l1: 1.0,
                l2: 1.0,
            };
            p.resolve(&measured, self.warm_start, self.epsilon_heur)
                .validate()
                .map_err(|e| Error::config(format!("policies[{i}]"), e.to_string()))?;
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text)
}
