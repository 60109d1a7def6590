//! Gaussian-process machinery.

mod beta;
mod cache;
mod fit;
mod info_gain;
mod kernel;
mod posterior;

pub use cache::QueryCache;
pub use beta::{beta_value, BetaMode, BetaSchedule};
pub use fit::{fit_hyperparams, FitBounds, DEFAULT_FIT_BUDGET};
pub use info_gain::{max_info_gain_greedy, InfoGainCurve};
pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub use posterior::{log_marginal_likelihood, posterior_append, posterior_query, GpPosterior};
