//! Query policies: label-only UCB, the two-phase duel-then-label search, its
//! bias-adaptive variant and a duel-only baseline.

mod config;
mod run;
mod state;

pub use config::{AlgConfig, BetaConfig, Policy};
pub use run::{run, run_with_observer, RunOutcome, StepView};
pub use state::{adaptive_threshold, AlgState, PendingBound, Phase, QueryDecision};
