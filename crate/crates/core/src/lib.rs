//! Gaussian-process bandit optimization that mixes expensive direct function
//! queries with cheap pairwise comparisons.
//!
//! The crate is split by role:
//! - [`gp`] holds kernels, the incremental posterior, hyperparameter fitting,
//!   information-gain estimates and confidence-width schedules;
//! - [`global_opt`] is a dividing-rectangles optimizer for acquisition surfaces;
//! - [`oracles`] simulates benchmark targets, noisy labels and duels;
//! - [`accounting`] tracks spending and regret;
//! - [`algorithms`] contains the query policies;
//! - [`harness`] drives seeded multi-run experiments and writes CSV.

pub mod accounting;
pub mod algorithms;
pub mod error;
pub mod global_opt;
pub mod gp;
pub mod harness;
pub mod oracles;
pub mod special;

pub use error::{Error, Result};
