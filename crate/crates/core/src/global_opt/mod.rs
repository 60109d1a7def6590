//! Derivative-free global maximization over boxes.

mod direct;
mod domain;

pub use direct::{constrained_maximize, direct_maximize, DirectSearch, OptResult, DEFAULT_EPSILON};
pub use domain::BoxDomain;
