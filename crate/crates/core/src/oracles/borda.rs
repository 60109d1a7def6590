//! Ground-truth Borda score: the probability of beating a uniformly random opponent.
//!
//! The expectation over the opponent is a fixed quadrature rule: a tensor
//! Gauss-Legendre grid in one or two dimensions and a Halton average in
//! higher dimensions. Comparison-function values at the nodes are computed
//! once, so each score costs one pass of link evaluations.

use std::sync::OnceLock;

use super::link::LinkFunction;
use super::oracle::{DuelingOracle, ScalarFn};
use crate::error::{Error, Result};
use crate::global_opt::BoxDomain;
use crate::special::{gauss_legendre, halton};

pub const DEFAULT_NODES_PER_AXIS: usize = 200;
pub const DEFAULT_QMC_POINTS: usize = 200_000;
/// Dimensions up to this use a tensor product rule.
const TENSOR_MAX_DIM: usize = 2;

pub struct BordaTruth {
    comparison: ScalarFn,
    link: LinkFunction,
    domain: BoxDomain,
    node_values: Vec<f64>,
    weights: Vec<f64>,
    comparison_argmax: Vec<f64>,
    comparison_best: f64,
    best: OnceLock<f64>,
}

impl std::fmt::Debug for BordaTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BordaTruth")
            .field("link", &self.link)
            .field("nodes", &self.weights.len())
            .finish_non_exhaustive()
    }
}

impl BordaTruth {
    pub fn new(oracle: &DuelingOracle) -> Self {
        Self::with_resolution(oracle, DEFAULT_NODES_PER_AXIS, DEFAULT_QMC_POINTS)
    }

    pub fn with_resolution(oracle: &DuelingOracle, nodes_per_axis: usize, qmc_points: usize) -> Self {
        let domain = oracle.domain().clone();
        let d = domain.dim();
        let comparison = oracle.comparison_fn().clone();
        let (points, weights) = if d <= TENSOR_MAX_DIM {
            tensor_rule(&domain, nodes_per_axis)
        } else {
            let pts: Vec<Vec<f64>> = halton(qmc_points, d).iter().map(|u| domain.from_unit(u)).collect();
            let w = vec![1.0 / qmc_points as f64; qmc_points];
            (pts, w)
        };
        let node_values = points.iter().map(|p| comparison(p)).collect();
        BordaTruth {
            comparison,
            link: *oracle.link(),
            domain,
            node_values,
            weights,
            comparison_argmax: oracle.comparison_optimum().argmax.clone(),
            comparison_best: oracle.comparison_optimum().value,
            best: OnceLock::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn link(&self) -> &LinkFunction {
        &self.link
    }

    /// Borda score at `x`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.domain.check_contains(x)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.score_of(self.comparison.as_ref()(x))
    }

    /// Borda score of a point whose comparison value is `fc`.
    pub fn score_of(&self, fc: f64) -> f64 {
        let s: f64 = self
            .node_values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * self.link.eval(fc - v))
            .sum();
        s.clamp(0.0, 1.0)
    }

    /// Maximum Borda score. A monotone link makes the comparison function's
    /// maximizer the Borda maximizer as well.
    pub fn best(&self) -> f64 {
        *self.best.get_or_init(|| self.value_unchecked(&self.comparison_argmax))
    }

    pub fn comparison_argmax(&self) -> &[f64] {
        &self.comparison_argmax
    }

    pub fn comparison_best(&self) -> f64 {
        self.comparison_best
    }

    pub fn comparison_value(&self, x: &[f64]) -> f64 {
        self.comparison.as_ref()(x)
    }
}

fn tensor_rule(domain: &BoxDomain, per_axis: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (nodes, w) = gauss_legendre(per_axis);
    let d = domain.dim();
    let total = per_axis.pow(d as u32);
    let mut pts = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let u: Vec<f64> = idx.iter().map(|&i| 0.5 * (nodes[i] + 1.0)).collect();
        pts.push(domain.from_unit(&u));
        weights.push(idx.iter().map(|&i| 0.5 * w[i]).product());
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < per_axis {
                break;
            }
            *slot = 0;
        }
    }
    (pts, weights)
}

pub fn borda_truth(bt: &BordaTruth, x: &[f64]) -> Result<f64> {
    bt.value(x)
}

/// Rejects empty grids up front; shared by the assumption checks.
pub(crate) fn nonempty<T>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        Err(Error::invalid("grid is empty"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::oracles::LinkFamily;

    fn oracle(fc: ScalarFn, link: LinkFamily) -> DuelingOracle {
        DuelingOracle::new(
            fc.clone(),
            fc,
            LinkFunction::new(link, 1.0).unwrap(),
            0.0,
            BoxDomain::unit(1),
        )
        .unwrap()
    }

    #[test]
    fn constant_comparison_gives_half() {
        let bt = BordaTruth::with_resolution(&oracle(Arc::new(|_: &[f64]| 2.0), LinkFamily::Logistic), 50, 100);
        assert!((bt.value(&[0.3]).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn linear_link_closed_form() {
        let bt = BordaTruth::with_resolution(&oracle(Arc::new(|x: &[f64]| x[0]), LinkFamily::Linear), 50, 100);
        for x in [0.0, 0.25, 1.0] {
            assert!((bt.value(&[x]).unwrap() - (x + 0.5) / 2.0).abs() < 1e-12);
        }
        assert!((bt.best() - 0.75).abs() < 1e-9);
    }
}
