//! Greedy estimate of the maximum information gain.
//!
//! Picking points one at a time by largest posterior variance maximizes the
//! marginal gain of `0.5 log det(I + K_S / noise^2)`, which is monotone
//! submodular, so the greedy value is within `1 - 1/e` of the optimum.
//! Candidates are used without replacement until all have been picked; after
//! that repeats are allowed so the curve can grow without bound.

use super::kernel::KernelSpec;
use super::posterior::dot;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct InfoGainCurve {
    kernel: KernelSpec,
    noise: f64,
    candidates: Vec<Vec<f64>>,
    /// Row `c` holds `L^{-1} k(X_S, c)` for candidate `c`.
    solves: Vec<Vec<f64>>,
    variances: Vec<f64>,
    used: Vec<bool>,
    unused: usize,
    chosen: Vec<usize>,
    values: Vec<f64>,
}

impl InfoGainCurve {
    pub fn new(kernel: KernelSpec, candidates: Vec<Vec<f64>>, noise: f64) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("information gain needs at least one candidate"));
        }
        if !(noise > 0.0) {
            return Err(Error::invalid(format!("noise must be positive, got {noise}")));
        }
        let dim = candidates[0].len();
        if let Some(c) = candidates.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
        }
        let variances = candidates.iter().map(|c| kernel.diag(c)).collect();
        let m = candidates.len();
        Ok(InfoGainCurve {
            kernel,
            noise,
            solves: vec![Vec::new(); m],
            variances,
            used: vec![false; m],
            unused: m,
            candidates,
            chosen: Vec::new(),
            values: Vec::new(),
        })
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    /// Greedy running values `gamma_1, gamma_2, ...` computed so far (nats).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Indices of the greedily chosen candidates, in order.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    /// `gamma_n`, extending the greedy sequence if needed; `gamma_0 = 0`.
    pub fn value(&mut self, n: usize) -> f64 {
        self.extend_to(n);
        if n == 0 {
            0.0
        } else {
            self.values[n - 1]
        }
    }

    pub fn extend_to(&mut self, n: usize) {
        while self.values.len() < n {
            self.step();
        }
    }

    fn step(&mut self) {
        let eta2 = self.noise * self.noise;
        let allow_repeat = self.unused == 0;
        let mut best: Option<usize> = None;
        for (i, &v) in self.variances.iter().enumerate() {
            if !allow_repeat && self.used[i] {
                continue;
            }
            if best.is_none_or(|b| v > self.variances[b]) {
                best = Some(i);
            }
        }
        let pick = best.expect("candidate set is nonempty");
        let var_pick = self.variances[pick].max(0.0);
        let gain = 0.5 * (1.0 + var_pick / eta2).ln();
        let prev = self.values.last().copied().unwrap_or(0.0);
        self.values.push(prev + gain);
        if !self.used[pick] {
            self.used[pick] = true;
            self.unused -= 1;
        }
        self.chosen.push(pick);

        let denom = (var_pick + eta2).sqrt();
        let xp = self.candidates[pick].clone();
        let vp = self.solves[pick].clone();
        for c in 0..self.candidates.len() {
            let cov = self.kernel.eval_unchecked(&self.candidates[c], &xp) - dot(&self.solves[c], &vp);
            let u = cov / denom;
            self.solves[c].push(u);
            self.variances[c] = (self.variances[c] - u * u).max(0.0);
        }
    }
}

/// Greedy information-gain curve of length `n` over `candidates`.
pub fn max_info_gain_greedy(spec: &KernelSpec, candidates: &[Vec<f64>], n: usize, noise: f64) -> Result<InfoGainCurve> {
    if n > candidates.len() {
        return Err(Error::invalid(format!(
            "requested {n} greedy picks from only {} candidates",
            candidates.len()
        )));
    }
    let mut curve = InfoGainCurve::new(*spec, candidates.to_vec(), noise)?;
    curve.extend_to(n);
    Ok(curve)
}
