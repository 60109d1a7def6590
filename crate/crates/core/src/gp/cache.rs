//! Memoized posterior queries for repeatedly probed points.
//!
//! Acquisition searches on the unit cube revisit the same lattice centers
//! step after step. For such a point the solve `L^{-1} k(x, X)` only needs
//! the rows added since the last visit, so a revisit costs `O(n)` per new
//! observation instead of a full `O(n^2)` substitution. Results are exact.

use std::collections::HashMap;

use super::posterior::{dot, GpPosterior, PartialSolve};

/// Entries are dropped wholesale once this many cached floats accumulate.
const DEFAULT_CAPACITY: usize = 20_000_000;

type Key = Vec<u64>;

fn key_of(x: &[f64]) -> Key {
    x.iter().map(|c| c.to_bits()).collect()
}

#[derive(Debug)]
pub struct QueryCache {
    entries: HashMap<Key, PartialSolve>,
    epoch: Option<u64>,
    floats: usize,
    capacity: usize,
}

impl Default for QueryCache {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_CAPACITY)
    }
}

impl QueryCache {
    pub fn with_capacity(capacity: usize) -> Self {
        QueryCache {
            entries: HashMap::new(),
            epoch: None,
            floats: 0,
            capacity,
        }
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.floats = 0;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn sync(&mut self, gp: &GpPosterior) {
        if self.epoch != Some(gp.factor_epoch()) || self.floats > self.capacity {
            self.clear();
            self.epoch = Some(gp.factor_epoch());
        }
    }

    fn finish(gp: &GpPosterior, x: &[f64], s: &PartialSolve) -> (f64, f64) {
        let mean = gp.prior_mean() + dot(&s.v, gp.alpha());
        let var = (gp.kernel().diag(x) - s.vv).max(0.0);
        (mean, var.sqrt())
    }

    /// Posterior mean and standard deviation of `gp` at `x`; `x` must have `gp.dim()` entries.
    pub fn mean_sd(&mut self, gp: &GpPosterior, x: &[f64]) -> (f64, f64) {
        self.sync(gp);
        let entry = self.entries.entry(key_of(x)).or_default();
        let before = entry.v.len();
        gp.extend_solve(x, &mut entry.v, &mut entry.vv);
        self.floats += entry.v.len() - before;
        Self::finish(gp, x, entry)
    }

    /// [`mean_sd`](Self::mean_sd) for each point of `xs`, pushed onto `out` in order.
    pub fn mean_sd_batch(&mut self, gp: &GpPosterior, xs: &[Vec<f64>], out: &mut Vec<(f64, f64)>) {
        self.sync(gp);
        let n = gp.len();
        let keys: Vec<Key> = xs.iter().map(|x| key_of(x)).collect();
        // Stale entries leave the map while they are extended together.
        let mut work: Vec<(usize, PartialSolve)> = Vec::new();
        let mut pending: HashMap<&Key, usize> = HashMap::new();
        for (i, key) in keys.iter().enumerate() {
            if pending.contains_key(key) || self.entries.get(key).is_some_and(|e| e.v.len() == n) {
                continue;
            }
            let entry = self.entries.remove(key).unwrap_or_default();
            self.floats -= entry.v.len();
            pending.insert(key, work.len());
            work.push((i, entry));
        }
        {
            let mut jobs: Vec<(&[f64], &mut PartialSolve)> =
                work.iter_mut().map(|(i, s)| (xs[*i].as_slice(), s)).collect();
            gp.extend_solve_batch(&mut jobs);
        }
        for (x, key) in xs.iter().zip(&keys) {
            let s = match pending.get(key) {
                Some(&j) => &work[j].1,
                None => &self.entries[key],
            };
            out.push(Self::finish(gp, x, s));
        }
        drop(pending);
        for (i, entry) in work {
            self.floats += entry.v.len();
            self.entries.insert(keys[i].clone(), entry);
        }
    }
}
