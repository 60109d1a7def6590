//! Gaussian-process posterior with an incrementally extended Cholesky factor.
//!
//! The factor of `K + noise^2 I` is stored packed and row-major, so appending
//! an observation adds one row in `O(n^2)` and a mean/variance query costs a
//! single forward substitution.

use crate::error::{check_dim, Error, Result};
use crate::gp::kernel::KernelSpec;

/// Negative variances above this are treated as round-off and clamped to zero.
const VARIANCE_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: KernelSpec,
    noise: f64,
    prior_mean: f64,
    dim: usize,
    points: Vec<f64>,
    targets: Vec<f64>,
    chol: Vec<f64>,
    /// `L^{-1} (y - prior_mean)`
    alpha: Vec<f64>,
    jitter: f64,
    rebuilds: usize,
    /// Bumped whenever existing rows of the factor change.
    factor_epoch: u64,
}

impl GpPosterior {
    /// Empty posterior (the prior) over `dim`-dimensional inputs.
    pub fn new(kernel: KernelSpec, noise: f64, dim: usize) -> Result<Self> {
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::invalid(format!("observation noise must be positive, got {noise}")));
        }
        if dim == 0 {
            return Err(Error::invalid("input dimension must be at least 1"));
        }
        Ok(GpPosterior {
            kernel,
            noise,
            prior_mean: 0.0,
            dim,
            points: Vec::new(),
            targets: Vec::new(),
            chol: Vec::new(),
            alpha: Vec::new(),
            jitter: 0.0,
            rebuilds: 0,
            factor_epoch: 0,
        })
    }

    /// Posterior conditioned on a batch of observations, factorized from scratch.
    pub fn from_data(kernel: KernelSpec, noise: f64, xs: &[Vec<f64>], ys: &[f64]) -> Result<Self> {
        check_dim(xs.len(), ys.len())?;
        let dim = xs.first().map_or(1, Vec::len);
        let mut gp = Self::new(kernel, noise, dim)?;
        for x in xs {
            check_dim(dim, x.len())?;
            gp.points.extend_from_slice(x);
        }
        gp.targets.extend_from_slice(ys);
        gp.refactor();
        Ok(gp)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// How many times a numerical breakdown forced a full refactorization.
    pub fn rebuild_count(&self) -> usize {
        self.rebuilds
    }

    pub(crate) fn factor_epoch(&self) -> u64 {
        self.factor_epoch
    }

    pub(crate) fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Continues the forward solve `L v = k(x, X)` from `v.len()` to the
    /// current size, accumulating `v.v` into `vv`. Valid only while the
    /// factor epoch is unchanged since `v` was started.
    pub(crate) fn extend_solve(&self, x: &[f64], v: &mut Vec<f64>, vv: &mut f64) {
        for i in v.len()..self.len() {
            let start = row_start(i);
            let row = &self.chol[start..start + i];
            let vi = (self.kernel.eval_unchecked(x, self.point(i)) - dot(row, v)) / self.chol[start + i];
            *vv += vi * vi;
            v.push(vi);
        }
    }

    /// [`extend_solve`](Self::extend_solve) for several points at once. Each
    /// factor row is read once for the whole batch; results are bitwise equal
    /// to the one-point version.
    pub(crate) fn extend_solve_batch(&self, jobs: &mut [(&[f64], &mut PartialSolve)]) {
        let Some(lo) = jobs.iter().map(|(_, s)| s.v.len()).min() else {
            return;
        };
        for i in lo..self.len() {
            let start = row_start(i);
            let row = &self.chol[start..start + i];
            let diag = self.chol[start + i];
            let p = self.point(i);
            for (x, s) in jobs.iter_mut() {
                if s.v.len() == i {
                    let vi = (self.kernel.eval_unchecked(x, p) - dot(row, &s.v)) / diag;
                    s.vv += vi * vi;
                    s.v.push(vi);
                }
            }
        }
    }

    /// Replaces the kernel and refactorizes.
    pub fn set_kernel(&mut self, kernel: KernelSpec) {
        self.kernel = kernel;
        self.jitter = 0.0;
        self.refactor();
    }

    /// Sets a constant prior mean; the factor is unchanged, only the weights move.
    pub fn set_prior_mean(&mut self, mean: f64) {
        self.prior_mean = mean;
        self.recompute_alpha();
    }

    /// Posterior mean and variance at `x`.
    pub fn query(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim, x.len())?;
        Ok(self.query_unchecked(x))
    }

    pub(crate) fn query_unchecked(&self, x: &[f64]) -> (f64, f64) {
        let prior_var = self.kernel.diag(x);
        if self.is_empty() {
            return (self.prior_mean, prior_var);
        }
        let mut v: Vec<f64> = self.points().map(|p| self.kernel.eval_unchecked(x, p)).collect();
        self.forward_solve(&mut v);
        let mean = self.prior_mean + dot(&v, &self.alpha);
        let mut var = prior_var - dot(&v, &v);
        if var < 0.0 {
            debug_assert!(var > -VARIANCE_CLAMP * prior_var.max(1.0), "variance {var} far below zero");
            var = 0.0;
        }
        (mean, var)
    }

    /// Posterior mean and standard deviation at `x` (dimension unchecked).
    #[cfg(test)]
    pub(crate) fn mean_sd(&self, x: &[f64]) -> (f64, f64) {
        let (m, v) = self.query_unchecked(x);
        (m, v.sqrt())
    }

    /// Conditions on one more observation via a one-row extension of the factor.
    pub fn append(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_dim(self.dim, x.len())?;
        let n = self.len();
        let mut row: Vec<f64> = self.points().map(|p| self.kernel.eval_unchecked(x, p)).collect();
        self.forward_solve(&mut row);
        let d2 = self.kernel.diag(x) + self.noise * self.noise + self.jitter - dot(&row, &row);
        self.points.extend_from_slice(x);
        self.targets.push(y);
        if !(d2 > 1e-12 * (self.kernel.scale() + self.noise * self.noise)) || !d2.is_finite() {
            self.rebuilds += 1;
            self.refactor();
            return Ok(());
        }
        let d = d2.sqrt();
        let a = (y - self.prior_mean - dot(&row, &self.alpha)) / d;
        debug_assert_eq!(self.chol.len(), n * (n + 1) / 2);
        self.chol.extend_from_slice(&row);
        self.chol.push(d);
        self.alpha.push(a);
        Ok(())
    }

    /// Log marginal likelihood of the current targets (after removing the prior mean).
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len();
        let log_det: f64 = (0..n).map(|i| self.chol[row_start(i) + i].ln()).sum();
        -0.5 * dot(&self.alpha, &self.alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }

    fn refactor(&mut self) {
        self.factor_epoch += 1;
        loop {
            match cholesky_packed(&self.kernel, &self.points, self.dim, self.noise * self.noise + self.jitter) {
                Some(l) => {
                    self.chol = l;
                    break;
                }
                None => {
                    self.jitter = if self.jitter == 0.0 {
                        1e-10 * (self.kernel.scale() + self.noise * self.noise)
                    } else {
                        self.jitter * 10.0
                    };
                }
            }
        }
        self.recompute_alpha();
    }

    fn recompute_alpha(&mut self) {
        let mut a: Vec<f64> = self.targets.iter().map(|y| y - self.prior_mean).collect();
        self.forward_solve(&mut a);
        self.alpha = a;
    }

    /// Solves `L v = b` in place.
    fn forward_solve(&self, b: &mut [f64]) {
        for i in 0..b.len() {
            let start = row_start(i);
            let row = &self.chol[start..start + i];
            b[i] = (b[i] - dot(row, &b[..i])) / self.chol[start + i];
        }
    }
}

/// A forward solve `L v = k(x, X)` carried out over a prefix of the rows.
#[derive(Debug, Clone, Default)]
pub(crate) struct PartialSolve {
    pub v: Vec<f64>,
    /// `v . v`
    pub vv: f64,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Packed row-major Cholesky factor of `K + diag_add * I`; `None` on breakdown.
fn cholesky_packed(kernel: &KernelSpec, points: &[f64], dim: usize, diag_add: f64) -> Option<Vec<f64>> {
    let n = points.len() / dim;
    let mut l = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let xi = &points[i * dim..(i + 1) * dim];
        let si = row_start(i);
        for j in 0..=i {
            let xj = &points[j * dim..(j + 1) * dim];
            let sj = row_start(j);
            let mut s = kernel.eval_unchecked(xi, xj);
            if i == j {
                s += diag_add;
            }
            s -= dot(&l[si..si + j], &l[sj..sj + j]);
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[si + i] = s.sqrt();
            } else {
                l[si + j] = s / l[sj + j];
            }
        }
    }
    Some(l)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Free-function form of [`GpPosterior::query`].
pub fn posterior_query(gp: &GpPosterior, x: &[f64]) -> Result<(f64, f64)> {
    gp.query(x)
}

/// Returns a copy of `gp` conditioned on `(x, y)`.
pub fn posterior_append(gp: &GpPosterior, x: &[f64], y: f64) -> Result<GpPosterior> {
    let mut next = gp.clone();
    next.append(x, y)?;
    Ok(next)
}

/// Zero-mean log marginal likelihood of `ys` under `spec` with noise `noise`.
pub fn log_marginal_likelihood(xs: &[Vec<f64>], ys: &[f64], spec: &KernelSpec, noise: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("log marginal likelihood needs at least one observation"));
    }
    Ok(GpPosterior::from_data(*spec, noise, xs, ys)?.log_marginal_likelihood())
}
