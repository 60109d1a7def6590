//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use duelopt::gp::KernelSpec;
use nalgebra::{DMatrix, DVector};

/// Gram matrix `K(X, X)` built from the public kernel evaluation.
pub fn gram(kernel: &KernelSpec, xs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = xs.len();
    DMatrix::from_fn(n, n, |i, j| kernel.eval(&xs[i], &xs[j]).unwrap())
}

/// Posterior mean and variance by a dense LU solve of `(K + noise^2 I)`.
pub fn dense_posterior(
    kernel: &KernelSpec,
    noise: f64,
    prior_mean: f64,
    xs: &[Vec<f64>],
    ys: &[f64],
    x: &[f64],
) -> (f64, f64) {
    let n = xs.len();
    let kxx = kernel.eval(x, x).unwrap();
    if n == 0 {
        return (prior_mean, kxx);
    }
    let a = gram(kernel, xs) + DMatrix::identity(n, n) * (noise * noise);
    let lu = a.lu();
    let kx = DVector::from_iterator(n, xs.iter().map(|p| kernel.eval(x, p).unwrap()));
    let resid = DVector::from_iterator(n, ys.iter().map(|y| y - prior_mean));
    let w = lu.solve(&resid).unwrap();
    let v = lu.solve(&kx).unwrap();
    (prior_mean + kx.dot(&w), kxx - kx.dot(&v))
}

/// `-1/2 y^T A^{-1} y - 1/2 log det A - n/2 log 2 pi` with `A = K + noise^2 I`.
pub fn dense_log_marginal_likelihood(kernel: &KernelSpec, noise: f64, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let n = xs.len();
    let a = gram(kernel, xs) + DMatrix::identity(n, n) * (noise * noise);
    let y = DVector::from_column_slice(ys);
    let lu = a.clone().lu();
    let w = lu.solve(&y).unwrap();
    -0.5 * y.dot(&w) - 0.5 * lu.determinant().ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

/// Information gain `1/2 log det(I + noise^-2 K_A)` of a point set.
pub fn info_gain_of(kernel: &KernelSpec, noise: f64, points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let m = DMatrix::identity(n, n) + gram(kernel, points) / (noise * noise);
    0.5 * m.determinant().ln()
}

/// High-fidelity Currin exponential function, written out directly.
pub fn currin_high(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let factor = if b > 0.0 { 1.0 - (-1.0 / (2.0 * b)).exp() } else { 1.0 };
    factor * (2300.0 * a.powi(3) + 1900.0 * a * a + 2092.0 * a + 60.0) / (100.0 * a.powi(3) + 500.0 * a * a + 4.0 * a + 20.0)
}

/// Low-fidelity Currin: average of the high-fidelity function on a +-0.05 stencil.
pub fn currin_low(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let h = 0.05;
    let bm = (b - h).max(0.0);
    0.25 * (currin_high(&[a + h, b + h]) + currin_high(&[a + h, bm]) + currin_high(&[a - h, b + h]) + currin_high(&[a - h, bm]))
}

/// Standard logistic function.
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
