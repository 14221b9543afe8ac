//! Reference computations written independently of the library internals.

#![allow(dead_code)]

use mfbo::gp::SquaredExpKernel;
use mfbo::model::{Action, FidelityModel};
use nalgebra::{DMatrix, DVector};

/// Squared-exponential kernel evaluated from its definition.
pub fn se(k: &SquaredExpKernel, x: &[f64], y: &[f64]) -> f64 {
    let r2: f64 = x.iter().zip(y).zip(k.lengthscales()).map(|((a, b), l)| ((a - b) / l).powi(2)).sum();
    k.signal_variance() * (-0.5 * r2).exp()
}

/// Posterior mean and covariance through an explicit inverse.
pub fn dense_posterior(
    k: &SquaredExpKernel,
    mean: f64,
    noise: f64,
    x: &[Vec<f64>],
    y: &[f64],
    xq: &[Vec<f64>],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let q = xq.len();
    let kxx = DMatrix::from_fn(n, n, |i, j| se(k, &x[i], &x[j]) + if i == j { noise } else { 0.0 });
    let kqx = DMatrix::from_fn(q, n, |i, j| se(k, &xq[i], &x[j]));
    let kqq = DMatrix::from_fn(q, q, |i, j| se(k, &xq[i], &xq[j]));
    let inv = kxx.try_inverse().expect("invertible");
    let resid = DVector::from_iterator(n, y.iter().map(|v| v - mean));
    (DVector::from_element(q, mean) + &kqx * &inv * resid, kqq - &kqx * &inv * kqx.transpose())
}

fn conditional(
    k: &dyn Fn(&Action, &Action) -> f64,
    noise: &dyn Fn(&Action) -> f64,
    s: &[Action],
    e: &[Action],
) -> DMatrix<f64> {
    let kee = DMatrix::from_fn(e.len(), e.len(), |i, j| k(&e[i], &e[j]) + if i == j { noise(&e[i]) } else { 0.0 });
    if s.is_empty() {
        return kee;
    }
    let kss = DMatrix::from_fn(s.len(), s.len(), |i, j| k(&s[i], &s[j]) + if i == j { noise(&s[i]) } else { 0.0 });
    let kes = DMatrix::from_fn(e.len(), s.len(), |i, j| k(&e[i], &s[j]));
    kee - &kes * kss.try_inverse().expect("invertible") * kes.transpose()
}

/// `I(y_E; f | y_S)` as half the log ratio of the determinants of
/// `Cov(y_E | y_S)` and `Cov(y_E | f, y_S)`.
pub fn info_gain(model: &FidelityModel, s: &[Action], e: &[Action]) -> f64 {
    let target = model.target_index();
    let err = |a: &Action, b: &Action| {
        if a.fidelity == b.fidelity && a.fidelity < target {
            se(model.error_kernel(a.fidelity).unwrap(), &a.x, &b.x)
        } else {
            0.0
        }
    };
    let full = |a: &Action, b: &Action| se(&model.target_prior().kernel, &a.x, &b.x) + err(a, b);
    let noise = |a: &Action| model.noise_variance(a.fidelity);
    let num = conditional(&full, &noise, s, e).determinant();
    let den = conditional(&err, &noise, s, e).determinant();
    0.5 * (num / den).ln()
}
