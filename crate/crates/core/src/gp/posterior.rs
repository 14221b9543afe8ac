use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::kernel::SquaredExpKernel;
use super::linalg::{cholesky, CovMatrix};
use crate::error::{Error, Result};

/// Prior mean function of a GP.
#[derive(Clone)]
pub enum PriorMean {
    Constant(f64),
    Function(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl PriorMean {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PriorMean::Constant(c) => *c,
            PriorMean::Function(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PriorMean::Constant(c) if *c == 0.0)
    }
}

impl Default for PriorMean {
    fn default() -> Self {
        PriorMean::Constant(0.0)
    }
}

impl fmt::Debug for PriorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorMean::Constant(c) => write!(f, "Constant({c})"),
            PriorMean::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// GP prior with homoscedastic Gaussian observation noise.
#[derive(Debug, Clone)]
pub struct GpPrior {
    pub mean: PriorMean,
    pub kernel: SquaredExpKernel,
    pub noise_variance: f64,
}

impl GpPrior {
    pub fn new(mean: PriorMean, kernel: SquaredExpKernel, noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be non-negative, got {noise_variance}"
            )));
        }
        Ok(Self { mean, kernel, noise_variance })
    }

    pub fn zero_mean(kernel: SquaredExpKernel, noise_variance: f64) -> Result<Self> {
        Self::new(PriorMean::default(), kernel, noise_variance)
    }
}

/// Joint Gaussian posterior over a set of query points.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub mean: DVector<f64>,
    pub cov: CovMatrix,
}

impl Posterior {
    pub fn variances(&self) -> Vec<f64> {
        self.cov.diagonal()
    }
}

/// Exact GP posterior at `xq` given noisy observations `y` at `x`:
///
/// `μ_S(x) = μ(x) + k_S(x)ᵀ K_S⁻¹ (y - μ_S)` and
/// `k_S(x,x') = k(x,x') - k_S(x)ᵀ K_S⁻¹ k_S(x')`, with `K_S = K + σ²I`.
pub fn posterior(prior: &GpPrior, x: &[Vec<f64>], y: &[f64], xq: &[Vec<f64>]) -> Result<Posterior> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let kqq = prior.kernel.matrix(xq, xq)?;
    let prior_mean = DVector::from_iterator(xq.len(), xq.iter().map(|p| prior.mean.eval(p)));
    if x.is_empty() {
        return Ok(Posterior { mean: prior_mean, cov: CovMatrix::symmetrized(kqq) });
    }

    let mut k = prior.kernel.matrix(x, x)?;
    for i in 0..x.len() {
        k[(i, i)] += prior.noise_variance;
    }
    let (chol, _) = cholesky(&k, 0.0)?;
    let resid = DVector::from_iterator(y.len(), x.iter().zip(y).map(|(p, v)| v - prior.mean.eval(p)));
    let alpha = chol.solve(&resid);
    let kxq: DMatrix<f64> = prior.kernel.matrix(x, xq)?;
    let mean = prior_mean + kxq.transpose() * alpha;
    let mut v = kxq;
    // only the lower triangle of l_dirty is read
    chol.l_dirty().solve_lower_triangular_mut(&mut v);
    let cov = kqq - v.transpose() * v;
    Ok(Posterior { mean, cov: CovMatrix::symmetrized(cov) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_prior(noise: f64) -> GpPrior {
        GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![1.0]).unwrap(), noise).unwrap()
    }

    #[test]
    fn empty_conditioning_returns_prior() {
        let prior = GpPrior::new(
            PriorMean::Constant(2.5),
            SquaredExpKernel::new(1.3, vec![0.5]).unwrap(),
            0.1,
        )
        .unwrap();
        let xq = vec![vec![0.0], vec![0.3]];
        let post = posterior(&prior, &[], &[], &xq).unwrap();
        assert_eq!(post.mean.as_slice(), &[2.5, 2.5]);
        let k = prior.kernel.matrix(&xq, &xq).unwrap();
        assert!((post.cov.as_matrix() - k).abs().max() < 1e-15);
    }

    #[test]
    fn one_point_scalar_algebra() {
        let prior = unit_prior(0.25);
        let y0 = 3.0;
        let post = posterior(&prior, &[vec![0.0]], &[y0], &[vec![0.0]]).unwrap();
        assert!((post.mean[0] - 0.8 * y0).abs() < 1e-12);
        assert!((post.cov.as_matrix()[(0, 0)] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn duplicated_queries_give_identical_rows() {
        let prior = unit_prior(0.1);
        let x = vec![vec![0.0], vec![1.0]];
        let xq = vec![vec![0.4], vec![0.4], vec![2.0]];
        let post = posterior(&prior, &x, &[1.0, -1.0], &xq).unwrap();
        let c = post.cov.as_matrix();
        assert_eq!(post.mean[0], post.mean[1]);
        for j in 0..3 {
            assert_eq!(c[(0, j)], c[(1, j)]);
        }
    }

    #[test]
    fn interpolates_without_noise() {
        let prior = unit_prior(0.0);
        let x = vec![vec![-1.0], vec![0.5], vec![2.0]];
        let y = [0.3, -1.2, 0.7];
        let post = posterior(&prior, &x, &y, &x).unwrap();
        for (i, yi) in y.iter().enumerate() {
            assert!((post.mean[i] - yi).abs() < 1e-8);
            assert!(post.cov.as_matrix()[(i, i)] < 1e-8);
        }
    }

    #[test]
    fn mismatched_lengths_error() {
        let prior = unit_prior(0.0);
        assert!(posterior(&prior, &[vec![0.0]], &[], &[vec![0.0]]).is_err());
    }
}
