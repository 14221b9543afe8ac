use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Squared-exponential (ARD) covariance
/// `k(x, x') = s² · exp(-½ Σᵢ ((xᵢ - x'ᵢ) / ℓᵢ)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredExpKernel {
    signal_variance: f64,
    lengthscales: Vec<f64>,
}

impl SquaredExpKernel {
    pub fn new(signal_variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "signal variance must be positive, got {signal_variance}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(Error::InvalidParameter("kernel needs at least one lengthscale".into()));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("lengthscale must be positive, got {bad}")));
        }
        Ok(Self { signal_variance, lengthscales })
    }

    pub fn isotropic(signal_variance: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(signal_variance, vec![lengthscale; dim])
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    /// Same kernel with the variance and every lengthscale multiplied.
    pub fn scaled(&self, variance_factor: f64, lengthscale_factor: f64) -> Result<Self> {
        Self::new(
            self.signal_variance * variance_factor,
            self.lengthscales.iter().map(|l| l * lengthscale_factor).collect(),
        )
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.check(x2)?;
        Ok(self.eval_unchecked(x, x2))
    }

    /// Half the scaled squared distance, `½ Σ ((xᵢ - x'ᵢ)/ℓᵢ)²`.
    #[inline]
    pub(crate) fn half_sq_dist(&self, x: &[f64], x2: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((a, b), l) in x.iter().zip(x2).zip(&self.lengthscales) {
            let d = (a - b) / l;
            acc += d * d;
        }
        0.5 * acc
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.signal_variance * (-self.half_sq_dist(x, x2)).exp()
    }

    /// Cross-covariance matrix with `rows.len()` rows and `cols.len()` columns.
    pub fn matrix(&self, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for p in rows.iter().chain(cols) {
            self.check(p)?;
        }
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.eval_unchecked(&rows[i], &cols[j])
        }))
    }
}

/// Free-function form of [`SquaredExpKernel::eval`].
pub fn kernel_eval(k: &SquaredExpKernel, x: &[f64], x2: &[f64]) -> Result<f64> {
    k.eval(x, x2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_equals_signal_variance() {
        let k = SquaredExpKernel::new(1.0, vec![1.0]).unwrap();
        assert_eq!(k.eval(&[0.0], &[0.0]).unwrap(), 1.0);
        let k = SquaredExpKernel::new(2.0, vec![1.0]).unwrap();
        assert_eq!(k.eval(&[0.0], &[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn unit_distance() {
        let k = SquaredExpKernel::new(1.0, vec![1.0]).unwrap();
        let v = k.eval(&[0.0], &[1.0]).unwrap();
        assert!((v - 0.606_530_659_712_633_4).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_bounded() {
        let k = SquaredExpKernel::new(1.7, vec![0.3, 2.0]).unwrap();
        let a = [0.1, -0.4];
        let b = [0.9, 1.3];
        let ab = k.eval(&a, &b).unwrap();
        assert_eq!(ab, k.eval(&b, &a).unwrap());
        assert!(ab > 0.0 && ab <= 1.7);
    }

    #[test]
    fn rejects_bad_parameters_and_dimensions() {
        assert!(SquaredExpKernel::new(0.0, vec![1.0]).is_err());
        assert!(SquaredExpKernel::new(1.0, vec![1.0, -1.0]).is_err());
        assert!(SquaredExpKernel::new(1.0, vec![]).is_err());
        let k = SquaredExpKernel::new(1.0, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            k.eval(&[0.0], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
