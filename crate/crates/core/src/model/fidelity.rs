use crate::error::{Error, Result};
use crate::gp::{GpPrior, SquaredExpKernel};

/// A query of fidelity `fidelity` at point `x`.
///
/// Fidelities are indexed from 0; index `m - 1` is the target. File formats
/// written by the harness use 1-based fidelity numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub x: Vec<f64>,
    pub fidelity: usize,
}

impl Action {
    pub fn new(x: Vec<f64>, fidelity: usize) -> Self {
        Self { x, fidelity }
    }
}

/// An action together with its noisy outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub action: Action,
    pub y: f64,
}

impl Observation {
    pub fn new(action: Action, y: f64) -> Self {
        Self { action, y }
    }
}

/// Additive multi-fidelity GP: the target is `f ~ GP(μ, k_f)` and fidelity
/// `ℓ < m` observes `u_ℓ = f + ε_ℓ` with independent zero-mean `ε_ℓ ~ GP(0, k_ℓ)`.
///
/// Observation noise at the target fidelity is `target.noise_variance`; at a
/// lower fidelity `ℓ` it is `errors[ℓ].noise_variance`.
#[derive(Debug, Clone)]
pub struct FidelityModel {
    target: GpPrior,
    errors: Vec<GpPrior>,
    costs: Vec<f64>,
}

impl FidelityModel {
    pub fn new(target: GpPrior, errors: Vec<GpPrior>, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != errors.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} costs given for {} fidelities",
                costs.len(),
                errors.len() + 1
            )));
        }
        if let Some(c) = costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(format!("costs must be positive, got {c}")));
        }
        let dim = target.kernel.dim();
        for (l, e) in errors.iter().enumerate() {
            if !e.mean.is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "error process {l} must have a zero mean"
                )));
            }
            if e.kernel.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.kernel.dim() });
            }
        }
        Ok(Self { target, errors, costs })
    }

    /// A model with only the target fidelity.
    pub fn single(target: GpPrior, cost: f64) -> Result<Self> {
        Self::new(target, Vec::new(), vec![cost])
    }

    /// Number of fidelities `m`.
    pub fn m(&self) -> usize {
        self.costs.len()
    }

    pub fn target_index(&self) -> usize {
        self.m() - 1
    }

    pub fn is_target(&self, fidelity: usize) -> bool {
        fidelity == self.target_index()
    }

    pub fn dim(&self) -> usize {
        self.target.kernel.dim()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, fidelity: usize) -> f64 {
        self.costs[fidelity]
    }

    pub fn target_cost(&self) -> f64 {
        self.costs[self.target_index()]
    }

    pub fn target_prior(&self) -> &GpPrior {
        &self.target
    }

    pub fn error_priors(&self) -> &[GpPrior] {
        &self.errors
    }

    pub fn error_kernel(&self, fidelity: usize) -> Option<&SquaredExpKernel> {
        self.errors.get(fidelity).map(|e| &e.kernel)
    }

    pub fn noise_variance(&self, fidelity: usize) -> f64 {
        if self.is_target(fidelity) {
            self.target.noise_variance
        } else {
            self.errors[fidelity].noise_variance
        }
    }

    pub fn prior_mean(&self, x: &[f64]) -> f64 {
        self.target.mean.eval(x)
    }

    pub fn check_action(&self, a: &Action) -> Result<()> {
        if a.fidelity >= self.m() {
            return Err(Error::FidelityOutOfRange { fidelity: a.fidelity, m: self.m() });
        }
        if a.x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.x.len() });
        }
        Ok(())
    }

    /// `k_f(x, x')`.
    #[inline]
    pub(crate) fn k_target(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.target.kernel.eval_unchecked(x, x2)
    }

    /// `k_ℓ(x, x')` of the error process, zero for the target fidelity.
    #[inline]
    pub(crate) fn k_error(&self, fidelity: usize, x: &[f64], x2: &[f64]) -> f64 {
        match self.errors.get(fidelity) {
            Some(e) => e.kernel.eval_unchecked(x, x2),
            None => 0.0,
        }
    }

    /// Noise-free covariance between the observable outcomes of two actions.
    #[inline]
    pub(crate) fn k_observable(&self, a: &Action, b: &Action) -> f64 {
        let mut k = self.k_target(&a.x, &b.x);
        if a.fidelity == b.fidelity {
            k += self.k_error(a.fidelity, &a.x, &b.x);
        }
        k
    }
}

/// Covariance between outcomes `y_a` and `y_b` under the additive model,
/// `k_f(x_a,x_b) + [ℓ_a = ℓ_b < m]·k_ℓ(x_a,x_b) + [same_obs]·σ²_ℓ`.
pub fn joint_cov(model: &FidelityModel, a: &Action, b: &Action, same_obs: bool) -> f64 {
    let mut k = model.k_observable(a, b);
    if same_obs {
        k += model.noise_variance(a.fidelity);
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::PriorMean;

    fn two_fidelity() -> FidelityModel {
        let target = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.5]).unwrap(), 0.1).unwrap();
        let err = GpPrior::zero_mean(SquaredExpKernel::new(0.3, vec![0.2]).unwrap(), 0.05).unwrap();
        FidelityModel::new(target, vec![err], vec![1.0, 4.0]).unwrap()
    }

    #[test]
    fn target_pair_uses_target_kernel_only() {
        let m = two_fidelity();
        let a = Action::new(vec![0.2], 1);
        assert_eq!(joint_cov(&m, &a, &a, false), 1.0);
        assert_eq!(joint_cov(&m, &a, &a, true), 1.1);
    }

    #[test]
    fn same_low_fidelity_adds_error_kernel() {
        let m = two_fidelity();
        let a = Action::new(vec![0.2], 0);
        assert!((joint_cov(&m, &a, &a, false) - 1.3).abs() < 1e-15);
        assert!((joint_cov(&m, &a, &a, true) - 1.35).abs() < 1e-15);
    }

    #[test]
    fn cross_fidelity_shares_only_target() {
        let m = two_fidelity();
        let a = Action::new(vec![0.2], 0);
        let b = Action::new(vec![0.7], 1);
        let kf = m.target_prior().kernel.eval(&[0.2], &[0.7]).unwrap();
        assert_eq!(joint_cov(&m, &a, &b, false), kf);
    }

    #[test]
    fn validation() {
        let target = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.5]).unwrap(), 0.1).unwrap();
        let biased = GpPrior::new(
            PriorMean::Constant(1.0),
            SquaredExpKernel::new(1.0, vec![0.5]).unwrap(),
            0.0,
        )
        .unwrap();
        assert!(FidelityModel::new(target.clone(), vec![biased], vec![1.0, 2.0]).is_err());
        assert!(FidelityModel::new(target.clone(), vec![], vec![1.0, 2.0]).is_err());
        assert!(FidelityModel::single(target.clone(), 0.0).is_err());
        let m = FidelityModel::single(target, 2.0).unwrap();
        assert!(m.check_action(&Action::new(vec![0.0], 1)).is_err());
        assert!(m.check_action(&Action::new(vec![0.0, 1.0], 0)).is_err());
    }
}
