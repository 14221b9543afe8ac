use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::design::Design;
use super::fidelity::{Action, FidelityModel, Observation};
use crate::error::{Error, Result};
use crate::gp::{CovMatrix, Posterior};

/// Ordered observation log with a cached factorization of the joint
/// covariance of its outcomes.
///
/// A `History` is a value: [`History::update`] returns a new snapshot and
/// leaves `self` untouched. [`History::push`] is the in-place variant used by
/// the policies.
#[derive(Debug, Clone)]
pub struct History {
    design: Design,
    y: Vec<f64>,
}

impl History {
    pub fn new(model: Arc<FidelityModel>) -> Self {
        Self { design: Design::new(model), y: Vec::new() }
    }

    pub fn from_observations(model: Arc<FidelityModel>, obs: &[Observation]) -> Result<Self> {
        let mut h = Self::new(model);
        for o in obs {
            h.push(o.clone())?;
        }
        Ok(h)
    }

    /// Tracks per-candidate posterior quantities for a fixed candidate set.
    pub fn with_candidates(mut self, points: Arc<Vec<Vec<f64>>>) -> Result<Self> {
        self.design.attach_candidates(points)?;
        Ok(self)
    }

    pub fn model(&self) -> &Arc<FidelityModel> {
        self.design.model()
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        self.design.actions()
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.design.actions().iter().zip(&self.y).map(|(a, y)| Observation::new(a.clone(), *y))
    }

    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if !obs.y.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite observation {}", obs.y)));
        }
        self.design.push(obs.action)?;
        self.y.push(obs.y);
        Ok(())
    }

    /// Appends outcomes for actions that `design` already holds beyond the
    /// current history, reusing its factorization.
    pub(crate) fn extend_from_design(&mut self, design: Design, ys: &[f64]) -> Result<()> {
        let n = self.y.len();
        if design.len() != n + ys.len() || design.actions()[..n] != *self.design.actions() {
            return Err(Error::InvalidParameter("design does not extend this history".into()));
        }
        if let Some(v) = ys.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite observation {v}")));
        }
        self.design = design;
        self.y.extend_from_slice(ys);
        Ok(())
    }

    /// Snapshot with `obs` appended.
    pub fn update(&self, obs: Observation) -> Result<Self> {
        let mut next = self.clone();
        next.push(obs)?;
        Ok(next)
    }

    /// Same observations under a different model (e.g. after refitting
    /// hyperparameters).
    pub fn with_model(&self, model: Arc<FidelityModel>) -> Result<Self> {
        Ok(Self { design: self.design.with_model(model)?, y: self.y.clone() })
    }

    /// `L⁻¹ (y - μ)` for the joint factor `L`.
    fn whitened_residuals(&self) -> Vec<f64> {
        let model = self.model();
        let r: Vec<f64> = self
            .design
            .actions()
            .iter()
            .zip(&self.y)
            .map(|(a, y)| y - model.prior_mean(&a.x))
            .collect();
        self.design.joint_factor().solve_lower(&r)
    }

    /// Exact joint posterior of the target function `f` at `xq` given every
    /// observation in the history, whatever its fidelity.
    pub fn predict_latent(&self, xq: &[Vec<f64>]) -> Result<Posterior> {
        let model = self.model();
        if let Some(p) = xq.iter().find(|p| p.len() != model.dim()) {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: p.len() });
        }
        let z = self.whitened_residuals();
        let factor = self.design.joint_factor();
        let projections: Vec<Vec<f64>> = xq
            .iter()
            .map(|q| {
                let k: Vec<f64> =
                    self.design.actions().iter().map(|a| model.k_target(&a.x, q)).collect();
                factor.solve_lower(&k)
            })
            .collect();
        let q = xq.len();
        let mean = DVector::from_iterator(
            q,
            xq.iter().zip(&projections).map(|(p, v)| {
                model.prior_mean(p) + v.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
            }),
        );
        let cov = DMatrix::from_fn(q, q, |i, j| {
            model.k_target(&xq[i], &xq[j])
                - projections[i].iter().zip(&projections[j]).map(|(a, b)| a * b).sum::<f64>()
        });
        Ok(Posterior { mean, cov: CovMatrix::symmetrized(cov) })
    }

    /// Posterior mean and variance of the noisy outcome of `a`.
    pub fn predict_observable(&self, a: &Action) -> Result<(f64, f64)> {
        let model = self.model();
        model.check_action(a)?;
        let k: Vec<f64> = self.design.actions().iter().map(|b| model.k_observable(b, a)).collect();
        let v = self.design.joint_factor().solve_lower(&k);
        let z = self.whitened_residuals();
        let mean = model.prior_mean(&a.x) + v.iter().zip(&z).map(|(p, q)| p * q).sum::<f64>();
        Ok((mean, self.design.observable_variance(a)))
    }

    pub fn info_gain_single(&self, a: &Action) -> Result<f64> {
        self.design.info_gain_single(a)
    }

    pub fn info_gain_set(&self, e: &[Action]) -> Result<f64> {
        self.design.info_gain_set(e)
    }

    /// Joint log marginal likelihood `log p(y_S)` under the current model.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let z = self.whitened_residuals();
        let n = z.len() as f64;
        -0.5 * z.iter().map(|v| v * v).sum::<f64>()
            - 0.5 * self.design.joint_factor().logdet()
            - 0.5 * n * (2.0 * PI).ln()
    }

    /// Posterior mean and variance of `f` at every tracked candidate.
    pub fn candidate_latent(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let vars = self.design.candidate_latent_variances()?;
        let points = self.design.candidates().ok_or(Error::EmptyCandidates)?;
        let model = self.model();
        let mut means: Vec<f64> = points.iter().map(|p| model.prior_mean(p)).collect();
        for (i, zi) in self.whitened_residuals().into_iter().enumerate() {
            let row = self.design.candidate_latent_projection(i)?;
            for (m, r) in means.iter_mut().zip(row) {
                *m += zi * r;
            }
        }
        Ok((means, vars))
    }
}
