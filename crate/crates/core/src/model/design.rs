use std::sync::Arc;

use nalgebra::DMatrix;

use super::fidelity::{Action, FidelityModel};
use crate::error::{Error, Result};
use crate::gp::{chol_logdet, CovMatrix, IncrementalCholesky, JITTER_LADDER};

/// Full refactorization interval, in appended actions.
pub const REBUILD_EVERY: usize = 25;

/// Target-function variance below which an action is treated as carrying
/// no information.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// Factorized covariance of a set of queried locations under a
/// [`FidelityModel`]. Observed values are not needed: for Gaussian models
/// every information quantity depends only on where, and at which fidelity,
/// observations were taken.
///
/// Two families of factors are kept:
/// * the joint factor of `Cov(y_S)` (all fidelities, noise on the diagonal);
/// * one factor per lower fidelity `ℓ` of `Cov(ε_ℓ(x_s) + noise)` over the
///   actions taken at `ℓ`. Once `f` is known, those are the only remaining
///   uncertainty in `y_S`, which is what `H(y | f, y_S)` needs.
///
/// An optional candidate cache keeps `L⁻¹ K(S, c)` for a fixed candidate
/// set, so that per-candidate variances and information gains are O(1)
/// after an O(|S|·|C|) update per appended action.
#[derive(Debug, Clone)]
pub struct Design {
    model: Arc<FidelityModel>,
    actions: Vec<Action>,
    joint: IncrementalCholesky,
    errors: Vec<ErrorFactor>,
    since_rebuild: usize,
    cache: Option<CandidateCache>,
}

#[derive(Debug, Clone, Default)]
struct ErrorFactor {
    members: Vec<usize>,
    chol: IncrementalCholesky,
}

/// Rows of `L⁻¹ K(S, C)` stored row-major, plus per-candidate column norms.
#[derive(Debug, Clone)]
struct Projection {
    rows: Vec<f64>,
    sq: Vec<f64>,
}

impl Projection {
    fn new(n_candidates: usize) -> Self {
        Self { rows: Vec::new(), sq: vec![0.0; n_candidates] }
    }

    /// Appends the projection row for a new factor row `factor_row`
    /// (length `n + 1`) given the raw covariances `k` with each candidate.
    fn push_row(&mut self, factor_row: &[f64], mut k: Vec<f64>) {
        let width = self.sq.len();
        let n = factor_row.len() - 1;
        for (i, &r) in factor_row[..n].iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            let row = &self.rows[i * width..(i + 1) * width];
            for (acc, v) in k.iter_mut().zip(row) {
                *acc -= r * v;
            }
        }
        let pivot = factor_row[n];
        for (acc, sq) in k.iter_mut().zip(self.sq.iter_mut()) {
            *acc /= pivot;
            *sq += *acc * *acc;
        }
        self.rows.extend_from_slice(&k);
    }

    fn row(&self, i: usize) -> &[f64] {
        let width = self.sq.len();
        &self.rows[i * width..(i + 1) * width]
    }
}

#[derive(Debug, Clone)]
struct CandidateCache {
    points: Arc<Vec<Vec<f64>>>,
    /// One per fidelity; the target entry doubles as the latent projection
    /// because `Cov(f(c), y_s) = k_f(c, x_s)`.
    joint: Vec<Projection>,
    /// One per lower fidelity.
    errors: Vec<Projection>,
}

fn next_jitter(current: f64) -> Option<f64> {
    JITTER_LADDER.into_iter().find(|j| *j > current)
}

impl Design {
    pub fn new(model: Arc<FidelityModel>) -> Self {
        let errors = vec![ErrorFactor::default(); model.m() - 1];
        Self {
            model,
            actions: Vec::new(),
            joint: IncrementalCholesky::empty(0.0),
            errors,
            since_rebuild: 0,
            cache: None,
        }
    }

    pub fn model(&self) -> &Arc<FidelityModel> {
        &self.model
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub(crate) fn joint_factor(&self) -> &IncrementalCholesky {
        &self.joint
    }

    pub fn candidates(&self) -> Option<&Arc<Vec<Vec<f64>>>> {
        self.cache.as_ref().map(|c| &c.points)
    }

    /// Jitter currently applied to the joint factor.
    pub fn jitter(&self) -> f64 {
        self.joint.jitter()
    }

    /// Rebuilds with a different model, keeping actions and candidates.
    pub fn with_model(&self, model: Arc<FidelityModel>) -> Result<Self> {
        let mut d = Design::new(model);
        for a in &self.actions {
            d.model.check_action(a)?;
        }
        d.actions = self.actions.clone();
        d.refactor(0.0)?;
        if let Some(c) = &self.cache {
            d.attach_candidates(c.points.clone())?;
        }
        Ok(d)
    }

    /// Starts tracking per-candidate posterior quantities for `points`.
    pub fn attach_candidates(&mut self, points: Arc<Vec<Vec<f64>>>) -> Result<()> {
        if points.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        if let Some(p) = points.iter().find(|p| p.len() != self.model.dim()) {
            return Err(Error::DimensionMismatch { expected: self.model.dim(), got: p.len() });
        }
        self.cache = Some(self.build_cache(points));
        Ok(())
    }

    fn build_cache(&self, points: Arc<Vec<Vec<f64>>>) -> CandidateCache {
        let n_cand = points.len();
        let m = self.model.m();
        let mut cache = CandidateCache {
            joint: vec![Projection::new(n_cand); m],
            errors: vec![Projection::new(n_cand); m - 1],
            points,
        };
        let mut err_pos = vec![0usize; m - 1];
        for (i, a) in self.actions.iter().enumerate() {
            let err_row = if self.model.is_target(a.fidelity) {
                None
            } else {
                let pos = err_pos[a.fidelity];
                err_pos[a.fidelity] += 1;
                Some(self.errors[a.fidelity].chol.row(pos))
            };
            Self::extend_cache(&self.model, &mut cache, a, self.joint.row(i), err_row);
        }
        cache
    }

    fn extend_cache(
        model: &FidelityModel,
        cache: &mut CandidateCache,
        a: &Action,
        joint_row: &[f64],
        err_row: Option<&[f64]>,
    ) {
        let kf: Vec<f64> = cache.points.iter().map(|c| model.k_target(&a.x, c)).collect();
        let target = model.target_index();
        for (l, proj) in cache.joint.iter_mut().enumerate() {
            let mut k = kf.clone();
            if l == a.fidelity && l != target {
                for (v, c) in k.iter_mut().zip(cache.points.iter()) {
                    *v += model.k_error(l, &a.x, c);
                }
            }
            proj.push_row(joint_row, k);
        }
        if let Some(row) = err_row {
            let ke: Vec<f64> =
                cache.points.iter().map(|c| model.k_error(a.fidelity, &a.x, c)).collect();
            cache.errors[a.fidelity].push_row(row, ke);
        }
    }

    fn refactor(&mut self, base_jitter: f64) -> Result<()> {
        let n = self.actions.len();
        let model = &self.model;
        let k = DMatrix::from_fn(n, n, |i, j| {
            let v = model.k_observable(&self.actions[i], &self.actions[j]);
            if i == j {
                v + model.noise_variance(self.actions[i].fidelity)
            } else {
                v
            }
        });
        self.joint = IncrementalCholesky::from_matrix(&k, base_jitter.max(self.joint.jitter()))?;
        for l in 0..model.m() - 1 {
            let members: Vec<usize> = (0..n).filter(|&i| self.actions[i].fidelity == l).collect();
            let noise = model.noise_variance(l);
            let ke = DMatrix::from_fn(members.len(), members.len(), |i, j| {
                let v = model.k_error(l, &self.actions[members[i]].x, &self.actions[members[j]].x);
                if i == j {
                    v + noise
                } else {
                    v
                }
            });
            let jitter = base_jitter.max(self.errors[l].chol.jitter());
            self.errors[l] =
                ErrorFactor { chol: IncrementalCholesky::from_matrix(&ke, jitter)?, members };
        }
        self.since_rebuild = 0;
        Ok(())
    }

    /// Appends an action, extending every factor (and the candidate cache).
    pub fn push(&mut self, a: Action) -> Result<()> {
        self.model.check_action(&a)?;
        let model = self.model.clone();
        let cross: Vec<f64> = self.actions.iter().map(|b| model.k_observable(b, &a)).collect();
        let diag = model.k_observable(&a, &a) + model.noise_variance(a.fidelity);
        let mut ok = self.joint.push(&cross, diag).is_ok();
        if ok && !model.is_target(a.fidelity) {
            let f = &mut self.errors[a.fidelity];
            let cross: Vec<f64> = f
                .members
                .iter()
                .map(|&i| model.k_error(a.fidelity, &self.actions[i].x, &a.x))
                .collect();
            let diag = model.k_error(a.fidelity, &a.x, &a.x) + model.noise_variance(a.fidelity);
            ok = f.chol.push(&cross, diag).is_ok();
            if ok {
                f.members.push(self.actions.len());
            }
        }
        self.actions.push(a);

        if !ok {
            // factors may be partially extended; refactor from scratch
            let current =
                self.errors.iter().map(|e| e.chol.jitter()).fold(self.joint.jitter(), f64::max);
            let res = match next_jitter(current) {
                Some(j) => self.refactor(j),
                None => Err(Error::NotPositiveDefinite {
                    size: self.actions.len(),
                    jitter: current,
                    min_diag: diag,
                    max_diag: diag,
                }),
            };
            if let Err(e) = res {
                self.actions.pop();
                self.refactor(0.0)?;
                return Err(e);
            }
            if let Some(c) = self.cache.take() {
                self.cache = Some(self.build_cache(c.points));
            }
            return Ok(());
        }

        self.since_rebuild += 1;
        if let Some(mut cache) = self.cache.take() {
            let a = self.actions.last().expect("just pushed");
            let joint_row = self.joint.row(self.joint.len() - 1);
            let err_row = (!model.is_target(a.fidelity)).then(|| {
                let f = &self.errors[a.fidelity];
                f.chol.row(f.chol.len() - 1)
            });
            Self::extend_cache(&model, &mut cache, a, joint_row, err_row);
            self.cache = Some(cache);
        }
        if self.since_rebuild >= REBUILD_EVERY {
            // candidate projections stay valid: the refactored matrix is unchanged
            self.refactor(0.0)?;
        }
        Ok(())
    }

    /// Posterior variance of `f(x)` given the design.
    pub fn latent_variance(&self, x: &[f64]) -> f64 {
        let k: Vec<f64> = self.actions.iter().map(|b| self.model.k_target(&b.x, x)).collect();
        let v = self.joint.solve_lower(&k);
        self.model.k_target(x, x) - v.iter().map(|t| t * t).sum::<f64>()
    }

    /// Posterior variance of the noisy outcome `y_a`.
    pub fn observable_variance(&self, a: &Action) -> f64 {
        let k: Vec<f64> = self.actions.iter().map(|b| self.model.k_observable(b, a)).collect();
        let v = self.joint.solve_lower(&k);
        self.model.k_observable(a, a) + self.model.noise_variance(a.fidelity)
            - v.iter().map(|t| t * t).sum::<f64>()
    }

    /// Variance of `y_a` given the whole target function and the design.
    pub fn conditional_variance(&self, a: &Action) -> f64 {
        let noise = self.model.noise_variance(a.fidelity);
        if self.model.is_target(a.fidelity) {
            return noise;
        }
        let f = &self.errors[a.fidelity];
        let k: Vec<f64> = f
            .members
            .iter()
            .map(|&i| self.model.k_error(a.fidelity, &self.actions[i].x, &a.x))
            .collect();
        let v = f.chol.solve_lower(&k);
        self.model.k_error(a.fidelity, &a.x, &a.x) + noise - v.iter().map(|t| t * t).sum::<f64>()
    }

    /// `I(y_a; f | y_S) = H(y_a | y_S) - H(y_a | f, y_S)` in nats.
    pub fn info_gain_single(&self, a: &Action) -> Result<f64> {
        self.model.check_action(a)?;
        let latent = self.latent_variance(&a.x);
        Ok(gain_from_variances(latent, self.observable_variance(a), self.conditional_variance(a)))
    }

    /// `I(y_E; f | y_S)` for a batch `E`, from joint-Gaussian log-determinants:
    /// `½ [log det Cov(y_E | y_S) - log det Cov(y_E | f, y_S)]`.
    ///
    /// Conditioning on `f` only at the locations in `S ∪ E` is exact here:
    /// given those values, `y_{S∪E}` depends on nothing else of `f`.
    pub fn info_gain_set(&self, e: &[Action]) -> Result<f64> {
        if e.is_empty() {
            return Err(Error::InvalidParameter("information gain of an empty set".into()));
        }
        for a in e {
            self.model.check_action(a)?;
        }
        let model = &self.model;
        let all: Vec<&Action> = self.actions.iter().chain(e).collect();
        let joint_cov = |set: &[&Action]| {
            let n = set.len();
            CovMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
                let v = model.k_observable(set[i], set[j]);
                if i == j {
                    v + model.noise_variance(set[i].fidelity)
                } else {
                    v
                }
            }))
        };
        let marginal = chol_logdet(&joint_cov(&all), 0.0)? - chol_logdet(&joint_cov(&all[..self.actions.len()]), 0.0)?;

        let mut conditional = 0.0;
        for l in 0..model.m() {
            let with: Vec<&Action> = all.iter().copied().filter(|a| a.fidelity == l).collect();
            let before = self.actions.iter().filter(|a| a.fidelity == l).count();
            if with.len() == before {
                continue;
            }
            let noise = model.noise_variance(l);
            let cov = |set: &[&Action]| {
                let n = set.len();
                CovMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
                    let v = model.k_error(l, &set[i].x, &set[j].x);
                    if i == j {
                        v + noise
                    } else {
                        v
                    }
                }))
            };
            conditional += chol_logdet(&cov(&with), 0.0)? - chol_logdet(&cov(&with[..before]), 0.0)?;
        }
        Ok(0.5 * (marginal - conditional))
    }

    fn cache(&self) -> Result<&CandidateCache> {
        self.cache.as_ref().ok_or(Error::EmptyCandidates)
    }

    pub fn num_candidates(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.points.len())
    }

    /// Posterior variance of `f` at every candidate.
    pub fn candidate_latent_variances(&self) -> Result<Vec<f64>> {
        let cache = self.cache()?;
        let prior = self.model.target_prior().kernel.signal_variance();
        Ok(cache.joint[self.model.target_index()].sq.iter().map(|s| prior - s).collect())
    }

    /// Information gain of querying each candidate at `fidelity`.
    pub fn candidate_gains(&self, fidelity: usize) -> Result<Vec<f64>> {
        if fidelity >= self.model.m() {
            return Err(Error::FidelityOutOfRange { fidelity, m: self.model.m() });
        }
        let cache = self.cache()?;
        let model = &self.model;
        let target = model.target_index();
        let prior_f = model.target_prior().kernel.signal_variance();
        let prior_e = model.error_kernel(fidelity).map_or(0.0, |k| k.signal_variance());
        let noise = model.noise_variance(fidelity);
        let latent_sq = &cache.joint[target].sq;
        let obs_sq = &cache.joint[fidelity].sq;
        Ok((0..cache.points.len())
            .map(|c| {
                let cond = if fidelity == target {
                    noise
                } else {
                    prior_e + noise - cache.errors[fidelity].sq[c]
                };
                gain_from_variances(
                    prior_f - latent_sq[c],
                    prior_f + prior_e + noise - obs_sq[c],
                    cond,
                )
            })
            .collect())
    }

    /// `L⁻¹ k_f(S, c)` for candidate `c`, i.e. column `c` of the latent projection.
    pub(crate) fn candidate_latent_projection(&self, row: usize) -> Result<&[f64]> {
        let cache = self.cache()?;
        Ok(cache.joint[self.model.target_index()].row(row))
    }
}

/// `½ log(var(y | y_S) / var(y | f, y_S))`, zero when the target is
/// already known at the query point.
pub(crate) fn gain_from_variances(latent: f64, observable: f64, conditional: f64) -> f64 {
    if latent < DEGENERATE_VARIANCE {
        return 0.0;
    }
    let ratio = observable / conditional.max(f64::MIN_POSITIVE);
    (0.5 * ratio.ln()).max(0.0)
}
