use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::fidelity::FidelityModel;
use super::history::History;
use crate::error::{Error, Result};
use crate::gp::{cholesky, GpPrior};

/// Finite grid of multiplicative factors applied to a base model's kernels.
///
/// The target kernel and the (shared) error kernels each get their own
/// lengthscale and signal-variance factors, so a model with error processes
/// has `|ls_f|·|var_f|·|ls_e|·|var_e|` grid points. Noise variances and the
/// prior mean are kept from the base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperGrid {
    pub lengthscale_factors: Vec<f64>,
    pub variance_factors: Vec<f64>,
    pub error_lengthscale_factors: Vec<f64>,
    pub error_variance_factors: Vec<f64>,
    /// Fit on at most this many of the most recent observations.
    pub max_points: Option<usize>,
}

/// `n` log-spaced factors from `1/spread` to `spread`.
pub fn log_spaced(n: usize, spread: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0];
    }
    let lo = -spread.ln();
    let step = 2.0 * spread.ln() / (n - 1) as f64;
    (0..n).map(|i| (lo + step * i as f64).exp()).collect()
}

impl Default for HyperGrid {
    /// 5 × 5 factors per process spanning a factor of 4 either way.
    fn default() -> Self {
        let f = log_spaced(5, 4.0);
        Self {
            lengthscale_factors: f.clone(),
            variance_factors: f.clone(),
            error_lengthscale_factors: f.clone(),
            error_variance_factors: f,
            max_points: None,
        }
    }
}

/// Grid coordinates of one candidate model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub lengthscale: usize,
    pub variance: usize,
    pub error_lengthscale: usize,
    pub error_variance: usize,
}

impl HyperGrid {
    /// A grid with the single point "base model unchanged".
    pub fn identity() -> Self {
        Self {
            lengthscale_factors: vec![1.0],
            variance_factors: vec![1.0],
            error_lengthscale_factors: vec![1.0],
            error_variance_factors: vec![1.0],
            max_points: None,
        }
    }

    fn error_len(&self, m: usize) -> usize {
        if m > 1 {
            self.error_lengthscale_factors.len() * self.error_variance_factors.len()
        } else {
            1
        }
    }

    /// Number of grid points for a model with `m` fidelities.
    pub fn len(&self, m: usize) -> usize {
        self.lengthscale_factors.len() * self.variance_factors.len() * self.error_len(m)
    }

    pub fn is_empty(&self) -> bool {
        self.lengthscale_factors.is_empty() || self.variance_factors.is_empty()
    }

    /// Decodes a flat index; the error-variance coordinate varies fastest.
    pub fn point(&self, index: usize, m: usize) -> GridPoint {
        let (nel, nev) = if m > 1 {
            (self.error_lengthscale_factors.len(), self.error_variance_factors.len())
        } else {
            (1, 1)
        };
        let nv = self.variance_factors.len();
        GridPoint {
            error_variance: index % nev,
            error_lengthscale: (index / nev) % nel,
            variance: (index / (nev * nel)) % nv,
            lengthscale: index / (nev * nel * nv),
        }
    }

    /// The model at grid index `index`, built from `base`.
    pub fn model(&self, base: &FidelityModel, index: usize) -> Result<FidelityModel> {
        let p = self.point(index, base.m());
        let t = base.target_prior();
        let target = GpPrior::new(
            t.mean.clone(),
            t.kernel.scaled(self.variance_factors[p.variance], self.lengthscale_factors[p.lengthscale])?,
            t.noise_variance,
        )?;
        let errors = base
            .error_priors()
            .iter()
            .map(|e| {
                GpPrior::zero_mean(
                    e.kernel.scaled(
                        self.error_variance_factors[p.error_variance],
                        self.error_lengthscale_factors[p.error_lengthscale],
                    )?,
                    e.noise_variance,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        FidelityModel::new(target, errors, base.costs().to_vec())
    }
}

/// Result of a grid search.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: Arc<FidelityModel>,
    /// Selected grid index, `None` when the previous model was kept.
    pub index: Option<usize>,
    pub log_likelihood: f64,
    pub warning: Option<String>,
}

/// Maximizes the joint log marginal likelihood of `history` over `grid`,
/// around the model the history currently uses. Ties go to the lowest index.
pub fn fit_hyperparameters(history: &History, grid: &HyperGrid) -> Result<FitOutcome> {
    fit_hyperparameters_around(history, history.model().clone(), grid)
}

/// As [`fit_hyperparameters`] with the grid centred on `base` instead.
///
/// Kernel matrices are assembled from distance matrices computed once, so
/// each grid point costs one Cholesky factorization.
pub fn fit_hyperparameters_around(
    history: &History,
    base: Arc<FidelityModel>,
    grid: &HyperGrid,
) -> Result<FitOutcome> {
    if base.m() != history.model().m() || base.dim() != history.model().dim() {
        return Err(Error::InvalidParameter("base model does not match the history".into()));
    }
    if history.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "hyperparameter fitting needs at least 2 observations, got {}",
            history.len()
        )));
    }
    if grid.is_empty() || (base.m() > 1 && grid.error_len(base.m()) == 0) {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    let start = grid.max_points.map_or(0, |k| history.len().saturating_sub(k.max(2)));
    let actions = &history.actions()[start..];
    let y = &history.values()[start..];
    let n = actions.len();

    let tk = &base.target_prior().kernel;
    let dist_f = DMatrix::from_fn(n, n, |i, j| tk.half_sq_dist(&actions[i].x, &actions[j].x));
    let dist_e = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (&actions[i], &actions[j]);
        match base.error_kernel(a.fidelity) {
            Some(k) if a.fidelity == b.fidelity => k.half_sq_dist(&a.x, &b.x),
            _ => f64::INFINITY,
        }
    });
    let noise: Vec<f64> = actions.iter().map(|a| base.noise_variance(a.fidelity)).collect();
    let resid: Vec<f64> =
        actions.iter().zip(y).map(|(a, v)| v - base.prior_mean(&a.x)).collect();
    let resid = DVector::from_vec(resid);

    let f_shapes: Vec<DMatrix<f64>> = grid
        .lengthscale_factors
        .iter()
        .map(|c| dist_f.map(|v| (-v / (c * c)).exp()))
        .collect();
    // error shapes carry each process's own signal variance
    let e_var: Vec<f64> = actions
        .iter()
        .map(|a| base.error_kernel(a.fidelity).map_or(0.0, |k| k.signal_variance()))
        .collect();
    let e_shapes: Vec<DMatrix<f64>> = if base.m() > 1 {
        grid.error_lengthscale_factors
            .iter()
            .map(|c| DMatrix::from_fn(n, n, |i, j| e_var[i] * (-dist_e[(i, j)] / (c * c)).exp()))
            .collect()
    } else {
        Vec::new()
    };
    let sf = tk.signal_variance();

    let mut best: Option<(usize, f64)> = None;
    let mut failures = 0usize;
    for index in 0..grid.len(base.m()) {
        let p = grid.point(index, base.m());
        let mut k = &f_shapes[p.lengthscale] * (sf * grid.variance_factors[p.variance]);
        if base.m() > 1 {
            k += &e_shapes[p.error_lengthscale] * grid.error_variance_factors[p.error_variance];
        }
        for (i, s) in noise.iter().enumerate() {
            k[(i, i)] += s;
        }
        let lml = match cholesky(&k, 0.0) {
            Ok((chol, _)) => {
                let z = chol.l().solve_lower_triangular(&resid).expect("triangular factor");
                let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                -0.5 * z.norm_squared() - 0.5 * logdet - 0.5 * n as f64 * (2.0 * PI).ln()
            }
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        if lml.is_finite() && best.is_none_or(|(_, b)| lml > b) {
            best = Some((index, lml));
        }
    }

    match best {
        Some((index, lml)) => {
            let model = Arc::new(grid.model(&base, index)?);
            let warning = (failures > 0)
                .then(|| format!("{failures} grid points failed to factorize and were skipped"));
            Ok(FitOutcome { model, index: Some(index), log_likelihood: lml, warning })
        }
        None => {
            let msg = "every hyperparameter grid point failed; keeping the previous model";
            log::warn!("{msg}");
            Ok(FitOutcome {
                model: base,
                index: None,
                log_likelihood: f64::NAN,
                warning: Some(msg.to_string()),
            })
        }
    }
}
