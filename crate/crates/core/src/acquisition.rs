//! Single-fidelity selection rules for the target-fidelity query of each
//! episode, and the finite candidate sets they maximize over.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Finite discretization of a box domain: a Halton sequence with a seeded
/// Cranley-Patterson shift.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    points: Arc<Vec<Vec<f64>>>,
    seed: u64,
}

/// Default candidate count for a `dim`-dimensional domain.
pub fn default_candidate_count(dim: usize) -> usize {
    if dim <= 2 {
        1000
    } else {
        5000
    }
}

impl CandidateSet {
    pub fn halton(bounds: &[(f64, f64)], n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCandidates);
        }
        if bounds.is_empty() || bounds.len() > PRIMES.len() {
            return Err(Error::InvalidParameter(format!(
                "candidate sets support 1 to {} dimensions, got {}",
                PRIMES.len(),
                bounds.len()
            )));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
        let points = (1..=n as u64)
            .map(|i| {
                bounds
                    .iter()
                    .zip(PRIMES)
                    .zip(&shift)
                    .map(|(((lo, hi), p), s)| {
                        let u = (radical_inverse(i, p as u64) + s).fract();
                        lo + u * (hi - lo)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { points: Arc::new(points), seed })
    }

    /// Wraps an explicit point list.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        Ok(Self { points: Arc::new(points), seed: 0 })
    }

    pub fn points(&self) -> &Arc<Vec<Vec<f64>>> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

/// Confidence schedule of GP-UCB on a finite domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcbSchedule {
    pub delta: f64,
    pub t: usize,
}

impl UcbSchedule {
    pub fn new(delta: f64, t: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        if t == 0 {
            return Err(Error::InvalidParameter("round index starts at 1".into()));
        }
        Ok(Self { delta, t })
    }

    /// `β_t = 2 log(|C| t² π² / (6δ))`.
    pub fn beta(&self, n_candidates: usize) -> f64 {
        let t = self.t as f64;
        2.0 * (n_candidates as f64 * t * t * PI * PI / (6.0 * self.delta)).ln()
    }
}

/// Index of the largest score; ties go to the lowest index.
fn argmax(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn check_lengths(means: &[f64], spread: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if means.len() != spread.len() {
        return Err(Error::DimensionMismatch { expected: means.len(), got: spread.len() });
    }
    Ok(())
}

/// GP-UCB: `argmax μ(c) + √β_t σ(c)` over the candidates.
pub fn gp_ucb_select(means: &[f64], sds: &[f64], sched: &UcbSchedule) -> Result<usize> {
    check_lengths(means, sds)?;
    let root_beta = sched.beta(means.len()).max(0.0).sqrt();
    Ok(argmax(means.iter().zip(sds).map(|(m, s)| m + root_beta * s)).expect("nonempty"))
}

/// GP-MI: `argmax μ(c) + √α (√(σ²(c) + γ̂) − √γ̂)`; returns the index and the
/// updated `γ̂ + σ²(chosen)`.
pub fn gp_mi_select(means: &[f64], vars: &[f64], gamma: f64, alpha: f64) -> Result<(usize, f64)> {
    check_lengths(means, vars)?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("accumulated gamma must be >= 0, got {gamma}")));
    }
    let ra = alpha.max(0.0).sqrt();
    let rg = gamma.sqrt();
    let i = argmax(means.iter().zip(vars).map(|(m, v)| m + ra * ((v.max(0.0) + gamma).sqrt() - rg)))
        .expect("nonempty");
    Ok((i, gamma + vars[i].max(0.0)))
}

/// Choice of single-fidelity optimizer for the target query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subroutine {
    #[default]
    GpUcb,
    GpMi,
}

/// Stateful target-fidelity selector driven once per episode.
///
/// Other optimizers (entropy-search variants, for instance) can be plugged
/// into the policies by implementing this trait.
pub trait TargetSelector {
    /// Acquisition value of a point with posterior mean `mean` and variance
    /// `var` in episode `round` (from 1), over a domain discretized into
    /// `n_candidates` points.
    fn score(&self, mean: f64, var: f64, round: usize, n_candidates: usize) -> f64;

    /// Records the posterior variance of the point actually queried.
    fn commit(&mut self, _var: f64) {}

    /// Best candidate by [`TargetSelector::score`]; ties go to the lowest index.
    fn best_candidate(&self, means: &[f64], vars: &[f64], round: usize) -> Result<usize> {
        check_lengths(means, vars)?;
        if round == 0 {
            return Err(Error::InvalidParameter("round index starts at 1".into()));
        }
        let n = means.len();
        Ok(argmax(means.iter().zip(vars).map(|(m, v)| self.score(*m, *v, round, n))).expect("nonempty"))
    }

    /// [`TargetSelector::best_candidate`] followed by a commit of its variance.
    fn select(&mut self, means: &[f64], vars: &[f64], round: usize) -> Result<usize> {
        let i = self.best_candidate(means, vars, round)?;
        self.commit(vars[i]);
        Ok(i)
    }
}

#[derive(Debug, Clone)]
pub struct GpUcb {
    pub delta: f64,
}

impl TargetSelector for GpUcb {
    fn score(&self, mean: f64, var: f64, round: usize, n_candidates: usize) -> f64 {
        let beta = UcbSchedule { delta: self.delta, t: round }.beta(n_candidates);
        mean + beta.max(0.0).sqrt() * var.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct GpMi {
    pub alpha: f64,
    pub gamma: f64,
}

impl GpMi {
    /// `α = log(2/δ)`, the usual confidence parameter.
    pub fn new(delta: f64) -> Self {
        Self { alpha: (2.0 / delta).ln(), gamma: 0.0 }
    }
}

impl TargetSelector for GpMi {
    fn score(&self, mean: f64, var: f64, _round: usize, _n_candidates: usize) -> f64 {
        mean + self.alpha.max(0.0).sqrt() * ((var.max(0.0) + self.gamma).sqrt() - self.gamma.sqrt())
    }

    fn commit(&mut self, var: f64) {
        self.gamma += var.max(0.0);
    }
}

impl Subroutine {
    pub fn selector(self, delta: f64) -> Box<dyn TargetSelector + Send> {
        match self {
            Subroutine::GpUcb => Box::new(GpUcb { delta }),
            Subroutine::GpMi => Box::new(GpMi::new(delta)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_points_in_bounds_and_seeded() {
        let b = [(-1.0, 2.0), (5.0, 6.0), (0.0, 1.0)];
        let c = CandidateSet::halton(&b, 500, 3).unwrap();
        assert_eq!(c.len(), 500);
        for p in c.points().iter() {
            for (v, (lo, hi)) in p.iter().zip(b) {
                assert!(*v >= lo && *v < hi);
            }
        }
        let again = CandidateSet::halton(&b, 500, 3).unwrap();
        assert_eq!(c.points(), again.points());
        let other = CandidateSet::halton(&b, 500, 4).unwrap();
        assert_ne!(c.points(), other.points());
    }

    #[test]
    fn halton_rejects_bad_input() {
        assert!(CandidateSet::halton(&[(0.0, 1.0)], 0, 1).is_err());
        assert!(CandidateSet::halton(&[(1.0, 1.0)], 5, 1).is_err());
        assert!(CandidateSet::from_points(vec![]).is_err());
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn ucb_limits() {
        let s = UcbSchedule::new(0.1, 1).unwrap();
        assert_eq!(gp_ucb_select(&[0.1, 0.7, 0.3], &[0.0; 3], &s).unwrap(), 1);
        assert_eq!(gp_ucb_select(&[1.0; 4], &[0.1, 0.1, 0.2, 0.1], &s).unwrap(), 2);
        assert_eq!(gp_ucb_select(&[1.0; 3], &[0.5; 3], &s).unwrap(), 0);
        assert!(gp_ucb_select(&[], &[], &s).is_err());
    }

    #[test]
    fn ucb_matches_exhaustive_scoring() {
        let mu = [0.2, 1.1, 0.9, -0.3, 1.0];
        let sd = [0.9, 0.1, 0.35, 1.5, 0.2];
        let s = UcbSchedule::new(0.1, 1).unwrap();
        let beta = 2.0 * (5.0 * PI * PI / 0.6f64).ln();
        let scores: Vec<f64> = mu.iter().zip(sd).map(|(m, d)| m + beta.sqrt() * d).collect();
        let want = (0..5).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        assert_eq!(gp_ucb_select(&mu, &sd, &s).unwrap(), want);
        assert_eq!(want, 3);
    }

    #[test]
    fn mi_first_step_is_ucb_with_root_alpha() {
        let mu = [0.0, 0.5, 0.4, 0.1];
        let var = [1.0, 0.01, 0.2, 0.6];
        let alpha = 2.0;
        let (i, g) = gp_mi_select(&mu, &var, 0.0, alpha).unwrap();
        let scores: Vec<f64> = mu.iter().zip(var).map(|(m, v)| m + alpha.sqrt() * v.sqrt()).collect();
        let want = (0..4).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        assert_eq!(i, want);
        assert_eq!(g, var[i]);
    }

    #[test]
    fn mi_matches_exhaustive_scoring() {
        let mu = [0.3, 0.8, 0.5, 0.0];
        let var = [0.5, 0.05, 0.3, 1.2];
        let (gamma, alpha): (f64, f64) = (1.7, (2.0f64 / 0.1).ln());
        let scores: Vec<f64> = mu
            .iter()
            .zip(var)
            .map(|(m, v)| m + alpha.sqrt() * ((v + gamma).sqrt() - gamma.sqrt()))
            .collect();
        let want = (0..4).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        let (i, g) = gp_mi_select(&mu, &var, gamma, alpha).unwrap();
        assert_eq!(i, want);
        assert!((g - gamma - var[i]).abs() < 1e-15);
    }

    #[test]
    fn mi_zero_variance_is_pure_exploitation() {
        let (i, g) = gp_mi_select(&[0.1, 0.3, 0.2], &[0.0; 3], 0.4, 3.0).unwrap();
        assert_eq!((i, g), (1, 0.4));
    }

    #[test]
    fn shifting_means_keeps_selection() {
        let mu = [0.3, 0.8, 0.5, 0.0, 0.79];
        let sd = [0.5, 0.05, 0.3, 0.4, 0.06];
        let s = UcbSchedule::new(0.1, 7).unwrap();
        let shifted: Vec<f64> = mu.iter().map(|m| m + 123.0).collect();
        assert_eq!(gp_ucb_select(&mu, &sd, &s).unwrap(), gp_ucb_select(&shifted, &sd, &s).unwrap());
    }

    #[test]
    fn schedule_validation() {
        assert!(UcbSchedule::new(0.0, 1).is_err());
        assert!(UcbSchedule::new(1.0, 1).is_err());
        assert!(UcbSchedule::new(0.1, 0).is_err());
    }

    #[test]
    fn selectors_agree_with_free_functions() {
        let mu = [0.3, 0.8, 0.5, 0.0, 0.79];
        let var = [0.25, 0.0025, 0.09, 0.16, 0.0036];
        let sd: Vec<f64> = var.iter().map(|v: &f64| v.sqrt()).collect();
        let mut ucb = Subroutine::GpUcb.selector(0.1);
        for t in 1..5 {
            let want = gp_ucb_select(&mu, &sd, &UcbSchedule::new(0.1, t).unwrap()).unwrap();
            assert_eq!(ucb.select(&mu, &var, t).unwrap(), want);
        }
        let mut mi = GpMi::new(0.1);
        let mut gamma = 0.0;
        for t in 1..5 {
            let (want, g) = gp_mi_select(&mu, &var, gamma, mi.alpha).unwrap();
            gamma = g;
            assert_eq!(mi.select(&mu, &var, t).unwrap(), want);
            assert!((mi.gamma - gamma).abs() < 1e-15);
        }
    }
}
