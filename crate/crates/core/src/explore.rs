//! Greedy information-per-cost exploration of the cheap fidelities.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, Design, History};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    /// Exponent `a` of `α(B) = B^a`; the stopping threshold is `β = 1/α(B)`.
    pub alpha_exponent: f64,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self { alpha_exponent: 1.0 / 3.0 }
    }
}

impl ExploreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_exponent > 0.0 && self.alpha_exponent < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha_exponent must lie in (0, 0.5), got {}",
                self.alpha_exponent
            )));
        }
        Ok(())
    }

    /// `α(B)`.
    pub fn alpha(&self, budget: f64) -> f64 {
        budget.powf(self.alpha_exponent)
    }

    /// `β = 1/α(B)`.
    pub fn beta(&self, budget: f64) -> f64 {
        1.0 / self.alpha(budget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No action fits in the budget left after reserving one target query.
    BudgetExhausted,
    /// A target-fidelity query had the best information-per-cost ratio.
    TargetBetter,
    /// Adding the best action would push the cumulative ratio below `β`.
    LowCumulativeRatio,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::BudgetExhausted => "budget_exhausted",
            StopReason::TargetBetter => "target_better",
            StopReason::LowCumulativeRatio => "low_cumulative_ratio",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreResult {
    /// Selected low-fidelity actions, in selection order.
    pub selected: Vec<Action>,
    pub cost: f64,
    /// `I(y_E; f | y_S)` of the selected set.
    pub cumulative_info_gain: f64,
    /// Conditional gain of each selected action at the time it was picked.
    pub step_gains: Vec<f64>,
    pub beta: f64,
    pub stop_reason: StopReason,
}

impl ExploreResult {
    fn empty(beta: f64, stop_reason: StopReason) -> Self {
        Self {
            selected: Vec::new(),
            cost: 0.0,
            cumulative_info_gain: 0.0,
            step_gains: Vec::new(),
            beta,
            stop_reason,
        }
    }
}

/// Greedy benefit-cost exploration with budget `budget` given the history.
///
/// Each step scores every (candidate, fidelity) pair by `I(y_a; f | y_{S∪E}) / λ_ℓ`
/// among pairs with `λ_ℓ ≤ B − cost(E) − λ_m`, the target fidelity included.
/// The loop stops when nothing is affordable, when the best pair is a target
/// query, or when accepting the best pair would bring `I(y_E; f | y_S)/cost(E)`
/// below `β`. Candidates come from the history's attached candidate set and
/// may be selected repeatedly.
pub fn explore_lf(budget: f64, history: &History, cfg: &ExploreConfig) -> Result<ExploreResult> {
    explore_design(budget, history.design(), cfg).map(|(r, _)| r)
}

/// As [`explore_lf`], also returning the design extended by the selection.
pub(crate) fn explore_design(
    budget: f64,
    design: &Design,
    cfg: &ExploreConfig,
) -> Result<(ExploreResult, Design)> {
    cfg.validate()?;
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidParameter(format!("budget must be positive, got {budget}")));
    }
    let points = design.candidates().ok_or(Error::EmptyCandidates)?.clone();
    let model = design.model().clone();
    let target = model.target_index();
    let lambda_m = model.target_cost();
    let beta = cfg.beta(budget);
    if budget < lambda_m {
        return Ok((ExploreResult::empty(beta, StopReason::BudgetExhausted), design.clone()));
    }

    let mut work = design.clone();
    let mut result = ExploreResult::empty(beta, StopReason::BudgetExhausted);
    loop {
        let room = budget - result.cost - lambda_m;
        let mut best: Option<(usize, usize, f64, f64)> = None;
        for l in 0..model.m() {
            let lambda = model.cost(l);
            if lambda > room {
                continue;
            }
            let gains = work.candidate_gains(l)?;
            for (c, g) in gains.into_iter().enumerate() {
                let ratio = g / lambda;
                if best.is_none_or(|(_, _, _, r)| ratio > r) {
                    best = Some((l, c, g, ratio));
                }
            }
        }
        let Some((l, c, gain, _)) = best else {
            result.stop_reason = StopReason::BudgetExhausted;
            break;
        };
        if l == target {
            result.stop_reason = StopReason::TargetBetter;
            break;
        }
        let cost = result.cost + model.cost(l);
        let cumulative = result.cumulative_info_gain + gain;
        if cumulative / cost < beta {
            result.stop_reason = StopReason::LowCumulativeRatio;
            break;
        }
        let a = Action::new(points[c].clone(), l);
        work.push(a.clone())?;
        result.selected.push(a);
        result.step_gains.push(gain);
        result.cost = cost;
        result.cumulative_info_gain = cumulative;
    }
    Ok((result, work))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{GpPrior, SquaredExpKernel};
    use crate::model::FidelityModel;
    use std::sync::Arc;

    fn model(costs: [f64; 2], err_var: f64) -> Arc<FidelityModel> {
        let t = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.3]).unwrap(), 0.01).unwrap();
        let e = GpPrior::zero_mean(SquaredExpKernel::new(err_var, vec![0.5]).unwrap(), 0.01).unwrap();
        Arc::new(FidelityModel::new(t, vec![e], costs.to_vec()).unwrap())
    }

    fn history(m: Arc<FidelityModel>, pts: Vec<Vec<f64>>) -> History {
        History::new(m).with_candidates(Arc::new(pts)).unwrap()
    }

    #[test]
    fn alpha_and_beta() {
        let cfg = ExploreConfig::default();
        assert!((cfg.alpha(27.0) - 3.0).abs() < 1e-12);
        assert!((cfg.beta(8.0) - 0.5).abs() < 1e-12);
        assert!(ExploreConfig { alpha_exponent: 0.5 }.validate().is_err());
    }

    #[test]
    fn expensive_noisy_proxy_yields_target_better() {
        // low fidelity costs almost as much as the target and is dominated by error
        let h = history(model([3.9, 4.0], 25.0), vec![vec![0.2], vec![0.8]]);
        let r = explore_lf(100.0, &h, &ExploreConfig::default()).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.stop_reason, StopReason::TargetBetter);
    }

    #[test]
    fn tight_budget_is_exhausted() {
        let h = history(model([1.0, 4.0], 0.1), vec![vec![0.5]]);
        let r = explore_lf(4.5, &h, &ExploreConfig::default()).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.stop_reason, StopReason::BudgetExhausted);
        let r = explore_lf(3.0, &h, &ExploreConfig::default()).unwrap();
        assert_eq!(r.stop_reason, StopReason::BudgetExhausted);
    }

    #[test]
    fn picks_match_exhaustive_ratio_scan() {
        let m = model([1.0, 4.0], 0.1);
        let pts = vec![vec![0.1], vec![0.5], vec![0.9]];
        let h = history(m.clone(), pts.clone());
        let budget = 40.0;
        let cfg = ExploreConfig::default();
        let r = explore_lf(budget, &h, &cfg).unwrap();
        assert!(!r.selected.is_empty());

        // replay with a from-scratch design per step
        let mut prefix: Vec<Action> = Vec::new();
        for (step, chosen) in r.selected.iter().enumerate() {
            let mut d = Design::new(m.clone());
            for a in &prefix {
                d.push(a.clone()).unwrap();
            }
            let spent: f64 = prefix.iter().map(|a| m.cost(a.fidelity)).sum();
            let mut best = (f64::NEG_INFINITY, 0, 0);
            for l in 0..2 {
                if m.cost(l) > budget - spent - m.target_cost() {
                    continue;
                }
                for (c, p) in pts.iter().enumerate() {
                    let g = d.info_gain_single(&Action::new(p.clone(), l)).unwrap() / m.cost(l);
                    if g > best.0 {
                        best = (g, l, c);
                    }
                }
            }
            assert_eq!((best.1, pts[best.2].clone()), (chosen.fidelity, chosen.x.clone()), "step {step}");
            assert!((best.0 * m.cost(chosen.fidelity) - r.step_gains[step]).abs() < 1e-9);
            prefix.push(chosen.clone());
        }
        let set_gain = h.info_gain_set(&r.selected).unwrap();
        assert!((set_gain - r.cumulative_info_gain).abs() < 1e-8);
        assert!(set_gain / r.cost >= r.beta - 1e-10);
        assert!(r.cost + m.target_cost() <= budget);
    }

    #[test]
    fn single_fidelity_model_never_explores() {
        let t = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.3]).unwrap(), 0.01).unwrap();
        let m = Arc::new(FidelityModel::single(t, 2.0).unwrap());
        let h = history(m, vec![vec![0.1], vec![0.4]]);
        let r = explore_lf(10.0, &h, &ExploreConfig::default()).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.stop_reason, StopReason::TargetBetter);
        let r = explore_lf(3.0, &h, &ExploreConfig::default()).unwrap();
        assert_eq!(r.stop_reason, StopReason::BudgetExhausted);
    }

    #[test]
    fn requires_candidates() {
        let h = History::new(model([1.0, 4.0], 0.1));
        assert!(matches!(explore_lf(10.0, &h, &ExploreConfig::default()), Err(Error::EmptyCandidates)));
    }
}
