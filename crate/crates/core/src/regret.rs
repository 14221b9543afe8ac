//! Cost-aware regret of policy traces.

use std::fmt;
use std::io::Write;

use crate::error::Result;
use crate::policy::{csv_err, fmt_num, Episode, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    SimpleRegret,
    SimpleReward,
    CumulativeRegret,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::SimpleRegret => "simple_regret",
            CurveKind::SimpleReward => "simple_reward",
            CurveKind::CumulativeRegret => "cumulative_regret",
        })
    }
}

/// Values against cumulative cost, with strictly increasing costs.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
}

impl RegretCurve {
    /// Value of the last point at or before `cost`; NaN before the first.
    pub fn value_at(&self, cost: f64) -> f64 {
        let i = self.points.partition_point(|(c, _)| *c <= cost + 1e-9);
        if i == 0 {
            f64::NAN
        } else {
            self.points[i - 1].1
        }
    }

    pub fn final_value(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }
}

/// `(Λ_e/λ_m)·f* − f(x_e)`.
pub fn episode_regret(e: &Episode, f_star: f64, lambda_m: f64) -> f64 {
    e.cost / lambda_m * f_star - e.reward()
}

/// `(Λ/λ_m)·f* − Σ_e f(x_e)` over the trace's budget `Λ`.
pub fn cumulative_regret(trace: &Trace, f_star: f64) -> f64 {
    trace.budget / trace.target_cost() * f_star - trace.episodes.iter().map(Episode::reward).sum::<f64>()
}

/// Cumulative regret of the trace prefix viewed as a run with budget `c`:
/// only episodes completed within cost `c` earn reward.
pub fn cumulative_regret_at(trace: &Trace, f_star: f64, c: f64) -> f64 {
    let mut spent = 0.0;
    let mut reward = 0.0;
    for e in &trace.episodes {
        spent += e.cost;
        if spent > c + 1e-9 {
            break;
        }
        reward += e.reward();
    }
    c / trace.target_cost() * f_star - reward
}

/// `f*` minus the best noise-free target value so far, at every target
/// query; with `f_star = None` the running best itself (simple reward).
pub fn simple_regret_curve(trace: &Trace, f_star: Option<f64>) -> RegretCurve {
    let mut best = f64::NEG_INFINITY;
    let points = trace
        .episodes
        .iter()
        .map(|e| {
            best = best.max(e.target.value);
            (e.target.cost_so_far, f_star.map_or(best, |f| f - best))
        })
        .collect();
    let kind = if f_star.is_some() { CurveKind::SimpleRegret } else { CurveKind::SimpleReward };
    RegretCurve { kind, points }
}

/// Cumulative regret of the trace prefix at each checkpoint cost.
pub fn cumulative_regret_curve(trace: &Trace, f_star: f64, checkpoints: &[f64]) -> RegretCurve {
    RegretCurve {
        kind: CurveKind::CumulativeRegret,
        points: checkpoints.iter().map(|c| (*c, cumulative_regret_at(trace, f_star, *c))).collect(),
    }
}

/// The terms of the episode-wise regret decomposition
/// `R = (f*/λ_m)·Σ Λ_L + Σ (f* − f(x_j)) + ((Λ − spent)/λ_m)·f*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub cumulative: f64,
    pub exploration: f64,
    pub optimization: f64,
    pub unspent: f64,
}

impl Decomposition {
    /// `cumulative − (exploration + optimization + unspent)`.
    pub fn residual(&self) -> f64 {
        self.cumulative - (self.exploration + self.optimization + self.unspent)
    }
}

pub fn regret_decomposition(trace: &Trace, f_star: f64) -> Decomposition {
    let lambda_m = trace.target_cost();
    let low: f64 = trace.episodes.iter().map(|e| e.low_cost).sum();
    let opt: f64 = trace.episodes.iter().map(|e| f_star - e.reward()).sum();
    Decomposition {
        cumulative: cumulative_regret(trace, f_star),
        exploration: f_star / lambda_m * low,
        optimization: opt,
        unspent: (trace.budget - trace.spent()) / lambda_m * f_star,
    }
}

/// `(Σ_j Λ_L^{(j)}, α(Λ)·Σ_j I(y_E^{(j)}; f | history))` for a trace; the
/// exploration routine guarantees the first is at most the second.
pub fn exploration_certificate(trace: &Trace, alpha_exponent: f64) -> (f64, f64) {
    let low: f64 = trace.episodes.iter().map(|e| e.low_cost).sum();
    let gain: f64 =
        trace.episodes.iter().filter_map(|e| e.exploration.as_ref()).map(|x| x.info_gain).sum();
    (low, trace.budget.powf(alpha_exponent) * gain)
}

/// Writes `seed,policy,cost,value,kind` rows.
pub fn write_curves_csv<W: Write>(
    w: W,
    curves: &[(u64, &str, &RegretCurve)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["seed", "policy", "cost", "value", "kind"]).map_err(csv_err)?;
    for (seed, policy, curve) in curves {
        for (c, v) in &curve.points {
            w.write_record([
                seed.to_string(),
                policy.to_string(),
                fmt_num(*c),
                fmt_num(*v),
                curve.kind.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Action;
    use crate::policy::{Query, RunStatus, Seeds};

    fn q(fid: usize, value: f64, cost_so_far: f64) -> Query {
        Query { action: Action::new(vec![0.0], fid), y: value, value, cost_so_far }
    }

    fn episode(lows: usize, low_cost: f64, value: f64, end: f64, lambda_m: f64) -> Episode {
        Episode {
            low: (0..lows).map(|_| q(0, 0.0, end - lambda_m)).collect(),
            target: q(1, value, end),
            low_cost,
            cost: low_cost + lambda_m,
            exploration: None,
        }
    }

    fn trace(budget: f64, episodes: Vec<Episode>) -> Trace {
        Trace {
            policy: "t".into(),
            budget,
            costs: vec![1.0, 2.0],
            episodes,
            models: Vec::new(),
            recommendation: None,
            seeds: Seeds::single(0),
            status: RunStatus::Completed,
        }
    }

    #[test]
    fn episode_regret_examples() {
        assert_eq!(episode_regret(&episode(0, 0.0, 2.0, 2.0, 2.0), 2.0, 2.0), 0.0);
        assert_eq!(episode_regret(&episode(0, 0.0, 1.0, 2.0, 2.0), 2.0, 2.0), 1.0);
        assert_eq!(episode_regret(&episode(1, 1.0, 2.0, 3.0, 2.0), 2.0, 2.0), 1.0);
    }

    #[test]
    fn cumulative_regret_examples() {
        let t = trace(3.0, vec![episode(1, 1.0, 2.0, 3.0, 2.0)]);
        assert_eq!(cumulative_regret(&t, 2.0), 1.0);
        let t = trace(6.0, (1..=3).map(|k| episode(0, 0.0, 2.0, 2.0 * k as f64, 2.0)).collect());
        assert_eq!(cumulative_regret(&t, 2.0), 0.0);
        let mut t = trace(5.0, Vec::new());
        t.costs = vec![1.0];
        assert_eq!(cumulative_regret(&t, 1.0), 5.0);
    }

    #[test]
    fn decomposition_closes() {
        let t = trace(
            12.0,
            vec![episode(2, 2.0, 0.5, 4.0, 2.0), episode(1, 1.0, 1.5, 7.0, 2.0), episode(0, 0.0, 1.9, 9.0, 2.0)],
        );
        let d = regret_decomposition(&t, 2.0);
        assert!(d.residual().abs() < 1e-12);
        assert_eq!(d.unspent, 3.0);
        let sum: f64 = t.episodes.iter().map(|e| episode_regret(e, 2.0, 2.0)).sum();
        assert!((d.cumulative - sum - d.unspent).abs() < 1e-12);
    }

    #[test]
    fn simple_regret_is_running_best() {
        let t = trace(
            10.0,
            vec![episode(0, 0.0, 0.5, 2.0, 2.0), episode(1, 1.0, 0.2, 5.0, 2.0), episode(0, 0.0, 1.5, 7.0, 2.0)],
        );
        let c = simple_regret_curve(&t, Some(2.0));
        assert_eq!(c.points, vec![(2.0, 1.5), (5.0, 1.5), (7.0, 0.5)]);
        assert!(c.value_at(1.0).is_nan());
        assert_eq!(c.value_at(6.0), 1.5);
        assert_eq!(c.final_value(), 0.5);
        let r = simple_regret_curve(&t, None);
        assert_eq!(r.kind, CurveKind::SimpleReward);
        assert_eq!(r.final_value(), 1.5);
    }

    #[test]
    fn prefix_regret() {
        let t = trace(9.0, vec![episode(0, 0.0, 1.0, 2.0, 2.0), episode(1, 1.0, 2.0, 5.0, 2.0)]);
        assert_eq!(cumulative_regret_at(&t, 2.0, 2.0), 1.0);
        assert_eq!(cumulative_regret_at(&t, 2.0, 4.0), 3.0);
        assert_eq!(cumulative_regret_at(&t, 2.0, 5.0), 2.0);
    }
}
