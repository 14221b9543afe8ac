//! Budgeted submodular maximization: the cost-aware greedy with its
//! best-singleton safeguard, an exhaustive oracle, and a greedy upper bound
//! on the information an exploration phase can collect.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Action, Design, History};

/// Approximation factor `½(1 − 1/e)` of the knapsack greedy.
pub const KNAPSACK_FACTOR: f64 = 0.5 * (1.0 - 1.0 / std::f64::consts::E);

/// Largest ground set accepted by [`brute_force_knapsack`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Items with positive costs and a set utility, memoized on the sorted
/// item list.
pub struct GroundSet<'a> {
    costs: Vec<f64>,
    utility: Box<dyn Fn(&[usize]) -> f64 + 'a>,
    memo: RefCell<HashMap<Vec<usize>, f64>>,
}

impl fmt::Debug for GroundSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroundSet").field("costs", &self.costs).finish_non_exhaustive()
    }
}

impl<'a> GroundSet<'a> {
    pub fn new(costs: Vec<f64>, utility: impl Fn(&[usize]) -> f64 + 'a) -> Result<Self> {
        if let Some(c) = costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(format!("item costs must be positive, got {c}")));
        }
        Ok(Self { costs, utility: Box::new(utility), memo: RefCell::new(HashMap::new()) })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.costs[i]).sum()
    }

    /// `f(set)`; the set is canonicalized before lookup.
    pub fn value(&self, set: &[usize]) -> f64 {
        let mut key = set.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(v) = self.memo.borrow().get(&key) {
            return *v;
        }
        let v = (self.utility)(&key);
        self.memo.borrow_mut().insert(key, v);
        v
    }
}

/// Better of the best affordable singleton and the benefit-cost greedy set.
/// Returns the chosen items, sorted.
pub fn greedy_knapsack(g: &GroundSet<'_>, budget: f64) -> Vec<usize> {
    let mut single: Option<(usize, f64)> = None;
    for i in 0..g.len() {
        if g.costs[i] <= budget {
            let v = g.value(&[i]);
            if single.is_none_or(|(_, b)| v > b) {
                single = Some((i, v));
            }
        }
    }
    let mut greedy: Vec<usize> = Vec::new();
    let mut cost = 0.0;
    let mut current = 0.0;
    loop {
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..g.len() {
            if greedy.contains(&i) || cost + g.costs[i] > budget {
                continue;
            }
            let mut with = greedy.clone();
            with.push(i);
            let v = g.value(&with);
            let ratio = (v - current) / g.costs[i];
            if best.is_none_or(|(_, r, _)| ratio > r) {
                best = Some((i, ratio, v));
            }
        }
        let Some((i, _, v)) = best else { break };
        greedy.push(i);
        cost += g.costs[i];
        current = v;
    }
    greedy.sort_unstable();
    match single {
        Some((i, v)) if v > current => vec![i],
        _ => greedy,
    }
}

/// Exact best affordable subset by enumeration; ties go to the
/// lexicographically smallest sorted item list.
pub fn brute_force_knapsack(g: &GroundSet<'_>, budget: f64) -> Result<(Vec<usize>, f64)> {
    let n = g.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyItems(n));
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), g.value(&[]));
    for mask in 1u32..(1u32 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if g.cost(&set) > budget {
            continue;
        }
        let v = g.value(&set);
        if v > best.1 || (v == best.1 && set < best.0) {
            best = (set, v);
        }
    }
    Ok(best)
}

/// Optimal value `g(B)` of the budgeted problem.
pub fn knapsack_optimum(g: &GroundSet<'_>, budget: f64) -> Result<f64> {
    brute_force_knapsack(g, budget).map(|(_, v)| v)
}

/// Checks `g(B₁ + c_max)/B₁ ≥ g(B₂)/B₂` for `0 < B₁ ≤ B₂`, where `c_max`
/// is the largest item cost and `g` the exact budgeted optimum.
pub fn check_ratio_monotone(g: &GroundSet<'_>, b1: f64, b2: f64) -> Result<bool> {
    if !(b1 > 0.0 && b1 <= b2) {
        return Err(Error::InvalidParameter(format!("need 0 < B1 <= B2, got {b1}, {b2}")));
    }
    let c_max = g.costs.iter().copied().fold(0.0, f64::max);
    let lhs = knapsack_optimum(g, b1 + c_max)? / b1;
    let rhs = knapsack_optimum(g, b2)? / b2;
    Ok(lhs >= rhs - 1e-12 * rhs.abs().max(1.0))
}

/// Outcome of [`gamma_max_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMaxResult {
    pub gamma_max: f64,
    /// Information gain of the best single low-fidelity action.
    pub single_gain: f64,
    /// Information gain and cost of the greedy set when the loop stopped.
    pub greedy_gain: f64,
    pub greedy_cost: f64,
    pub greedy_len: usize,
}

/// Greedy upper bound on the information a single exploration phase with
/// threshold at least `beta` can collect.
///
/// Items are the (candidate, lower fidelity) pairs of the history's
/// candidate set, each usable once. Two tracks run side by side: the best
/// single item `S₁` and a benefit-cost greedy set `S₂` grown while
/// `c(S₂) ≤ budget`. After each addition
/// `γ = max(I(S₁), I(S₂)) / (½(1 − 1/e))`; once `c(S₂)` exceeds the largest
/// low-fidelity cost `c_max`, the loop stops as soon as
/// `γ / (c(S₂) − c_max) < β`.
pub fn gamma_max_bound(history: &History, budget: f64, beta: f64) -> Result<GammaMaxResult> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let design = history.design();
    let points = design.candidates().ok_or(Error::EmptyCandidates)?.clone();
    let model = design.model().clone();
    let lows: Vec<usize> = (0..model.target_index()).collect();
    let mut out = GammaMaxResult {
        gamma_max: 0.0,
        single_gain: 0.0,
        greedy_gain: 0.0,
        greedy_cost: 0.0,
        greedy_len: 0,
    };
    if lows.is_empty() {
        return Ok(out);
    }
    let c_max = lows.iter().map(|&l| model.cost(l)).fold(0.0, f64::max);
    for &l in &lows {
        let best = design.candidate_gains(l)?.into_iter().fold(0.0, f64::max);
        out.single_gain = out.single_gain.max(best);
    }

    let n = points.len();
    let mut taken = vec![false; n * lows.len()];
    let mut work: Design = design.clone();
    while out.greedy_cost <= budget {
        let mut best: Option<(usize, f64, f64)> = None;
        for (k, &l) in lows.iter().enumerate() {
            let lambda = model.cost(l);
            for (c, g) in work.candidate_gains(l)?.into_iter().enumerate() {
                if taken[k * n + c] {
                    continue;
                }
                let ratio = g / lambda;
                if best.is_none_or(|(_, r, _)| ratio > r) {
                    best = Some((k * n + c, ratio, g));
                }
            }
        }
        let Some((item, _, gain)) = best else { break };
        taken[item] = true;
        let (l, c) = (lows[item / n], item % n);
        work.push(Action::new(points[c].clone(), l))?;
        out.greedy_gain += gain;
        out.greedy_cost += model.cost(l);
        out.greedy_len += 1;
        out.gamma_max = out.single_gain.max(out.greedy_gain) / KNAPSACK_FACTOR;
        if out.greedy_cost <= c_max {
            continue;
        }
        if out.gamma_max / (out.greedy_cost - c_max) < beta {
            break;
        }
    }
    Ok(out)
}
