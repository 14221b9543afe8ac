//! Acceptance checks shared by the `verify` command and the acceptance
//! test target.
//!
//! Each criterion compares library results against an independent
//! computation: explicit matrix inverses and determinants instead of the
//! Cholesky machinery, exhaustive enumeration instead of greedy selection,
//! and repeated harness runs for determinism.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{default_candidate_count, CandidateSet};
use crate::benchmarks::{make_problem, BenchmarkProblem};
use crate::error::{Error, Result};
use crate::explore::{explore_lf, ExploreConfig};
use crate::gp::{posterior, GpPrior, PriorMean, SquaredExpKernel};
use crate::harness::{run_all, ExperimentConfig, RunRecord};
use crate::model::{Action, FidelityModel, History, Observation};
use crate::policy::{mf_mi_greedy, sf_only, PolicyConfig, PolicyKind, Seeds, Trace};
use crate::regret::{cumulative_regret_at, exploration_certificate, regret_decomposition};
use crate::submodular::{brute_force_knapsack, check_ratio_monotone, gamma_max_bound, greedy_knapsack, GroundSet, KNAPSACK_FACTOR};

/// Result of one criterion before timing is attached.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    /// Wall-clock limit; exceeding it fails the criterion.
    pub time_limit: Option<Duration>,
    run: fn(&mut Suite) -> Result<Outcome>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {:<28} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Shared state across criteria: expensive runs are computed once.
#[derive(Default)]
pub struct Suite {
    currin: Option<Vec<RunRecord>>,
    reduction: Vec<Trace>,
}

impl Suite {
    /// Runs one criterion, catching errors as failures.
    pub fn check(&mut self, c: &Criterion) -> CheckReport {
        let start = Instant::now();
        let outcome = (c.run)(self).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let mut passed = outcome.passed;
        let mut detail = outcome.detail;
        if let Some(limit) = c.time_limit {
            if elapsed > limit {
                passed = false;
                detail = format!("{detail}; exceeded {}s", limit.as_secs());
            }
        }
        CheckReport { id: c.id, name: c.name, passed, detail, elapsed }
    }

    /// Currin runs of every policy over 20 seeds at budget 100 λ_m.
    fn currin_runs(&mut self) -> Result<&[RunRecord]> {
        if self.currin.is_none() {
            let cfg = ExperimentConfig { problem: "currin2".into(), seeds: 20, ..ExperimentConfig::default() };
            self.currin = Some(run_all(&cfg)?);
        }
        Ok(self.currin.as_deref().unwrap_or_default())
    }
}

pub fn criteria() -> Vec<Criterion> {
    let secs = |s| Some(Duration::from_secs(s));
    vec![
        Criterion { id: 1, name: "gp oracle equivalence", time_limit: secs(5), run: gp_oracle },
        Criterion { id: 2, name: "info gain chain rule", time_limit: secs(10), run: chain_rule },
        Criterion { id: 3, name: "additive consistency", time_limit: None, run: additive_consistency },
        Criterion { id: 4, name: "submodular guarantees", time_limit: secs(60), run: submodular },
        Criterion { id: 5, name: "explore certificate", time_limit: None, run: explore_certificate },
        Criterion { id: 6, name: "regret decomposition", time_limit: None, run: decomposition },
        Criterion { id: 7, name: "degenerate reduction", time_limit: None, run: reduction },
        Criterion { id: 8, name: "relative performance", time_limit: secs(600), run: relative_performance },
        Criterion { id: 9, name: "no-regret trend", time_limit: None, run: no_regret },
        Criterion { id: 10, name: "gamma_max dominance", time_limit: None, run: gamma_max_dominance },
        Criterion { id: 11, name: "harness determinism", time_limit: None, run: determinism },
    ]
}

/// Runs every criterion in order.
pub fn run_all_criteria() -> Vec<CheckReport> {
    let mut suite = Suite::default();
    criteria().iter().map(|c| suite.check(c)).collect()
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

fn random_kernel(rng: &mut ChaCha8Rng, d: usize) -> Result<SquaredExpKernel> {
    SquaredExpKernel::new(
        rng.random_range(0.3..2.0),
        (0..d).map(|_| rng.random_range(0.15..1.0)).collect(),
    )
}

/// `σ² exp(−½ Σ ((x − x')/ℓ)²)` written out directly.
fn se(k: &SquaredExpKernel, x: &[f64], y: &[f64]) -> f64 {
    let r2: f64 = x.iter().zip(y).zip(k.lengthscales()).map(|((a, b), l)| ((a - b) / l).powi(2)).sum();
    k.signal_variance() * (-0.5 * r2).exp()
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gp_oracle(_: &mut Suite) -> Result<Outcome> {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=8);
        let q = rng.random_range(1..=4);
        let kernel = random_kernel(&mut rng, d)?;
        let noise = rng.random_range(0.01..0.5);
        let c = rng.random_range(-1.0..1.0);
        let prior = GpPrior::new(PriorMean::Constant(c), kernel.clone(), noise)?;
        let x: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng, d)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xq: Vec<Vec<f64>> = (0..q).map(|_| point(&mut rng, d)).collect();
        let post = posterior(&prior, &x, &y, &xq)?;

        let kxx = DMatrix::from_fn(n, n, |i, j| se(&kernel, &x[i], &x[j]) + if i == j { noise } else { 0.0 });
        let kqx = DMatrix::from_fn(q, n, |i, j| se(&kernel, &xq[i], &x[j]));
        let kqq = DMatrix::from_fn(q, q, |i, j| se(&kernel, &xq[i], &xq[j]));
        let inv = kxx.try_inverse().ok_or_else(|| Error::InvalidParameter("singular oracle".into()))?;
        let resid = DVector::from_iterator(n, y.iter().map(|v| v - c));
        let mean = DVector::from_element(q, c) + &kqx * &inv * resid;
        let cov = kqq - &kqx * &inv * kqx.transpose();
        worst = worst.max((post.mean - mean).amax()).max(max_abs_diff(post.cov.as_matrix(), &cov));
    }
    Ok(Outcome::new(worst <= 1e-8, format!("max deviation {worst:.2e} (tol 1e-8)")))
}

/// Random two-fidelity model in `d` dimensions.
fn random_model(rng: &mut ChaCha8Rng, d: usize) -> Result<FidelityModel> {
    let target = GpPrior::zero_mean(random_kernel(rng, d)?, rng.random_range(0.01..0.3))?;
    let err_kernel = SquaredExpKernel::new(
        rng.random_range(0.05..0.5),
        (0..d).map(|_| rng.random_range(0.15..1.0)).collect(),
    )?;
    let err = GpPrior::zero_mean(err_kernel, rng.random_range(0.01..0.3))?;
    FidelityModel::new(target, vec![err], vec![1.0, rng.random_range(2.0..6.0)])
}

/// `I(y_E; f | y_S)` from explicit covariance matrices: the log-determinant
/// ratio of `Cov(y_E | y_S)` and `Cov(y_E | f, y_S)`, where the latter only
/// involves the error and noise terms.
fn oracle_gain(model: &FidelityModel, s: &[Action], e: &[Action]) -> f64 {
    let target = model.target_index();
    let kf = &model.target_prior().kernel;
    let err = |a: &Action, b: &Action| -> f64 {
        let mut v = 0.0;
        if a.fidelity == b.fidelity && a.fidelity < target {
            v += se(model.error_kernel(a.fidelity).expect("low fidelity"), &a.x, &b.x);
        }
        v
    };
    let full = |a: &Action, b: &Action| se(kf, &a.x, &b.x) + err(a, b);
    let cond = |k: &dyn Fn(&Action, &Action) -> f64| -> DMatrix<f64> {
        let ns = s.len();
        let ne = e.len();
        let kss = DMatrix::from_fn(ns, ns, |i, j| {
            k(&s[i], &s[j]) + if i == j { model.noise_variance(s[i].fidelity) } else { 0.0 }
        });
        let kes = DMatrix::from_fn(ne, ns, |i, j| k(&e[i], &s[j]));
        let kee = DMatrix::from_fn(ne, ne, |i, j| {
            k(&e[i], &e[j]) + if i == j { model.noise_variance(e[i].fidelity) } else { 0.0 }
        });
        if ns == 0 {
            return kee;
        }
        let inv = kss.try_inverse().expect("invertible history covariance");
        kee - &kes * inv * kes.transpose()
    };
    let a = cond(&full).determinant();
    let b = cond(&err).determinant();
    0.5 * (a / b).ln()
}

fn random_action(rng: &mut ChaCha8Rng, d: usize, m: usize) -> Action {
    Action::new(point(rng, d), rng.random_range(0..m))
}

fn chain_rule(_: &mut Suite) -> Result<Outcome> {
    let mut rng = rng(2);
    let mut worst_chain: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut min_gain = f64::INFINITY;
    for _ in 0..100 {
        let d = rng.random_range(1..=2);
        let model = std::sync::Arc::new(random_model(&mut rng, d)?);
        let n = rng.random_range(0..=5);
        let obs: Vec<Observation> = (0..n)
            .map(|_| Observation::new(random_action(&mut rng, d, 2), rng.random_range(-1.0..1.0)))
            .collect();
        let h = History::from_observations(model.clone(), &obs)?;
        let a = random_action(&mut rng, d, 2);
        let b = random_action(&mut rng, d, 2);
        let joint = h.info_gain_set(&[a.clone(), b.clone()])?;
        let ia = h.info_gain_single(&a)?;
        let ib_a = h.update(Observation::new(a.clone(), 0.3))?.info_gain_single(&b)?;
        worst_chain = worst_chain.max((joint - ia - ib_a).abs());
        min_gain = min_gain.min(joint).min(ia).min(ib_a);

        let s: Vec<Action> = obs.iter().map(|o| o.action.clone()).collect();
        worst_oracle = worst_oracle.max((joint - oracle_gain(&model, &s, &[a, b])).abs());
    }
    let passed = worst_chain <= 1e-8 && min_gain >= -1e-10 && worst_oracle <= 1e-8;
    Ok(Outcome::new(
        passed,
        format!("chain {worst_chain:.2e}, oracle {worst_oracle:.2e} (tol 1e-8), min gain {min_gain:.2e}"),
    ))
}

fn additive_consistency(_: &mut Suite) -> Result<Outcome> {
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(1..=3);
        let model = std::sync::Arc::new(random_model(&mut rng, d)?);
        let n = rng.random_range(1..=8);
        let x: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng, d)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let obs: Vec<Observation> =
            x.iter().zip(&y).map(|(p, v)| Observation::new(Action::new(p.clone(), 1), *v)).collect();
        let h = History::from_observations(model.clone(), &obs)?;
        let xq: Vec<Vec<f64>> = (0..3).map(|_| point(&mut rng, d)).collect();
        let mf = h.predict_latent(&xq)?;
        let sf = posterior(model.target_prior(), &x, &y, &xq)?;
        worst = worst.max((mf.mean - sf.mean).amax()).max(max_abs_diff(mf.cov.as_matrix(), sf.cov.as_matrix()));
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max deviation {worst:.2e} (tol 1e-10)")))
}

/// Weighted coverage: item `i` covers `sets[i]` of a weighted universe.
fn coverage(weights: Vec<f64>, sets: Vec<Vec<usize>>) -> impl Fn(&[usize]) -> f64 {
    move |s: &[usize]| {
        let mut covered = vec![false; weights.len()];
        for &i in s {
            for &u in &sets[i] {
                covered[u] = true;
            }
        }
        covered.iter().zip(&weights).filter(|(c, _)| **c).map(|(_, w)| w).sum()
    }
}

/// Exhaustive optimum of an affordable subset.
fn enumerate_opt(f: &dyn Fn(&[usize]) -> f64, costs: &[f64], budget: f64) -> f64 {
    let n = costs.len();
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.iter().map(|&i| costs[i]).sum::<f64>() <= budget)
        .map(|s| f(&s))
        .fold(0.0, f64::max)
}

fn submodular(_: &mut Suite) -> Result<Outcome> {
    let mut rng = rng(4);
    let mut worst_ratio = f64::INFINITY;
    let mut ratio_failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let universe = rng.random_range(3..=12);
        let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(0.1..2.0)).collect();
        let sets: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..universe).filter(|_| rng.random_bool(0.3)).collect())
            .collect();
        let costs: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let f = coverage(weights, sets);
        let opt_of = |b: f64| enumerate_opt(&f, &costs, b);
        let g = GroundSet::new(costs.clone(), &f)?;
        let budget = rng.random_range(0.5..8.0);
        let opt = opt_of(budget);
        let (_, bf) = brute_force_knapsack(&g, budget)?;
        if (bf - opt).abs() > 1e-12 {
            return Ok(Outcome::new(false, "brute force disagrees with enumeration"));
        }
        let greedy = g.value(&greedy_knapsack(&g, budget));
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(greedy / opt);
        }
        let b1 = rng.random_range(0.5..6.0);
        let b2 = b1 + rng.random_range(0.0..6.0);
        if !check_ratio_monotone(&g, b1, b2)? {
            ratio_failures += 1;
        }
    }
    let passed = worst_ratio >= KNAPSACK_FACTOR - 1e-12 && ratio_failures == 0;
    Ok(Outcome::new(
        passed,
        format!(
            "min greedy/OPT {worst_ratio:.3} (need {KNAPSACK_FACTOR:.3}), ratio-monotone failures {ratio_failures}/200"
        ),
    ))
}

fn explore_certificate(_: &mut Suite) -> Result<Outcome> {
    let problem = make_problem("toy1d")?;
    let model = std::sync::Arc::new(problem.default_model()?);
    let cfg = ExploreConfig::default();
    let lambda_m = problem.target_cost();
    let mut nonempty = 0;
    let mut worst_margin = f64::INFINITY;
    for seed in 0..50u64 {
        let mut rng = rng(500 + seed);
        let cands = CandidateSet::halton(problem.bounds(), 200, seed)?;
        let mut h = History::new(model.clone()).with_candidates(cands.points().clone())?;
        for i in 0..rng.random_range(0..=8) {
            let a = Action::new(point(&mut rng, 1), rng.random_range(0..2));
            h.push(problem.evaluate_indexed(&a, seed, i)?)?;
        }
        let budget = rng.random_range(lambda_m..80.0);
        let r = explore_lf(budget, &h, &cfg)?;
        if r.selected.is_empty() {
            continue;
        }
        nonempty += 1;
        if r.cost + lambda_m > budget + 1e-12 {
            return Ok(Outcome::new(false, format!("seed {seed}: cost {} + λ_m exceeds {budget}", r.cost)));
        }
        let ratio = h.info_gain_set(&r.selected)? / r.cost;
        worst_margin = worst_margin.min(ratio - r.beta);
    }
    let passed = worst_margin >= -1e-10 && nonempty > 0;
    Ok(Outcome::new(passed, format!("{nonempty}/50 nonempty, min ratio − β {worst_margin:.3e}")))
}

fn check_traces<'a>(
    traces: impl Iterator<Item = &'a Trace>,
    f_star: f64,
    alpha_exponent: f64,
) -> (usize, f64, f64) {
    let mut n = 0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_cert = f64::NEG_INFINITY;
    for t in traces {
        n += 1;
        worst_residual = worst_residual.max(regret_decomposition(t, f_star).residual().abs());
        let (low, bound) = exploration_certificate(t, alpha_exponent);
        worst_cert = worst_cert.max(low - bound);
    }
    (n, worst_residual, worst_cert)
}

fn decomposition(suite: &mut Suite) -> Result<Outcome> {
    if suite.reduction.is_empty() {
        suite.reduction = reduction_traces()?;
    }
    let f_star = make_problem("currin2")?.f_star();
    let alpha = PolicyConfig::default().explore.alpha_exponent;
    let reduction = std::mem::take(&mut suite.reduction);
    let (n1, r1, c1) = check_traces(reduction.iter(), f_star, alpha);
    suite.reduction = reduction;
    let runs = suite.currin_runs()?;
    let (n2, r2, c2) = check_traces(runs.iter().map(|r| &r.trace), f_star, alpha);
    let (residual, cert) = (r1.max(r2), c1.max(c2));
    Ok(Outcome::new(
        residual <= 1e-9 && cert <= 1e-6,
        format!("{} traces, max residual {residual:.2e}, max ΣΛ_L − αΣI {cert:.3e}", n1 + n2),
    ))
}

/// Three matched-seed pairs: the multi-fidelity loop on the target-only
/// problem, then the target-only baseline on the full problem.
fn reduction_traces() -> Result<Vec<Trace>> {
    let problem = make_problem("currin2")?;
    let single = problem.target_only();
    let cfg = PolicyConfig::default();
    let budget = 100.0 * problem.target_cost();
    let mut out = Vec::new();
    for s in 0..3u64 {
        let seeds = Seeds::new(s, 1000 + s);
        out.push(mf_mi_greedy(&single, budget, &cfg, seeds)?);
        out.push(sf_only(&problem, budget, &cfg, seeds)?);
    }
    Ok(out)
}

fn reduction(suite: &mut Suite) -> Result<Outcome> {
    if suite.reduction.is_empty() {
        suite.reduction = reduction_traces()?;
    }
    let mut mismatches = 0;
    let mut queries = 0;
    for pair in suite.reduction.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let xa: Vec<&Vec<f64>> = a.queries().map(|(_, q)| &q.action.x).collect();
        let xb: Vec<&Vec<f64>> = b.queries().map(|(_, q)| &q.action.x).collect();
        let ya: Vec<f64> = a.queries().map(|(_, q)| q.y).collect();
        let yb: Vec<f64> = b.queries().map(|(_, q)| q.y).collect();
        queries += xa.len();
        if xa != xb || ya != yb || !a.is_completed() || !b.is_completed() {
            mismatches += 1;
        }
    }
    Ok(Outcome::new(mismatches == 0, format!("3 seed pairs, {queries} target queries, {mismatches} mismatching")))
}

fn mean_final(runs: &[RunRecord], p: PolicyKind) -> f64 {
    let v: Vec<f64> = runs.iter().filter(|r| r.policy == p).map(|r| r.simple_regret.final_value()).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn relative_performance(suite: &mut Suite) -> Result<Outcome> {
    let runs = suite.currin_runs()?;
    if let Some(r) = runs.iter().find(|r| !r.trace.is_completed()) {
        return Ok(Outcome::new(false, format!("{} seed {} failed", r.policy, r.seed)));
    }
    let mf = mean_final(runs, PolicyKind::MfMiGreedy);
    let sf = mean_final(runs, PolicyKind::SfOnly);
    let ete = mean_final(runs, PolicyKind::ExploreThenExploit);
    Ok(Outcome::new(
        mf <= 1.10 * sf && mf <= ete,
        format!("final simple regret: mf_mi_greedy {mf:.4}, sf_only {sf:.4}, explore_then_exploit {ete:.4}"),
    ))
}

fn no_regret(suite: &mut Suite) -> Result<Outcome> {
    let problem = make_problem("currin2")?;
    let f_star = problem.f_star();
    let runs = suite.currin_runs()?;
    let mf: Vec<&Trace> = runs.iter().filter(|r| r.policy == PolicyKind::MfMiGreedy).map(|r| &r.trace).collect();
    let per_cost: Vec<f64> = [25.0, 50.0, 75.0, 100.0]
        .iter()
        .map(|k| {
            let c = k * problem.target_cost();
            mf.iter().map(|t| cumulative_regret_at(t, f_star, c) / c).sum::<f64>() / mf.len() as f64
        })
        .collect();
    let tol = 0.02 * per_cost[0];
    let mut inversions = 0;
    let mut large = false;
    for w in per_cost.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            large |= w[1] - w[0] > tol;
        }
    }
    let shown: Vec<String> = per_cost.iter().map(|v| format!("{v:.4}")).collect();
    Ok(Outcome::new(
        inversions <= 1 && !large,
        format!("R(c)/c at 25/50/75/100 λ_m: {}", shown.join(", ")),
    ))
}

fn gamma_max_dominance(_: &mut Suite) -> Result<Outcome> {
    let problem = make_problem("toy1d")?;
    let cfg = PolicyConfig { refit_every: 0, ..PolicyConfig::default() };
    let budget = 100.0 * problem.target_cost();
    let mut traces = Vec::new();
    for s in 0..20u64 {
        traces.push(mf_mi_greedy(&problem, budget, &cfg, Seeds::new(s, 2000 + s))?);
    }
    let records = traces.iter().flat_map(|t| t.episodes.iter().filter_map(|e| e.exploration.as_ref()));
    let beta = records.clone().map(|x| x.beta).fold(f64::INFINITY, f64::min);
    let max_gain = records.map(|x| x.info_gain).fold(0.0, f64::max);
    if !beta.is_finite() {
        return Ok(Outcome::new(false, "no exploration episodes"));
    }
    let n = cfg.candidates.unwrap_or_else(|| default_candidate_count(problem.dim()));
    let mut min_bound = f64::INFINITY;
    for t in &traces {
        let worst = t
            .episodes
            .iter()
            .filter_map(|e| e.exploration.as_ref())
            .map(|x| x.info_gain)
            .fold(0.0, f64::max);
        let prior = prior_history(&problem, n, t.seeds.candidates)?;
        let g = gamma_max_bound(&prior, budget, beta)?.gamma_max;
        min_bound = min_bound.min(g);
        if g < worst {
            return Ok(Outcome::new(false, format!("seed {}: γ_max {g:.4} < episode gain {worst:.4}", t.seeds.candidates)));
        }
    }
    Ok(Outcome::new(true, format!("min γ_max {min_bound:.4} ≥ max episode gain {max_gain:.4} (β {beta:.4})")))
}

fn prior_history(problem: &BenchmarkProblem, n: usize, seed: u64) -> Result<History> {
    let cands = CandidateSet::halton(problem.bounds(), n, seed)?;
    History::new(std::sync::Arc::new(problem.default_model()?)).with_candidates(cands.points().clone())
}

fn scratch_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("mfbo-verify-{}-{tag}", std::process::id()))
}

fn read_csvs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| Ok((e.file_name().to_string_lossy().into_owned(), fs::read(e.path())?)))
        .collect::<Result<_>>()?;
    files.sort();
    Ok(files)
}

fn determinism(_: &mut Suite) -> Result<Outcome> {
    let dirs = [scratch_dir("a"), scratch_dir("b")];
    let mut outputs = Vec::new();
    for d in &dirs {
        let _ = fs::remove_dir_all(d);
        let out = d.to_string_lossy().into_owned();
        let code = crate::cli::cli_main(["mfbo", "bench", "--problem", "currin2", "--seeds", "3", "--out", &out, "--quiet"]);
        if code != 0 {
            return Ok(Outcome::new(false, format!("bench exited with {code}")));
        }
        outputs.push(read_csvs(d)?);
    }
    for d in &dirs {
        let _ = fs::remove_dir_all(d);
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    let same = outputs[0] == outputs[1] && !names.is_empty();
    Ok(Outcome::new(same, format!("compared {}", names.join(", "))))
}
