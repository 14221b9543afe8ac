//! Budgeted optimization policies: the multi-fidelity greedy loop, its
//! explore-once variant and a target-only baseline.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acquisition::{default_candidate_count, CandidateSet, Subroutine, TargetSelector};
use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
use crate::explore::{explore_design, ExploreConfig, StopReason};
use crate::model::{
    fit_hyperparameters_around, Action, FidelityModel, History, HyperGrid, Observation,
};

/// Slack used when comparing budgets.
const BUDGET_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub subroutine: Subroutine,
    pub explore: ExploreConfig,
    /// Refit hyperparameters before every `refit_every`-th episode; 0 disables.
    pub refit_every: usize,
    pub grid: HyperGrid,
    /// Candidate set size; `None` picks a default from the dimension.
    pub candidates: Option<usize>,
    /// Confidence parameter of the target-fidelity selector.
    pub delta: f64,
    /// Acquisition evaluations spent refining the best candidate by compass
    /// search before each target query; 0 keeps the candidate.
    pub polish_evals: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            subroutine: Subroutine::GpUcb,
            explore: ExploreConfig::default(),
            refit_every: 10,
            grid: HyperGrid { max_points: Some(100), ..HyperGrid::default() },
            candidates: None,
            delta: 0.1,
            polish_evals: 60,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        self.explore.validate()?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.candidates == Some(0) {
            return Err(Error::EmptyCandidates);
        }
        Ok(())
    }
}

/// Seeds of one run: the candidate set and the observation noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub candidates: u64,
    pub noise: u64,
}

impl Seeds {
    pub fn new(candidates: u64, noise: u64) -> Self {
        Self { candidates, noise }
    }

    /// Same seed for both streams.
    pub fn single(seed: u64) -> Self {
        Self::new(seed, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    MfMiGreedy,
    ExploreThenExploit,
    SfOnly,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] =
        [PolicyKind::MfMiGreedy, PolicyKind::ExploreThenExploit, PolicyKind::SfOnly];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MfMiGreedy => "mf_mi_greedy",
            PolicyKind::ExploreThenExploit => "explore_then_exploit",
            PolicyKind::SfOnly => "sf_only",
        }
    }

    pub fn run(
        self,
        problem: &BenchmarkProblem,
        budget: f64,
        cfg: &PolicyConfig,
        seeds: Seeds,
    ) -> Result<Trace> {
        match self {
            PolicyKind::MfMiGreedy => mf_mi_greedy(problem, budget, cfg, seeds),
            PolicyKind::ExploreThenExploit => explore_then_exploit(problem, budget, cfg, seeds),
            PolicyKind::SfOnly => sf_only(problem, budget, cfg, seeds),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

/// One executed query.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub action: Action,
    /// Noisy observed value.
    pub y: f64,
    /// Noise-free value of the queried fidelity at `action.x`.
    pub value: f64,
    /// Total cost spent once this query was paid for.
    pub cost_so_far: f64,
}

/// What the exploration phase of an episode looked like.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationRecord {
    /// Remaining budget passed to the exploration routine.
    pub budget: f64,
    pub beta: f64,
    /// `I(y_E; f | y_S)` of the selected low-fidelity set.
    pub info_gain: f64,
    pub stop_reason: StopReason,
}

/// A run of low-fidelity queries closed by exactly one target query.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub low: Vec<Query>,
    pub target: Query,
    /// `Λ_L`: cost of the low-fidelity prefix.
    pub low_cost: f64,
    /// `Λ_e`: low-fidelity costs plus the target cost.
    pub cost: f64,
    pub exploration: Option<ExplorationRecord>,
}

impl Episode {

    /// Reward: the noise-free target value of the closing query.
    pub fn reward(&self) -> f64 {
        self.target.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The run stopped early; completed episodes are kept.
    Failed(String),
}

/// Full record of one policy run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub policy: String,
    pub budget: f64,
    pub costs: Vec<f64>,
    pub episodes: Vec<Episode>,
    /// Model in force during each episode.
    pub models: Vec<Arc<FidelityModel>>,
    /// Candidate with the highest posterior mean of `f` at the end.
    pub recommendation: Option<Vec<f64>>,
    pub seeds: Seeds,
    pub status: RunStatus,
}

impl Trace {
    pub fn target_cost(&self) -> f64 {
        *self.costs.last().expect("at least one fidelity")
    }

    pub fn spent(&self) -> f64 {
        self.episodes.iter().map(|e| e.cost).sum()
    }

    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Every query in execution order, tagged with its episode index.
    pub fn queries(&self) -> impl Iterator<Item = (usize, &Query)> {
        self.episodes
            .iter()
            .enumerate()
            .flat_map(|(i, e)| e.low.iter().chain(std::iter::once(&e.target)).map(move |q| (i, q)))
    }

    /// Actions in execution order.
    pub fn actions(&self) -> Vec<Action> {
        self.queries().map(|(_, q)| q.action.clone()).collect()
    }

    /// Checks the episode structure and budget accounting.
    pub fn check(&self) -> Result<()> {
        let target = self.costs.len() - 1;
        let mut total = 0.0;
        for (i, e) in self.episodes.iter().enumerate() {
            if e.target.action.fidelity != target || e.low.iter().any(|q| q.action.fidelity >= target) {
                return Err(Error::InvalidParameter(format!("episode {i} is malformed")));
            }
            let low: f64 = e.low.iter().map(|q| self.costs[q.action.fidelity]).sum();
            if (low - e.low_cost).abs() > 1e-9 || (low + self.costs[target] - e.cost).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("episode {i}: cost fields off")));
            }
            for q in e.low.iter().chain(std::iter::once(&e.target)) {
                total += self.costs[q.action.fidelity];
                if (q.cost_so_far - total).abs() > 1e-9 * total.max(1.0) {
                    return Err(Error::InvalidParameter(format!("episode {i}: cost bookkeeping off")));
                }
            }
        }
        if total > self.budget + BUDGET_EPS {
            return Err(Error::InvalidParameter(format!(
                "spent {total} exceeds budget {}",
                self.budget
            )));
        }
        Ok(())
    }
}

struct Runner<'a> {
    problem: &'a BenchmarkProblem,
    cfg: &'a PolicyConfig,
    seeds: Seeds,
    base: Arc<FidelityModel>,
    candidates: CandidateSet,
    history: History,
    selector: Box<dyn TargetSelector + Send>,
    budget: f64,
    spent: f64,
    query_index: u64,
    episodes: Vec<Episode>,
    models: Vec<Arc<FidelityModel>>,
    name: &'static str,
}

impl<'a> Runner<'a> {
    fn new(
        name: &'static str,
        problem: &'a BenchmarkProblem,
        base: FidelityModel,
        budget: f64,
        cfg: &'a PolicyConfig,
        seeds: Seeds,
    ) -> Result<Self> {
        cfg.validate()?;
        let lambda_m = problem.target_cost();
        if !(budget + BUDGET_EPS >= lambda_m) || !budget.is_finite() {
            return Err(Error::InsufficientBudget { budget, target_cost: lambda_m });
        }
        let n = cfg.candidates.unwrap_or_else(|| default_candidate_count(problem.dim()));
        let candidates = CandidateSet::halton(problem.bounds(), n, seeds.candidates)?;
        let base = Arc::new(base);
        let history = History::new(base.clone()).with_candidates(candidates.points().clone())?;
        Ok(Self {
            problem,
            cfg,
            seeds,
            base,
            candidates,
            history,
            selector: cfg.subroutine.selector(cfg.delta),
            budget,
            spent: 0.0,
            query_index: 0,
            episodes: Vec::new(),
            models: Vec::new(),
            name,
        })
    }

    fn remaining(&self) -> f64 {
        self.budget - self.spent
    }

    fn can_afford_target(&self) -> bool {
        self.remaining() + BUDGET_EPS >= self.problem.target_cost()
    }

    /// Refits before episodes `1 + k·refit_every`, `k ≥ 1`.
    fn maybe_refit(&mut self) -> Result<()> {
        let done = self.episodes.len();
        let every = self.cfg.refit_every;
        if every == 0 || done == 0 || !done.is_multiple_of(every) || self.history.len() < 2 {
            return Ok(());
        }
        let fit = fit_hyperparameters_around(&self.history, self.base.clone(), &self.cfg.grid)?;
        if let Some(w) = &fit.warning {
            log::warn!("{}: {w}", self.name);
        }
        if !Arc::ptr_eq(&fit.model, self.history.model()) {
            self.history = self.history.with_model(fit.model)?;
        }
        Ok(())
    }

    fn observe(&mut self, a: &Action) -> Result<Query> {
        let obs = self.problem.evaluate_indexed(a, self.seeds.noise, self.query_index)?;
        self.query_index += 1;
        self.spent += self.problem.costs()[a.fidelity];
        Ok(Query {
            action: a.clone(),
            y: obs.y,
            value: self.problem.value(a.fidelity, &a.x)?,
            cost_so_far: self.spent,
        })
    }

    /// Runs exploration with the remaining budget and queries the selection.
    fn explore(&mut self) -> Result<(Vec<Query>, ExplorationRecord)> {
        let budget = self.remaining();
        let (res, design) = explore_design(budget, self.history.design(), &self.cfg.explore)?;
        let mut low = Vec::with_capacity(res.selected.len());
        for a in &res.selected {
            low.push(self.observe(a)?);
        }
        let ys: Vec<f64> = low.iter().map(|q| q.y).collect();
        self.history.extend_from_design(design, &ys)?;
        let record = ExplorationRecord {
            budget,
            beta: res.beta,
            info_gain: res.cumulative_info_gain,
            stop_reason: res.stop_reason,
        };
        Ok((low, record))
    }

    fn target_query(&mut self) -> Result<Query> {
        let (means, vars) = self.history.candidate_latent()?;
        let round = self.episodes.len() + 1;
        let i = self.selector.best_candidate(&means, &vars, round)?;
        let (x, var) = self.polish(self.candidates.get(i).to_vec(), means[i], vars[i], round)?;
        self.selector.commit(var);
        let q = self.observe(&Action::new(x.clone(), self.problem.m() - 1))?;
        // the model may see only the target fidelity
        let model_target = self.history.model().target_index();
        self.history.push(Observation::new(Action::new(x, model_target), q.y))?;
        Ok(q)
    }

    /// Compass search on the acquisition from `x`, with steps starting at
    /// 5% of each side and halving on failure. Returns the point and its
    /// posterior variance.
    fn polish(&self, mut x: Vec<f64>, mean: f64, mut var: f64, round: usize) -> Result<(Vec<f64>, f64)> {
        let n = self.candidates.len();
        let bounds = self.problem.bounds();
        let mut score = self.selector.score(mean, var, round, n);
        let mut step = 0.05;
        let mut evals = 0;
        while evals < self.cfg.polish_evals && step >= 1e-4 {
            let mut trials = Vec::with_capacity(2 * x.len());
            for (j, (lo, hi)) in bounds.iter().enumerate() {
                for sign in [-1.0, 1.0] {
                    let v = (x[j] + sign * step * (hi - lo)).clamp(*lo, *hi);
                    if v != x[j] {
                        let mut t = x.clone();
                        t[j] = v;
                        trials.push(t);
                    }
                }
            }
            if trials.is_empty() {
                break;
            }
            evals += trials.len();
            let post = self.history.predict_latent(&trials)?;
            let vars = post.variances();
            let mut improved = false;
            for (k, t) in trials.into_iter().enumerate() {
                let s = self.selector.score(post.mean[k], vars[k], round, n);
                if s > score {
                    (x, var, score, improved) = (t, vars[k], s, true);
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((x, var))
    }

    fn episode(&mut self, explore: bool) -> Result<()> {
        self.maybe_refit()?;
        let model = self.history.model().clone();
        let (low, exploration) = if explore {
            let (low, rec) = self.explore()?;
            (low, Some(rec))
        } else {
            (Vec::new(), None)
        };
        let target = self.target_query()?;
        let costs = self.problem.costs();
        let low_cost: f64 = low.iter().map(|q| costs[q.action.fidelity]).sum();
        let cost = low_cost + self.problem.target_cost();
        self.episodes.push(Episode { low, target, low_cost, cost, exploration });
        self.models.push(model);
        Ok(())
    }

    fn finish(self, outcome: Result<()>) -> Trace {
        let status = match outcome {
            Ok(()) => RunStatus::Completed,
            Err(e) => {
                log::warn!("{} run failed: {e}", self.name);
                RunStatus::Failed(e.to_string())
            }
        };
        let recommendation = self.history.candidate_latent().ok().and_then(|(means, _)| {
            let mut best: Option<(usize, f64)> = None;
            for (i, m) in means.into_iter().enumerate() {
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((i, m));
                }
            }
            best.map(|(i, _)| self.candidates.get(i).to_vec())
        });
        Trace {
            policy: self.name.to_string(),
            budget: self.budget,
            costs: self.problem.costs().to_vec(),
            episodes: self.episodes,
            models: self.models,
            recommendation,
            seeds: self.seeds,
            status,
        }
    }
}

/// Multi-fidelity greedy policy. While the remaining budget covers a
/// target query: explore cheap fidelities with the remaining budget, query
/// the selection, then pick and query one target point.
///
/// Errors only on invalid input; a numerical failure mid-run yields a trace
/// with [`RunStatus::Failed`] holding the completed episodes.
pub fn mf_mi_greedy(
    problem: &BenchmarkProblem,
    budget: f64,
    cfg: &PolicyConfig,
    seeds: Seeds,
) -> Result<Trace> {
    let mut r = Runner::new("mf_mi_greedy", problem, problem.default_model()?, budget, cfg, seeds)?;
    let mut outcome = Ok(());
    while r.can_afford_target() {
        outcome = r.episode(true);
        if outcome.is_err() {
            break;
        }
    }
    Ok(r.finish(outcome))
}

/// One exploration phase with the full budget, then target queries only.
pub fn explore_then_exploit(
    problem: &BenchmarkProblem,
    budget: f64,
    cfg: &PolicyConfig,
    seeds: Seeds,
) -> Result<Trace> {
    let mut r =
        Runner::new("explore_then_exploit", problem, problem.default_model()?, budget, cfg, seeds)?;
    let mut outcome = Ok(());
    let mut first = true;
    while r.can_afford_target() {
        outcome = r.episode(first);
        first = false;
        if outcome.is_err() {
            break;
        }
    }
    Ok(r.finish(outcome))
}

/// Target-fidelity-only baseline: `⌊Λ/λ_m⌋` rounds of the configured
/// selector on a model of the target alone.
pub fn sf_only(
    problem: &BenchmarkProblem,
    budget: f64,
    cfg: &PolicyConfig,
    seeds: Seeds,
) -> Result<Trace> {
    let single = problem.target_only().default_model()?;
    let mut r = Runner::new("sf_only", problem, single, budget, cfg, seeds)?;
    let mut outcome = Ok(());
    while r.can_afford_target() {
        outcome = r.episode(false);
        if outcome.is_err() {
            break;
        }
    }
    Ok(r.finish(outcome))
}

/// One line of the trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub policy: String,
    pub seed: u64,
    pub episode: usize,
    pub step: usize,
    /// 1-based; the highest value is the target.
    pub fidelity: usize,
    pub cost_so_far: f64,
    pub y: f64,
    pub x: Vec<f64>,
}

/// Fixed 12-significant-digit formatting used in every CSV.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

/// Writes the header `policy,seed,episode,step,fidelity,cost_so_far,y,x0..`.
pub fn write_trace_header<W: Write>(w: &mut csv::Writer<W>, dim: usize) -> Result<()> {
    let mut header: Vec<String> =
        ["policy", "seed", "episode", "step", "fidelity", "cost_so_far", "y"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(csv_err)?;
    Ok(())
}

/// Appends one row per query of `trace`.
pub fn write_trace_rows<W: Write>(w: &mut csv::Writer<W>, trace: &Trace, seed: u64) -> Result<()> {
    for (e, ep) in trace.episodes.iter().enumerate() {
        for (step, q) in ep.low.iter().chain(std::iter::once(&ep.target)).enumerate() {
            let mut row = vec![
                trace.policy.clone(),
                seed.to_string(),
                e.to_string(),
                step.to_string(),
                (q.action.fidelity + 1).to_string(),
                fmt_num(q.cost_so_far),
                fmt_num(q.y),
            ];
            row.extend(q.action.x.iter().map(|v| fmt_num(*v)));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Parses a trace CSV written by [`write_trace_rows`].
pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |field: &str| Error::Config(format!("trace row {}: bad {field}", line + 2));
        if rec.len() < 8 {
            return Err(bad("column count"));
        }
        let num = |i: usize, f: &str| rec[i].parse::<f64>().map_err(|_| bad(f));
        let int = |i: usize, f: &str| rec[i].parse::<u64>().map_err(|_| bad(f));
        out.push(TraceRecord {
            policy: rec[0].to_string(),
            seed: int(1, "seed")?,
            episode: int(2, "episode")? as usize,
            step: int(3, "step")? as usize,
            fidelity: int(4, "fidelity")? as usize,
            cost_so_far: num(5, "cost_so_far")?,
            y: num(6, "y")?,
            x: (7..rec.len()).map(|i| num(i, "x")).collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_problem;

    fn quick_cfg() -> PolicyConfig {
        PolicyConfig { candidates: Some(200), refit_every: 0, ..PolicyConfig::default() }
    }

    #[test]
    fn budget_below_target_cost_is_rejected() {
        let p = make_problem("toy1d").unwrap();
        for k in PolicyKind::ALL {
            assert!(matches!(
                k.run(&p, 3.0, &quick_cfg(), Seeds::single(1)),
                Err(Error::InsufficientBudget { .. })
            ));
        }
    }

    #[test]
    fn budget_equal_to_target_cost_gives_one_bare_episode() {
        let p = make_problem("toy1d").unwrap();
        for k in PolicyKind::ALL {
            let t = k.run(&p, 4.0, &quick_cfg(), Seeds::single(1)).unwrap();
            assert_eq!(t.episodes.len(), 1);
            assert!(t.episodes[0].low.is_empty());
            t.check().unwrap();
        }
    }

    #[test]
    fn sf_only_uses_floor_budget_rounds() {
        let p = make_problem("toy1d").unwrap();
        let t = sf_only(&p, 7.9, &quick_cfg(), Seeds::single(2)).unwrap();
        assert_eq!(t.episodes.len(), 1);
        let t = sf_only(&p, 41.0, &quick_cfg(), Seeds::single(2)).unwrap();
        assert_eq!(t.episodes.len(), 10);
        assert!((t.spent() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn traces_are_well_formed_and_deterministic() {
        let p = make_problem("toy1d").unwrap();
        let cfg = PolicyConfig { refit_every: 3, ..quick_cfg() };
        for k in PolicyKind::ALL {
            let a = k.run(&p, 60.0, &cfg, Seeds::new(3, 4)).unwrap();
            let b = k.run(&p, 60.0, &cfg, Seeds::new(3, 4)).unwrap();
            assert!(a.is_completed());
            a.check().unwrap();
            assert_eq!(a.episodes, b.episodes);
            assert!(a.recommendation.is_some());
            assert_eq!(a.models.len(), a.episodes.len());
        }
    }

    #[test]
    fn explore_then_exploit_explores_only_once() {
        let p = make_problem("toy1d").unwrap();
        let t = explore_then_exploit(&p, 80.0, &quick_cfg(), Seeds::single(5)).unwrap();
        assert!(t.episodes[1..].iter().all(|e| e.low.is_empty() && e.exploration.is_none()));
        assert!(t.episodes[0].exploration.is_some());
    }

    #[test]
    fn trace_csv_round_trip() {
        let p = make_problem("toy1d").unwrap();
        let t = mf_mi_greedy(&p, 30.0, &quick_cfg(), Seeds::single(6)).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        write_trace_header(&mut w, 1).unwrap();
        write_trace_rows(&mut w, &t, 6).unwrap();
        let bytes = w.into_inner().unwrap();
        let recs = read_trace_csv(bytes.as_slice()).unwrap();
        let qs: Vec<_> = t.queries().collect();
        assert_eq!(recs.len(), qs.len());
        for (r, (e, q)) in recs.iter().zip(qs) {
            assert_eq!(r.episode, e);
            assert_eq!(r.fidelity, q.action.fidelity + 1);
            assert!((r.y - q.y).abs() <= 1e-10 * q.y.abs().max(1e-300));
            assert!((r.x[0] - q.action.x[0]).abs() <= 1e-11);
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("ucb".parse::<PolicyKind>().is_err());
    }
}
