//! Seeded multi-run experiments and CSV output.

use std::fs::{self, File};
use std::io::BufWriter;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::benchmarks::{make_problem, mix64, BenchmarkProblem};
use crate::error::{Error, Result};
use crate::policy::{
    csv_err, fmt_num, write_trace_header, write_trace_rows, PolicyConfig, PolicyKind, RunStatus,
    Seeds, Trace,
};
use crate::regret::{cumulative_regret_curve, simple_regret_curve, write_curves_csv, RegretCurve};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MFBO_THREADS";

/// Checkpoints as fractions of the budget.
pub const CHECKPOINT_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    pub policies: Vec<PolicyKind>,
    /// Budget as a multiple of the target cost.
    pub budget_mult: f64,
    pub seeds: usize,
    pub master_seed: u64,
    pub policy: PolicyConfig,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "currin2".into(),
            policies: PolicyKind::ALL.to_vec(),
            budget_mult: 100.0,
            seeds: 20,
            master_seed: 0,
            policy: PolicyConfig::default(),
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        make_problem(&self.problem)?;
        if !(self.budget_mult.is_finite() && self.budget_mult >= 1.0) {
            return Err(Error::Config(format!("budget_mult must be >= 1, got {}", self.budget_mult)));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be >= 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("policies must not be empty".into()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(p) {
                return Err(Error::Config(format!("policy `{p}` listed twice")));
            }
        }
        self.policy.validate().map_err(|e| Error::Config(format!("policy: {e}")))
    }

    pub fn budget(&self, problem: &BenchmarkProblem) -> f64 {
        self.budget_mult * problem.target_cost()
    }

    pub fn checkpoints(&self, problem: &BenchmarkProblem) -> Vec<f64> {
        let b = self.budget(problem);
        CHECKPOINT_FRACTIONS.iter().map(|f| f * b).collect()
    }
}

/// FNV-1a over the policy name.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seeds of run `index`. The candidate set depends only on the master seed
/// and index, so policies compared on one index share candidates; the noise
/// stream also mixes in the policy name.
pub fn run_seeds(master: u64, policy: PolicyKind, index: u64) -> Seeds {
    let base = mix64(master ^ mix64(index));
    Seeds::new(base, mix64(base ^ name_hash(policy.name())))
}

/// One finished (or failed) run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub policy: PolicyKind,
    pub seed: u64,
    pub trace: Trace,
    pub simple_regret: RegretCurve,
    pub cumulative_regret: RegretCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: PolicyKind,
    pub checkpoint_cost: f64,
    pub mean_simple_regret: f64,
    pub stderr: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn failed(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| !r.trace.is_completed())
    }
}

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn failed_trace(policy: PolicyKind, problem: &BenchmarkProblem, budget: f64, seeds: Seeds, msg: String) -> Trace {
    Trace {
        policy: policy.name().to_string(),
        budget,
        costs: problem.costs().to_vec(),
        episodes: Vec::new(),
        models: Vec::new(),
        recommendation: None,
        seeds,
        status: RunStatus::Failed(msg),
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    problem: &BenchmarkProblem,
    policy: PolicyKind,
    seed: u64,
) -> RunRecord {
    let budget = cfg.budget(problem);
    let seeds = run_seeds(cfg.master_seed, policy, seed);
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| policy.run(problem, budget, &cfg.policy, seeds)));
    let trace = match outcome {
        Ok(Ok(t)) => t,
        Ok(Err(e)) => failed_trace(policy, problem, budget, seeds, e.to_string()),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            failed_trace(policy, problem, budget, seeds, format!("panic: {msg}"))
        }
    };
    let f_star = problem.f_star();
    RunRecord {
        policy,
        seed,
        simple_regret: simple_regret_curve(&trace, Some(f_star)),
        cumulative_regret: cumulative_regret_curve(&trace, f_star, &cfg.checkpoints(problem)),
        trace,
    }
}

/// Runs every `(policy, seed)` pair without writing files. Runs are
/// ordered by policy, then seed.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let problem = make_problem(&cfg.problem)?;
    let jobs: Vec<(PolicyKind, u64)> = cfg
        .policies
        .iter()
        .flat_map(|p| (0..cfg.seeds as u64).map(move |s| (*p, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|(p, s)| run_one(cfg, &problem, *p, *s)).collect()))
}

/// Mean and standard error of the simple regret at each checkpoint, over
/// the runs that have a target query by then.
pub fn summarize(cfg: &ExperimentConfig, runs: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    let problem = make_problem(&cfg.problem)?;
    let mut rows = Vec::new();
    for p in &cfg.policies {
        for c in cfg.checkpoints(&problem) {
            let vals: Vec<f64> = runs
                .iter()
                .filter(|r| r.policy == *p)
                .map(|r| r.simple_regret.value_at(c))
                .filter(|v| !v.is_nan())
                .collect();
            let n = vals.len();
            let mean = if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 };
            let stderr = if n < 2 {
                if n == 1 { 0.0 } else { f64::NAN }
            } else {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            rows.push(SummaryRow { policy: *p, checkpoint_cost: c, mean_simple_regret: mean, stderr, n_seeds: n });
        }
    }
    Ok(rows)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `traces.csv`, `curves.csv`, `runs.csv` and `summary.csv` under `dir`.
pub fn write_outputs(
    dir: &Path,
    problem: &BenchmarkProblem,
    runs: &[RunRecord],
    summary: &[SummaryRow],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let traces = dir.join("traces.csv");
    let mut w = csv::Writer::from_writer(create(&traces)?);
    write_trace_header(&mut w, problem.dim())?;
    for r in runs {
        write_trace_rows(&mut w, &r.trace, r.seed)?;
    }
    w.flush()?;

    let curves = dir.join("curves.csv");
    let all: Vec<(u64, &str, &RegretCurve)> = runs
        .iter()
        .flat_map(|r| {
            [(r.seed, r.policy.name(), &r.simple_regret), (r.seed, r.policy.name(), &r.cumulative_regret)]
        })
        .collect();
    write_curves_csv(create(&curves)?, &all)?;

    let status = dir.join("runs.csv");
    let mut w = csv::Writer::from_writer(create(&status)?);
    w.write_record(["policy", "seed", "status", "episodes", "spent", "final_simple_regret", "message"])
        .map_err(csv_err)?;
    for r in runs {
        let (st, msg) = match &r.trace.status {
            RunStatus::Completed => ("completed", String::new()),
            RunStatus::Failed(m) => ("failed", m.clone()),
        };
        w.write_record([
            r.policy.name().to_string(),
            r.seed.to_string(),
            st.to_string(),
            r.trace.episodes.len().to_string(),
            fmt_num(r.trace.spent()),
            fmt_num(r.simple_regret.final_value()),
            msg,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let summ = dir.join("summary.csv");
    let mut w = csv::Writer::from_writer(create(&summ)?);
    w.write_record(["policy", "checkpoint_cost", "mean_simple_regret", "stderr", "n_seeds"])
        .map_err(csv_err)?;
    for s in summary {
        w.write_record([
            s.policy.name().to_string(),
            fmt_num(s.checkpoint_cost),
            fmt_num(s.mean_simple_regret),
            fmt_num(s.stderr),
            s.n_seeds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(vec![traces, curves, status, summ])
}

/// Runs the experiment and writes its CSVs to `cfg.out`. Failed runs are
/// kept with their partial traces; see [`ExperimentReport::failed`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let runs = run_all(cfg)?;
    let summary = summarize(cfg, &runs)?;
    let problem = make_problem(&cfg.problem)?;
    let files = write_outputs(&cfg.out, &problem, &runs, &summary)?;
    Ok(ExperimentReport { runs, summary, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(problem: &str) -> ExperimentConfig {
        ExperimentConfig {
            problem: problem.into(),
            budget_mult: 1.0,
            seeds: 1,
            policy: PolicyConfig { candidates: Some(50), ..PolicyConfig::default() },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn parses_toml() {
        let cfg = ExperimentConfig::from_toml_str(
            "problem = \"toy1d\"\npolicies = [\"sf_only\"]\nseeds = 2\n[policy]\nrefit_every = 0\n",
        )
        .unwrap();
        assert_eq!(cfg.problem, "toy1d");
        assert_eq!(cfg.policies, vec![PolicyKind::SfOnly]);
        assert_eq!(cfg.seeds, 2);
        assert_eq!(cfg.budget_mult, 100.0);
        assert_eq!(cfg.policy.refit_every, 0);
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = ExperimentConfig::from_toml_str("seeds = 2\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("bogus"), "{e}");
        let e = ExperimentConfig::from_toml_str("seeds = 0\n").unwrap_err().to_string();
        assert!(e.contains("seeds"), "{e}");
        let e = ExperimentConfig::from_toml_str("budget_mult = 0.5\n").unwrap_err().to_string();
        assert!(e.contains("budget_mult"), "{e}");
        let e = ExperimentConfig::from_toml_str("problem = \"nope\"\n").unwrap_err().to_string();
        assert!(e.contains("nope"), "{e}");
        let e = ExperimentConfig::from_toml_str("policies = [\"sf_only\", \"sf_only\"]\n").unwrap_err();
        assert!(e.to_string().contains("twice"));
    }

    #[test]
    fn seeds_share_candidates_across_policies() {
        let a = run_seeds(7, PolicyKind::MfMiGreedy, 3);
        let b = run_seeds(7, PolicyKind::SfOnly, 3);
        assert_eq!(a.candidates, b.candidates);
        assert_ne!(a.noise, b.noise);
        assert_ne!(run_seeds(7, PolicyKind::SfOnly, 4), b);
        assert_ne!(run_seeds(8, PolicyKind::SfOnly, 3), b);
    }

    #[test]
    fn unit_budget_gives_one_episode_per_policy() {
        let runs = run_all(&quick("currin2")).unwrap();
        assert_eq!(runs.len(), 3);
        for r in &runs {
            assert!(r.trace.is_completed());
            assert_eq!(r.trace.episodes.len(), 1);
            assert!(r.trace.episodes[0].low.is_empty());
        }
    }

    #[test]
    fn summary_statistics() {
        let mut cfg = quick("toy1d");
        cfg.seeds = 3;
        cfg.budget_mult = 4.0;
        let runs = run_all(&cfg).unwrap();
        let rows = summarize(&cfg, &runs).unwrap();
        assert_eq!(rows.len(), 3 * CHECKPOINT_FRACTIONS.len());
        let last = rows.iter().find(|r| r.policy == PolicyKind::SfOnly && r.checkpoint_cost == 16.0).unwrap();
        let vals: Vec<f64> = runs
            .iter()
            .filter(|r| r.policy == PolicyKind::SfOnly)
            .map(|r| r.simple_regret.final_value())
            .collect();
        let mean = vals.iter().sum::<f64>() / 3.0;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        assert_eq!(last.n_seeds, 3);
        assert!((last.mean_simple_regret - mean).abs() < 1e-12);
        assert!((last.stderr - sd / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn failed_runs_are_isolated() {
        let problem = make_problem("toy1d").unwrap();
        let mut cfg = quick("toy1d");
        cfg.policy.candidates = Some(0);
        let r = run_one(&cfg, &problem, PolicyKind::SfOnly, 0);
        assert!(!r.trace.is_completed());
        assert!(r.simple_regret.points.is_empty());
    }
}
