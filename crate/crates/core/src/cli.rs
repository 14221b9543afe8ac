//! Command-line front end: `run`, `bench` and `verify`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use crate::policy::PolicyKind;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mfbo", version, about = "Multi-fidelity Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in benchmark with default policy settings.
    Bench {
        #[arg(long)]
        problem: String,
        /// Budget as a multiple of the target cost.
        #[arg(long, default_value_t = 100.0)]
        budget_mult: f64,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Comma-separated subset of mf_mi_greedy, explore_then_exploit, sf_only.
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<String>>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        /// Skip the summary table.
        #[arg(long)]
        quiet: bool,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownProblem(_) | Error::InvalidParameter(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on a run failure, 2 on a usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out } => ExperimentConfig::from_file(&config)
            .map_err(Failure::from)
            .and_then(|mut cfg| {
                if let Some(out) = out {
                    cfg.out = out;
                }
                experiment(&cfg, false)
            }),
        Command::Bench { problem, budget_mult, seeds, policies, out, master_seed, quiet } => {
            bench_config(problem, budget_mult, seeds, policies, out, master_seed)
                .and_then(|cfg| experiment(&cfg, quiet))
        }
        Command::Verify { only } => run_verify(only),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUN_FAILURE
        }
    }
}

fn bench_config(
    problem: String,
    budget_mult: f64,
    seeds: usize,
    policies: Option<Vec<String>>,
    out: PathBuf,
    master_seed: u64,
) -> Result<ExperimentConfig, Failure> {
    let policies = match policies {
        Some(names) => names.iter().map(|n| n.trim().parse()).collect::<Result<Vec<PolicyKind>, _>>()?,
        None => PolicyKind::ALL.to_vec(),
    };
    let cfg = ExperimentConfig {
        problem,
        policies,
        budget_mult,
        seeds,
        master_seed,
        out,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(cfg: &ExperimentConfig, quiet: bool) -> Result<(), Failure> {
    let report = run_experiment(cfg)?;
    if !quiet {
        print_report(cfg, &report);
    }
    let failed = report.failed().count();
    if failed > 0 {
        for r in report.failed() {
            if let crate::policy::RunStatus::Failed(msg) = &r.trace.status {
                eprintln!("run {} seed {} failed: {msg}", r.policy, r.seed);
            }
        }
        return Err(Failure::Run(format!("{failed} of {} runs failed", report.runs.len())));
    }
    Ok(())
}

fn print_report(cfg: &ExperimentConfig, report: &ExperimentReport) {
    println!("{} | budget {} x target cost | {} seeds", cfg.problem, cfg.budget_mult, cfg.seeds);
    println!("{:<22} {:>14} {:>14} {:>12} {:>6}", "policy", "cost", "simple regret", "stderr", "n");
    for s in &report.summary {
        println!(
            "{:<22} {:>14.3} {:>14.6} {:>12.6} {:>6}",
            s.policy.name(),
            s.checkpoint_cost,
            s.mean_simple_regret,
            s.stderr,
            s.n_seeds
        );
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}

fn run_verify(only: Option<Vec<usize>>) -> Result<(), Failure> {
    let all = verify::criteria();
    if let Some(ids) = &only {
        if let Some(bad) = ids.iter().find(|i| !all.iter().any(|c| c.id == **i)) {
            return Err(Failure::Usage(format!("no criterion {bad} (valid: 1..={})", all.len())));
        }
    }
    let mut suite = verify::Suite::default();
    let mut failed = 0;
    for c in all.iter().filter(|c| only.as_ref().is_none_or(|ids| ids.contains(&c.id))) {
        let r = suite.check(c);
        println!("{r}");
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} criteria failed")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli_main(["mfbo"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "frobnicate"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "bench"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "bench", "--problem", "nope"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "bench", "--problem", "toy1d", "--seeds", "0"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "bench", "--problem", "toy1d", "--policies", "x"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "run", "--config", "/nonexistent/cfg.toml"]), EXIT_USAGE);
        assert_eq!(cli_main(["mfbo", "verify", "--only", "99"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(cli_main(["mfbo", "--help"]), EXIT_OK);
    }
}
