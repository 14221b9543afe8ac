//! A small seeded experiment from a TOML configuration, written as CSV.

use mfbo::harness::{run_experiment, ExperimentConfig};

fn main() -> mfbo::Result<()> {
    let out = std::env::temp_dir().join("mfbo-example-experiment");
    let text = format!(
        r#"
problem = "toy1d"
policies = ["mf_mi_greedy", "sf_only"]
budget_mult = 30
seeds = 4
out = "{}"

[policy]
subroutine = "gp_mi"
refit_every = 5
"#,
        out.display()
    );
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let report = run_experiment(&cfg)?;
    for row in &report.summary {
        println!(
            "{:<14} cost {:>6} simple regret {:.4} ± {:.4} ({} seeds)",
            row.policy.name(),
            row.checkpoint_cost,
            row.mean_simple_regret,
            row.stderr,
            row.n_seeds
        );
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
