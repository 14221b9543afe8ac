//! Target-only baseline with the GP-UCB and GP-MI selectors.

use mfbo::acquisition::Subroutine;
use mfbo::benchmarks::make_problem;
use mfbo::policy::{sf_only, PolicyConfig, Seeds};
use mfbo::regret::simple_regret_curve;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("currin2")?;
    let budget = 60.0 * problem.target_cost();
    for subroutine in [Subroutine::GpUcb, Subroutine::GpMi] {
        let cfg = PolicyConfig { subroutine, ..PolicyConfig::default() };
        let trace = sf_only(&problem, budget, &cfg, Seeds::single(1))?;
        let regret = simple_regret_curve(&trace, Some(problem.f_star()));
        let best = trace.episodes.iter().map(|e| e.target.value).fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{subroutine:?}: {} queries, best value {best:.4}, simple regret {:.5}",
            trace.episodes.len(),
            regret.final_value()
        );
    }
    Ok(())
}
