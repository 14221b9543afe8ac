//! The multi-fidelity greedy policy on the Currin problem: each episode
//! explores the cheap fidelity, then queries the target.

use mfbo::benchmarks::make_problem;
use mfbo::policy::{mf_mi_greedy, PolicyConfig, Seeds};
use mfbo::regret::simple_regret_curve;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("currin2")?;
    let budget = 60.0 * problem.target_cost();
    let trace = mf_mi_greedy(&problem, budget, &PolicyConfig::default(), Seeds::single(1))?;

    for (i, e) in trace.episodes.iter().enumerate().take(10) {
        let explored = e.exploration.as_ref().map_or(String::new(), |x| {
            format!("I = {:.3}, stop {}", x.info_gain, x.stop_reason)
        });
        println!(
            "episode {i:>2}: {:>3} cheap queries ({explored}), target at [{:.3}, {:.3}] -> {:.4}",
            e.low.len(),
            e.target.action.x[0],
            e.target.action.x[1],
            e.target.value
        );
    }
    println!("... {} episodes, spent {} of {budget}", trace.episodes.len(), trace.spent());
    let regret = simple_regret_curve(&trace, Some(problem.f_star()));
    println!("final simple regret {:.5}", regret.final_value());
    Ok(())
}
