//! Explore once with the whole budget, then spend the rest on target
//! queries.

use mfbo::benchmarks::make_problem;
use mfbo::policy::{explore_then_exploit, PolicyConfig, Seeds};
use mfbo::regret::simple_regret_curve;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("currin2")?;
    let budget = 60.0 * problem.target_cost();
    let trace = explore_then_exploit(&problem, budget, &PolicyConfig::default(), Seeds::single(1))?;
    let first = &trace.episodes[0];
    println!("exploration: {} cheap queries costing {}", first.low.len(), first.low_cost);
    println!("then {} target queries", trace.episodes.len());
    let regret = simple_regret_curve(&trace, Some(problem.f_star()));
    println!("final simple regret {:.5}", regret.final_value());
    Ok(())
}
