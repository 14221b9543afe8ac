//! One exploration phase on the 1-D toy problem: greedy information per
//! cost over the cheap fidelity until a stopping rule fires.

use std::sync::Arc;

use mfbo::acquisition::CandidateSet;
use mfbo::benchmarks::make_problem;
use mfbo::explore::{explore_lf, ExploreConfig};
use mfbo::model::History;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("toy1d")?;
    let candidates = CandidateSet::halton(problem.bounds(), 200, 7)?;
    let history = History::new(Arc::new(problem.default_model()?)).with_candidates(candidates.points().clone())?;

    for budget in [8.0, 40.0, 400.0] {
        let r = explore_lf(budget, &history, &ExploreConfig::default())?;
        println!(
            "budget {budget:>5}: {} cheap queries, cost {}, I = {:.3}, beta = {:.3}, stop: {}",
            r.selected.len(),
            r.cost,
            r.cumulative_info_gain,
            r.beta,
            r.stop_reason
        );
        let xs: Vec<String> = r.selected.iter().take(8).map(|a| format!("{:.2}", a.x[0])).collect();
        println!("    first picks: {}", xs.join(" "));
    }
    Ok(())
}
