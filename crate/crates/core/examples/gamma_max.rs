//! Upper bound on the information one exploration phase can collect,
//! compared with what the policy actually gathers.

use std::sync::Arc;

use mfbo::acquisition::{default_candidate_count, CandidateSet};
use mfbo::benchmarks::make_problem;
use mfbo::model::History;
use mfbo::policy::{mf_mi_greedy, PolicyConfig, Seeds};
use mfbo::submodular::gamma_max_bound;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("toy1d")?;
    let budget = 100.0 * problem.target_cost();
    let cfg = PolicyConfig { refit_every: 0, ..PolicyConfig::default() };
    let seeds = Seeds::single(3);
    let trace = mf_mi_greedy(&problem, budget, &cfg, seeds)?;
    let gains: Vec<(f64, f64)> = trace
        .episodes
        .iter()
        .filter_map(|e| e.exploration.as_ref())
        .map(|x| (x.info_gain, x.beta))
        .collect();
    let max_gain = gains.iter().map(|g| g.0).fold(0.0, f64::max);
    let beta = gains.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);

    let n = default_candidate_count(problem.dim());
    let candidates = CandidateSet::halton(problem.bounds(), n, seeds.candidates)?;
    let prior = History::new(Arc::new(problem.default_model()?)).with_candidates(candidates.points().clone())?;
    let bound = gamma_max_bound(&prior, budget, beta)?;
    println!("largest per-episode exploration gain: {max_gain:.3}");
    println!(
        "gamma_max = {:.3} (greedy set of {} items, cost {}, best single item {:.3})",
        bound.gamma_max, bound.greedy_len, bound.greedy_cost, bound.single_gain
    );
    Ok(())
}
