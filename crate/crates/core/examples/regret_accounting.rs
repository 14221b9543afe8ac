//! Simple and cumulative regret of a run, and the split of cumulative
//! regret into exploration, optimization and unspent budget.

use mfbo::benchmarks::make_problem;
use mfbo::policy::{mf_mi_greedy, PolicyConfig, Seeds};
use mfbo::regret::{
    cumulative_regret_curve, exploration_certificate, regret_decomposition, simple_regret_curve,
};

fn main() -> mfbo::Result<()> {
    let problem = make_problem("currin2")?;
    let budget = 100.0 * problem.target_cost();
    let cfg = PolicyConfig::default();
    let trace = mf_mi_greedy(&problem, budget, &cfg, Seeds::single(4))?;
    let f_star = problem.f_star();

    let simple = simple_regret_curve(&trace, Some(f_star));
    let checkpoints: Vec<f64> = [0.25, 0.5, 0.75, 1.0].iter().map(|f| f * budget).collect();
    let cumulative = cumulative_regret_curve(&trace, f_star, &checkpoints);
    println!("{:>8} {:>14} {:>14} {:>10}", "cost", "simple", "cumulative", "per cost");
    for (c, r) in &cumulative.points {
        println!("{c:>8} {:>14.5} {r:>14.3} {:>10.4}", simple.value_at(*c), r / c);
    }

    let d = regret_decomposition(&trace, f_star);
    println!(
        "R = {:.3} = exploration {:.3} + optimization {:.3} + unspent {:.3} (residual {:.1e})",
        d.cumulative,
        d.exploration,
        d.optimization,
        d.unspent,
        d.residual()
    );
    let (low, bound) = exploration_certificate(&trace, cfg.explore.alpha_exponent);
    println!("cheap-fidelity spend {low} <= alpha * total gain {bound:.2}");
    Ok(())
}
