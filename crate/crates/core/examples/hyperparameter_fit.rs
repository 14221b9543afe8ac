//! Grid search over kernel scales by joint marginal likelihood, on data
//! drawn from a known grid point.

use std::sync::Arc;

use mfbo::benchmarks::make_problem;
use mfbo::model::{fit_hyperparameters, Action, History, HyperGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mfbo::Result<()> {
    let problem = make_problem("currin2")?;
    let mut history = History::new(Arc::new(problem.default_model()?));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..60u64 {
        let x = vec![rng.random::<f64>(), rng.random::<f64>()];
        let fidelity = if i % 3 == 0 { 1 } else { 0 };
        history.push(problem.evaluate_indexed(&Action::new(x, fidelity), 5, i)?)?;
    }
    let grid = HyperGrid::default();
    println!("grid of {} models, base log likelihood {:.2}", grid.len(2), history.log_marginal_likelihood());
    let fit = fit_hyperparameters(&history, &grid)?;
    if let Some(i) = fit.index {
        println!("selected {:?}: log likelihood {:.2}", grid.point(i, 2), fit.log_likelihood);
    }
    let k = &fit.model.target_prior().kernel;
    println!("target kernel: variance {:.3}, lengthscales {:?}", k.signal_variance(), k.lengthscales());
    Ok(())
}
