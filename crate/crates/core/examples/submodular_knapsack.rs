//! Budgeted maximization of a coverage function: the greedy algorithm
//! against the exact optimum.

use mfbo::submodular::{
    brute_force_knapsack, check_ratio_monotone, greedy_knapsack, GroundSet, KNAPSACK_FACTOR,
};

fn main() -> mfbo::Result<()> {
    let covers: Vec<Vec<usize>> = vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5, 6], vec![0, 6], vec![1, 4], vec![7]];
    let weights = [1.0, 0.5, 2.0, 1.0, 0.7, 1.2, 0.4, 3.0];
    let costs = vec![2.0, 1.0, 3.0, 1.0, 1.5, 2.5];
    let coverage = |s: &[usize]| -> f64 {
        let mut hit = [false; 8];
        s.iter().flat_map(|i| &covers[*i]).for_each(|u| hit[*u] = true);
        hit.iter().zip(weights).filter(|(h, _)| **h).map(|(_, w)| w).sum()
    };
    let g = GroundSet::new(costs, coverage)?;

    for budget in [2.0, 4.0, 6.0, 9.0] {
        let greedy = greedy_knapsack(&g, budget);
        let (best, opt) = brute_force_knapsack(&g, budget)?;
        println!(
            "B = {budget}: greedy {greedy:?} -> {:.2}, optimum {best:?} -> {opt:.2}, guarantee {:.2}",
            g.value(&greedy),
            KNAPSACK_FACTOR * opt
        );
    }
    println!("ratio monotone for (3, 8): {}", check_ratio_monotone(&g, 3.0, 8.0)?);
    Ok(())
}
