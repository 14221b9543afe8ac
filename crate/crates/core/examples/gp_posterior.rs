//! Exact GP regression on a handful of noisy 1-D observations.

use mfbo::gp::{posterior, GpPrior, SquaredExpKernel};

fn main() -> mfbo::Result<()> {
    let prior = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.2])?, 0.01)?;
    let x: Vec<Vec<f64>> = [0.1, 0.35, 0.6, 0.9].iter().map(|v| vec![*v]).collect();
    let y: Vec<f64> = x.iter().map(|p| (6.0 * p[0]).sin()).collect();
    let xq: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64 / 10.0]).collect();

    let post = posterior(&prior, &x, &y, &xq)?;
    println!("{:>5} {:>9} {:>9} {:>9}", "x", "truth", "mean", "sd");
    for (i, p) in xq.iter().enumerate() {
        println!(
            "{:>5.2} {:>9.4} {:>9.4} {:>9.4}",
            p[0],
            (6.0 * p[0]).sin(),
            post.mean[i],
            post.cov.as_matrix()[(i, i)].max(0.0).sqrt()
        );
    }
    Ok(())
}
