//! The built-in problems: fidelity costs, optimum and a few evaluations.

use mfbo::benchmarks::{make_problem, PROBLEMS};
use mfbo::model::Action;

fn main() -> mfbo::Result<()> {
    for name in PROBLEMS {
        let p = make_problem(name)?;
        println!(
            "{name}: dim {}, costs {:?}, f* = {:.6}, noise sd {:?}",
            p.dim(),
            p.costs(),
            p.f_star(),
            p.noise_sd().iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
        let mid: Vec<f64> = p.bounds().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        for l in 0..p.m() {
            let obs = p.evaluate_indexed(&Action::new(mid.clone(), l), 0, l as u64)?;
            println!("    fidelity {l} at the centre: value {:.4}, observed {:.4}", p.value(l, &mid)?, obs.y);
        }
    }
    Ok(())
}
