mod common;

use mfbo::gp::{posterior, GpPrior, PriorMean, SquaredExpKernel};
use proptest::prelude::*;

fn inputs(d: usize, n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_matches_explicit_inverse(
        (d, x, xq, y) in (1usize..=3).prop_flat_map(|d| {
            (Just(d), inputs(d, 1..=8), inputs(d, 1..=4), prop::collection::vec(-2.0..2.0f64, 8))
        }),
        var in 0.2..3.0f64,
        ls in 0.1..1.5f64,
        noise in 0.005..0.5f64,
        mean in -2.0..2.0f64,
    ) {
        let y = &y[..x.len()];
        let k = SquaredExpKernel::new(var, vec![ls; d]).unwrap();
        let prior = GpPrior::new(PriorMean::Constant(mean), k.clone(), noise).unwrap();
        let post = posterior(&prior, &x, y, &xq).unwrap();
        let (m, c) = common::dense_posterior(&k, mean, noise, &x, y, &xq);
        for i in 0..xq.len() {
            prop_assert!((post.mean[i] - m[i]).abs() < 1e-8);
            for j in 0..xq.len() {
                prop_assert!((post.cov.as_matrix()[(i, j)] - c[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn variance_never_grows_with_data(
        x in inputs(2, 1..=10),
        q in prop::collection::vec(0.0..1.0f64, 2),
    ) {
        let k = SquaredExpKernel::new(1.0, vec![0.3, 0.3]).unwrap();
        let prior = GpPrior::zero_mean(k, 0.01).unwrap();
        let mut last = f64::INFINITY;
        for n in 0..=x.len() {
            let y = vec![0.0; n];
            let v = posterior(&prior, &x[..n], &y, std::slice::from_ref(&q)).unwrap().variances()[0];
            prop_assert!(v <= last + 1e-12);
            prop_assert!(v >= -1e-12);
            last = v;
        }
    }
}

#[test]
fn single_observation_closed_form() {
    let k = SquaredExpKernel::new(2.0, vec![0.5]).unwrap();
    let prior = GpPrior::zero_mean(k, 0.1).unwrap();
    let post = posterior(&prior, &[vec![0.0]], &[1.0], &[vec![0.5]]).unwrap();
    let kxq = 2.0 * (-0.5f64).exp();
    assert!((post.mean[0] - kxq / 2.1).abs() < 1e-14);
    assert!((post.variances()[0] - (2.0 - kxq * kxq / 2.1)).abs() < 1e-14);
}
