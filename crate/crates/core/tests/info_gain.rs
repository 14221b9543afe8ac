mod common;

use std::sync::Arc;

use mfbo::gp::{GpPrior, SquaredExpKernel};
use mfbo::model::{Action, FidelityModel, History, Observation};
use proptest::prelude::*;

fn model(f_ls: f64, e_var: f64, e_ls: f64) -> Arc<FidelityModel> {
    let target = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![f_ls]).unwrap(), 0.02).unwrap();
    let err = GpPrior::zero_mean(SquaredExpKernel::new(e_var, vec![e_ls]).unwrap(), 0.01).unwrap();
    Arc::new(FidelityModel::new(target, vec![err], vec![1.0, 3.0]).unwrap())
}

fn action() -> impl Strategy<Value = Action> {
    (0.0..1.0f64, 0usize..2).prop_map(|(x, l)| Action::new(vec![x], l))
}

fn history(m: &Arc<FidelityModel>, s: &[Action]) -> History {
    let obs: Vec<Observation> = s.iter().map(|a| Observation::new(a.clone(), 0.0)).collect();
    History::from_observations(m.clone(), &obs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_gain_matches_covariance_oracle(
        f_ls in 0.1..1.0f64,
        e_var in 0.01..1.0f64,
        e_ls in 0.1..1.0f64,
        s in prop::collection::vec(action(), 0..5),
        e in prop::collection::vec(action(), 1..4),
    ) {
        let m = model(f_ls, e_var, e_ls);
        let got = history(&m, &s).info_gain_set(&e).unwrap();
        let want = common::info_gain(&m, &s, &e);
        prop_assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn chain_rule(
        f_ls in 0.1..1.0f64,
        e_var in 0.01..1.0f64,
        s in prop::collection::vec(action(), 0..4),
        a in action(),
        b in action(),
    ) {
        let m = model(f_ls, e_var, 0.4);
        let h = history(&m, &s);
        let joint = h.info_gain_set(&[a.clone(), b.clone()]).unwrap();
        let first = h.info_gain_single(&a).unwrap();
        let second = h.update(Observation::new(a, 1.7)).unwrap().info_gain_single(&b).unwrap();
        prop_assert!((joint - first - second).abs() < 1e-8);
        prop_assert!(first >= -1e-10 && second >= -1e-10);
    }

    #[test]
    fn adding_actions_never_loses_information(
        s in prop::collection::vec(action(), 0..3),
        e in prop::collection::vec(action(), 1..4),
        extra in action(),
    ) {
        let h = history(&model(0.3, 0.2, 0.5), &s);
        let base = h.info_gain_set(&e).unwrap();
        let mut more = e.clone();
        more.push(extra);
        prop_assert!(h.info_gain_set(&more).unwrap() >= base - 1e-10);
    }

    /// Diminishing returns hold when every action queries the target.
    #[test]
    fn target_only_gains_are_submodular(
        xs in prop::collection::vec(0.0..1.0f64, 0..4),
        extra in prop::collection::vec(0.0..1.0f64, 1..3),
        q in 0.0..1.0f64,
    ) {
        let m = model(0.25, 0.2, 0.5);
        let t = |x: &f64| Action::new(vec![*x], 1);
        let small: Vec<Action> = xs.iter().map(t).collect();
        let mut large = small.clone();
        large.extend(extra.iter().map(t));
        let gain_small = history(&m, &small).info_gain_single(&t(&q)).unwrap();
        let gain_large = history(&m, &large).info_gain_single(&t(&q)).unwrap();
        prop_assert!(gain_small >= gain_large - 1e-10);
    }
}

/// With a rough target and a smooth disturbance, a second cheap query is
/// worth more than the first: the differences of cheap observations cancel
/// the shared disturbance. Diminishing returns fail for such models.
#[test]
fn cheap_gains_can_increase_with_conditioning() {
    let m = model(0.05, 1.0, 5.0);
    let a = Action::new(vec![0.0], 0);
    let b = Action::new(vec![1.0], 0);
    let alone = History::new(m.clone()).info_gain_single(&b).unwrap();
    let after = history(&m, std::slice::from_ref(&a)).info_gain_single(&b).unwrap();
    assert!(after > alone + 0.1, "{after} vs {alone}");
    assert!((after - (common::info_gain(&m, &[a], std::slice::from_ref(&b)))).abs() < 1e-9);
}

#[test]
fn distant_actions_add_up() {
    let m = model(0.1, 0.3, 0.1);
    let h = History::new(m);
    for (la, lb) in [(0, 0), (0, 1), (1, 1)] {
        let a = Action::new(vec![0.0], la);
        let b = Action::new(vec![50.0], lb);
        let sum = h.info_gain_single(&a).unwrap() + h.info_gain_single(&b).unwrap();
        assert!((h.info_gain_set(&[a, b]).unwrap() - sum).abs() < 1e-12);
    }
}

#[test]
fn target_query_gain_closed_form() {
    // I = ½ ln(1 + k(x,x)/σ²) for one target query under the prior
    let h = History::new(model(0.3, 0.2, 0.5));
    let g = h.info_gain_single(&Action::new(vec![0.4], 1)).unwrap();
    assert!((g - 0.5 * (1.0f64 + 1.0 / 0.02).ln()).abs() < 1e-12);
    // a cheap query sees f through the disturbance: ½ ln(1 + 1/(0.2 + 0.01))
    let g = h.info_gain_single(&Action::new(vec![0.4], 0)).unwrap();
    assert!((g - 0.5 * (1.0f64 + 1.0 / 0.21).ln()).abs() < 1e-12);
}
