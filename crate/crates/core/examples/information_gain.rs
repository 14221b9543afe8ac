//! Information about the target function carried by cheap and expensive
//! observations under the additive two-fidelity model.

use std::sync::Arc;

use mfbo::gp::{GpPrior, SquaredExpKernel};
use mfbo::model::{Action, FidelityModel, History, Observation};

fn main() -> mfbo::Result<()> {
    let target = GpPrior::zero_mean(SquaredExpKernel::new(1.0, vec![0.25])?, 0.01)?;
    let error = GpPrior::zero_mean(SquaredExpKernel::new(0.05, vec![0.4])?, 0.01)?;
    let model = Arc::new(FidelityModel::new(target, vec![error], vec![1.0, 5.0])?);
    let history = History::new(model.clone());

    let cheap = Action::new(vec![0.5], 0);
    let costly = Action::new(vec![0.5], 1);
    for a in [&cheap, &costly] {
        let gain = history.info_gain_single(a)?;
        println!(
            "fidelity {} at x=0.5: I = {gain:.4} nats, per unit cost {:.4}",
            a.fidelity,
            gain / model.cost(a.fidelity)
        );
    }

    let batch: Vec<Action> = [0.2, 0.4, 0.6, 0.8].iter().map(|x| Action::new(vec![*x], 0)).collect();
    println!("four cheap queries together: I = {:.4}", history.info_gain_set(&batch)?);

    let after = history.update(Observation::new(cheap.clone(), 0.3))?;
    println!(
        "repeating the cheap query after observing it: I = {:.4}",
        after.info_gain_single(&cheap)?
    );
    Ok(())
}
