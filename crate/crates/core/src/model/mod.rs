//! The additive multi-fidelity model `u_ℓ = f + ε_ℓ`, observation histories
//! with cached factorizations, information gains and hyperparameter fitting.

mod design;
mod fidelity;
mod history;
mod hyper;

pub use design::{Design, DEGENERATE_VARIANCE, REBUILD_EVERY};
pub use fidelity::{joint_cov, Action, FidelityModel, Observation};
pub use history::History;
pub use hyper::{
    fit_hyperparameters, fit_hyperparameters_around, log_spaced, FitOutcome, GridPoint, HyperGrid,
};
