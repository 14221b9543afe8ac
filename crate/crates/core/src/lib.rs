//! Multi-fidelity Bayesian optimization with an additive Gaussian-process
//! model, information-per-cost exploration of cheap fidelities and
//! cost-aware regret accounting.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod acquisition;
pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod explore;
pub mod gp;
pub mod harness;
pub mod model;
pub mod policy;
pub mod regret;
pub mod submodular;
pub mod verify;

pub use error::{Error, Result};
