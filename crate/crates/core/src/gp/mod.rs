//! Squared-exponential kernels, exact GP posteriors and Gaussian
//! entropy / log-determinant helpers.

mod kernel;
mod linalg;
mod posterior;

pub use kernel::{kernel_eval, SquaredExpKernel};
pub use linalg::{
    chol_logdet, cholesky, gaussian_entropy, CovMatrix, IncrementalCholesky, JITTER_LADDER,
};
pub use posterior::{posterior, GpPrior, Posterior, PriorMean};
