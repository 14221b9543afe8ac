//! Synthetic multi-fidelity test problems.
//!
//! Each lower fidelity is the target plus a fixed smooth bump,
//! `u_ℓ(x) = f(x) + A_ℓ · exp(-½ ‖(z - c_ℓ)/w‖²)` with `z` the point rescaled
//! to the unit cube, `w = 0.35` and centres `c_ℓ,j = frac(φ(j+1) + ℓ/2)`
//! (`φ` the golden-ratio conjugate). Amplitudes, noise levels and prior
//! defaults are reproduction parameters of this crate.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gp::{GpPrior, PriorMean, SquaredExpKernel};
use crate::model::{Action, FidelityModel, Observation};

/// Relative bump width in unit-cube coordinates.
pub const BUMP_WIDTH: f64 = 0.35;
/// Default observation noise, as a fraction of the target's range.
pub const NOISE_FRACTION: f64 = 0.05;
/// Default prior lengthscale of `f`, as a fraction of each side of the box.
pub const LENGTHSCALE_FRACTION: f64 = 0.25;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

type Objective = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Summary statistics of the target over its domain, from a dense scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub variance: f64,
}

impl TargetStats {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

/// A multi-fidelity objective with costs, bounds and known optimum.
#[derive(Clone)]
pub struct BenchmarkProblem {
    name: String,
    bounds: Vec<(f64, f64)>,
    costs: Vec<f64>,
    target: Objective,
    amplitudes: Vec<f64>,
    noise_sd: Vec<f64>,
    stats: TargetStats,
    optimizer: Option<Vec<f64>>,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("costs", &self.costs)
            .field("amplitudes", &self.amplitudes)
            .field("noise_sd", &self.noise_sd)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

/// Names accepted by [`make_problem`].
pub const PROBLEMS: [&str; 4] = ["hartmann6", "currin2", "borehole8", "toy1d"];

impl BenchmarkProblem {
    /// Builds a problem from a target function. `amplitudes` holds one bump
    /// amplitude per lower fidelity, so `costs.len() == amplitudes.len() + 1`.
    /// The noise standard deviation defaults to [`NOISE_FRACTION`] of the range.
    pub fn new(
        name: impl Into<String>,
        bounds: Vec<(f64, f64)>,
        costs: Vec<f64>,
        target: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        amplitudes: Vec<f64>,
        stats: TargetStats,
        optimizer: Option<Vec<f64>>,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter("problem needs at least one dimension".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        if costs.len() != amplitudes.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} costs for {} fidelities",
                costs.len(),
                amplitudes.len() + 1
            )));
        }
        if costs.iter().any(|c| !(*c > 0.0)) || costs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "costs must be positive and strictly increasing, got {costs:?}"
            )));
        }
        let sd = NOISE_FRACTION * stats.range();
        let m = costs.len();
        Ok(Self {
            name: name.into(),
            bounds,
            costs,
            target: Arc::new(target),
            amplitudes,
            noise_sd: vec![sd; m],
            stats,
            optimizer,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn m(&self) -> usize {
        self.costs.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn target_cost(&self) -> f64 {
        self.costs[self.m() - 1]
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn stats(&self) -> &TargetStats {
        &self.stats
    }

    /// Maximum of the target function.
    pub fn f_star(&self) -> f64 {
        self.stats.max
    }

    pub fn optimizer(&self) -> Option<&[f64]> {
        self.optimizer.as_deref()
    }

    /// Same problem with every noise standard deviation set to `sd`.
    pub fn with_noise(mut self, sd: f64) -> Result<Self> {
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sd must be >= 0, got {sd}")));
        }
        self.noise_sd.iter_mut().for_each(|s| *s = sd);
        Ok(self)
    }

    /// The problem restricted to its target fidelity.
    pub fn target_only(&self) -> Self {
        let mut p = self.clone();
        p.name = format!("{}_target", self.name);
        p.costs = vec![self.target_cost()];
        p.amplitudes.clear();
        p.noise_sd = vec![self.noise_sd[self.m() - 1]];
        p
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        for (dim, (v, (lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds { dim, value: *v, lo: *lo, hi: *hi });
            }
        }
        Ok(())
    }

    /// Value of the lower-fidelity disturbance at `x` (zero for the target).
    pub fn disturbance(&self, fidelity: usize, x: &[f64]) -> f64 {
        let Some(a) = self.amplitudes.get(fidelity) else {
            return 0.0;
        };
        let mut q = 0.0;
        for (j, (v, (lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            let z = (v - lo) / (hi - lo);
            let c = (GOLDEN * (j + 1) as f64 + 0.5 * fidelity as f64).fract();
            let d = (z - c) / BUMP_WIDTH;
            q += d * d;
        }
        a * (-0.5 * q).exp()
    }

    /// Noise-free target value `f(x)`.
    pub fn target_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok((self.target)(x))
    }

    /// Noise-free value `u_ℓ(x)` of fidelity `fidelity` (0-based).
    pub fn value(&self, fidelity: usize, x: &[f64]) -> Result<f64> {
        if fidelity >= self.m() {
            return Err(Error::FidelityOutOfRange { fidelity, m: self.m() });
        }
        Ok(self.target_value(x)? + self.disturbance(fidelity, x))
    }

    /// Noisy observation of `a`; the noise draw is a function of `rng` only.
    pub fn evaluate(&self, a: &Action, rng: &mut ChaCha8Rng) -> Result<Observation> {
        let u = self.value(a.fidelity, &a.x)?;
        let sd = self.noise_sd[a.fidelity];
        let noise = if sd > 0.0 {
            Normal::new(0.0, sd).expect("finite sd").sample(rng)
        } else {
            0.0
        };
        Ok(Observation::new(a.clone(), u + noise))
    }

    /// Noisy observation with the noise stream keyed by `(seed, query_index)`.
    pub fn evaluate_indexed(&self, a: &Action, seed: u64, query_index: u64) -> Result<Observation> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(query_index)));
        self.evaluate(a, &mut rng)
    }

    /// Default prior: constant mean and variance from the domain scan,
    /// lengthscales [`LENGTHSCALE_FRACTION`] of each side; error processes
    /// with variance `A_ℓ²` and lengthscale [`BUMP_WIDTH`] of each side;
    /// noise variances from the problem.
    pub fn default_model(&self) -> Result<FidelityModel> {
        let widths: Vec<f64> = self.bounds.iter().map(|(lo, hi)| hi - lo).collect();
        let target = GpPrior::new(
            PriorMean::Constant(self.stats.mean),
            SquaredExpKernel::new(
                self.stats.variance,
                widths.iter().map(|w| LENGTHSCALE_FRACTION * w).collect(),
            )?,
            self.noise_sd[self.m() - 1].powi(2),
        )?;
        let errors = self
            .amplitudes
            .iter()
            .zip(&self.noise_sd)
            .map(|(a, sd)| {
                GpPrior::zero_mean(
                    SquaredExpKernel::new(
                        (a * a).max(1e-12),
                        widths.iter().map(|w| BUMP_WIDTH * w).collect(),
                    )?,
                    sd * sd,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        FidelityModel::new(target, errors, self.costs.clone())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

/// Hartmann 6-D in maximization form on `[0,1]⁶`.
pub fn hartmann6(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let mut q = 0.0;
        for j in 0..6 {
            let d = x[j] - HARTMANN_P[i][j];
            q += HARTMANN_A[i][j] * d * d;
        }
        s += HARTMANN_ALPHA[i] * (-q).exp();
    }
    s
}

/// Currin exponential function on `[0,1]²`, maximized at `(0.21667, 0)`.
pub fn currin2(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let damp = if x2 > 0.0 { 1.0 - (-1.0 / (2.0 * x2)).exp() } else { 1.0 };
    let num = 2300.0 * x1.powi(3) + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0;
    let den = 100.0 * x1.powi(3) + 500.0 * x1 * x1 + 4.0 * x1 + 20.0;
    damp * num / den
}

/// Borehole water-flow function; inputs `(r_w, r, T_u, H_u, T_l, H_l, L, K_w)`.
pub fn borehole8(x: &[f64]) -> f64 {
    let (rw, r, tu, hu, tl, hl, l, kw) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let lr = (r / rw).ln();
    2.0 * PI * tu * (hu - hl) / (lr * (1.0 + 2.0 * l * tu / (lr * rw * rw * kw) + tu / tl))
}

/// One-dimensional two-bump target on `[0,1]`.
pub fn toy1d(x: &[f64]) -> f64 {
    let t = x[0];
    (-(t - 0.7).powi(2) / 0.02).exp() + 0.5 * (-(t - 0.25).powi(2) / 0.01).exp()
}

pub const BOREHOLE_BOUNDS: [(f64, f64); 8] = [
    (0.05, 0.15),
    (100.0, 50000.0),
    (63070.0, 115600.0),
    (990.0, 1110.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (9855.0, 12045.0),
];

/// Looks up a problem by name (see [`PROBLEMS`]).
pub fn make_problem(name: &str) -> Result<BenchmarkProblem> {
    match name {
        "hartmann6" => BenchmarkProblem::new(
            name,
            vec![(0.0, 1.0); 6],
            vec![1.0, 2.0, 4.0, 8.0],
            hartmann6,
            vec![0.6, 0.4, 0.2],
            TargetStats { max: 3.322_368_011_415, min: 0.0, mean: 0.2589, variance: 0.1481 },
            Some(vec![0.201_689_5, 0.150_010_7, 0.476_874_0, 0.275_332_4, 0.311_651_6, 0.657_300_5]),
        ),
        "currin2" => BenchmarkProblem::new(
            name,
            vec![(0.0, 1.0); 2],
            vec![1.0, 3.0],
            currin2,
            vec![0.5],
            TargetStats { max: 13.798_722_044_728, min: 1.1877, mean: 7.598, variance: 7.021 },
            Some(vec![0.216_666_663, 0.0]),
        ),
        "borehole8" => {
            let stats =
                TargetStats { max: 309.575_484_749_651, min: 8.632, mean: 77.65, variance: 2078.9 };
            BenchmarkProblem::new(
                name,
                BOREHOLE_BOUNDS.to_vec(),
                vec![1.0, 2.0],
                borehole8,
                vec![0.4 * stats.range()],
                stats,
                Some(vec![0.15, 100.0, 110_181.353_497, 1110.0, 116.0, 700.0, 1120.0, 12045.0]),
            )
        }
        "toy1d" => BenchmarkProblem::new(
            name,
            vec![(0.0, 1.0)],
            vec![1.0, 4.0],
            toy1d,
            vec![0.1],
            TargetStats { max: 1.000_000_000_803, min: 0.000_965_2, mean: 0.3389, variance: 0.09387 },
            Some(vec![0.699_999_998_559]),
        ),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}
