use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Diagonal jitter values tried, in order, when a factorization fails.
pub const JITTER_LADDER: [f64; 3] = [1e-10, 1e-8, 1e-6];

const SYMMETRY_TOL: f64 = 1e-10;

/// A square, symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(DMatrix<f64>);

impl CovMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter(format!(
                "covariance must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps `m` after averaging it with its transpose.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }
}

fn diag_range(m: &DMatrix<f64>) -> (f64, f64) {
    m.diagonal()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)))
}

fn jitter_schedule(base: f64) -> impl Iterator<Item = f64> {
    std::iter::once(base).chain(JITTER_LADDER.into_iter().filter(move |j| *j > base))
}

/// Cholesky factorization of `m + jitter·I`, escalating the jitter through
/// [`JITTER_LADDER`] until it succeeds. Returns the factor and the jitter used.
pub fn cholesky(m: &DMatrix<f64>, base_jitter: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = m.nrows();
    let mut last = base_jitter;
    for jitter in jitter_schedule(base_jitter) {
        last = jitter;
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(a) {
            return Ok((c, jitter));
        }
    }
    let (min_diag, max_diag) = diag_range(m);
    Err(Error::NotPositiveDefinite { size: n, jitter: last, min_diag, max_diag })
}

/// `log det(m + jitter·I)` from a triangular factorization.
pub fn chol_logdet(m: &CovMatrix, jitter: f64) -> Result<f64> {
    if m.dim() == 0 {
        return Ok(0.0);
    }
    let (c, _) = cholesky(m.as_matrix(), jitter)?;
    Ok(2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Differential entropy in nats of a Gaussian with covariance `cov + jitter·I`,
/// `½ log det(2πe·Σ)`.
pub fn gaussian_entropy(cov: &CovMatrix, jitter: f64) -> Result<f64> {
    let n = cov.dim() as f64;
    Ok(0.5 * (n * (2.0 * PI * E).ln() + chol_logdet(cov, jitter)?))
}

/// Lower-triangular Cholesky factor that grows one row at a time.
///
/// Rows are stored packed; row `i` holds `i + 1` entries. The factor
/// represents `A + jitter·I` where `A` is the matrix whose rows were pushed.
#[derive(Debug, Clone, Default)]
pub struct IncrementalCholesky {
    packed: Vec<f64>,
    n: usize,
    jitter: f64,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl IncrementalCholesky {
    pub fn empty(jitter: f64) -> Self {
        Self { packed: Vec::new(), n: 0, jitter }
    }

    /// Factorizes a full matrix, escalating jitter from `base_jitter`.
    pub fn from_matrix(m: &DMatrix<f64>, base_jitter: f64) -> Result<Self> {
        let (c, jitter) = cholesky(m, base_jitter)?;
        let l = c.l_dirty();
        let n = m.nrows();
        let mut packed = Vec::with_capacity(row_start(n));
        for i in 0..n {
            for j in 0..=i {
                packed.push(l[(i, j)]);
            }
        }
        Ok(Self { packed, n, jitter })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.packed[row_start(i)..row_start(i + 1)]
    }

    /// Appends one row/column. `cross` holds the covariances with the
    /// existing rows and `diag` the new diagonal entry (without jitter).
    /// Returns the new factor row. On failure the factor is unchanged.
    pub fn push(&mut self, cross: &[f64], diag: f64) -> Result<&[f64]> {
        assert_eq!(cross.len(), self.n, "cross-covariance length must match factor size");
        let l = self.solve_lower(cross);
        let sq: f64 = l.iter().map(|v| v * v).sum();
        let pivot = diag + self.jitter - sq;
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                size: self.n + 1,
                jitter: self.jitter,
                min_diag: diag,
                max_diag: diag,
            });
        }
        self.packed.extend_from_slice(&l);
        self.packed.push(pivot.sqrt());
        self.n += 1;
        Ok(self.row(self.n - 1))
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in 0..self.n {
            let row = self.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in (0..self.n).rev() {
            let xi = x[i] / self.row(i)[i];
            x[i] = xi;
            let row = self.row(i);
            for j in 0..i {
                x[j] -= row[j] * xi;
            }
        }
        x
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.row(i)[i].ln()).sum::<f64>()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if j <= i { self.row(i)[j] } else { 0.0 })
    }
}
