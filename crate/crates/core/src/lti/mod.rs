//! Continuous-time linear systems `dx/dt = A x + B u`.
//!
//! Houses the system type, the matrix exponential, the controllability
//! matrix and the sampled-data (zero-order-hold-free) discretization used to
//! approximate controllability regions by zonotopes.

mod spectral;

pub use spectral::{spectral_decompose, spectral_decompose_with_blocks, JordanBlock, SpectralData, Structure};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous-time pair `(A, B)` with `A` of size `n x n` and `B` of size `n x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "state matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "input matrix must be {}xr with r >= 1, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("system matrices contain non-finite entries".into()));
        }
        Ok(Self { a, b })
    }

    /// Single-input system with `b` as the only input column.
    pub fn single_input(a: DMatrix<f64>, b: &[f64]) -> Result<Self> {
        let b = DMatrix::from_column_slice(b.len(), 1, b);
        Self::new(a, b)
    }

    /// Builds a system from row-major nested vectors.
    pub fn from_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(a, "A")?, matrix_from_rows(b, "B")?)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn r(&self) -> usize {
        self.b.ncols()
    }

    /// The same input matrix paired with `-A`.
    pub fn time_reversed(&self) -> Self {
        Self { a: -&self.a, b: self.b.clone() }
    }

    /// The same state matrix with the input matrix multiplied by `factor`.
    pub fn with_scaled_input(&self, factor: f64) -> Self {
        Self { a: self.a.clone(), b: &self.b * factor }
    }

    /// The single input column, or an error when `r > 1`.
    pub fn input_vector(&self) -> Result<DVector<f64>> {
        if self.r() != 1 {
            return Err(Error::Unsupported(format!(
                "analytic formulas are proven for a single input column only (got r = {}); use the discretized volume",
                self.r()
            )));
        }
        Ok(self.b.column(0).into_owned())
    }

    /// Eigenvalues of `A` as `(re, im)` pairs.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        self.a
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()
    }

    /// Largest real part among the eigenvalues of `A`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .map(|(re, _)| re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_hurwitz(&self) -> bool {
        self.spectral_abscissa() < 0.0
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Dimension(format!("matrix {name} is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("matrix {name} has ragged rows")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `exp(M t)`.
///
/// Backed by nalgebra's scaling-and-squaring Padé approximant.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !t.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix exponential input is not finite".into()));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok((m * t).exp())
}

/// `P_n = [B, AB, ..., A^{n-1} B]` and its numerical rank.
#[derive(Debug, Clone)]
pub struct ControllabilityMatrix {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

impl ControllabilityMatrix {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.matrix.nrows()
    }
}

pub fn controllability_matrix(sys: &LtiSystem) -> ControllabilityMatrix {
    let (n, r) = (sys.n(), sys.r());
    let mut matrix = DMatrix::zeros(n, n * r);
    let mut block = sys.b().clone();
    for k in 0..n {
        matrix.view_mut((0, k * r), (n, r)).copy_from(&block);
        block = sys.a() * block;
    }
    let rank = numerical_rank(&matrix);
    ControllabilityMatrix { matrix, rank }
}

/// Rank from singular values above `max(rows, cols) * sigma_max * 1e-12`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let thr = m.nrows().max(m.ncols()) as f64 * smax * 1e-12;
    sv.iter().filter(|&&s| s > thr).count()
}

/// Sampled model `x_{k+1} = A_hat x_k + B_hat u_k` over a horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizedSystem {
    #[serde(with = "matrix_serde")]
    pub a_hat: DMatrix<f64>,
    #[serde(with = "matrix_serde")]
    pub b_hat: DMatrix<f64>,
    pub delta: f64,
    pub steps: usize,
}

/// `A_hat = exp(A delta)`, `B_hat = B delta`, `steps = floor(T / delta)`.
pub fn discretize(sys: &LtiSystem, delta: f64, horizon: f64) -> Result<DiscretizedSystem> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Parameter(format!("sampling period must be positive, got {delta}")));
    }
    if !(horizon >= delta) || !horizon.is_finite() {
        return Err(Error::Parameter(format!(
            "horizon {horizon} must be finite and at least the sampling period {delta}"
        )));
    }
    Ok(DiscretizedSystem {
        a_hat: matrix_exponential(sys.a(), delta)?,
        b_hat: sys.b() * delta,
        delta,
        steps: step_count(horizon, delta),
    })
}

/// Integer part of `horizon / delta`, robust to representation error when the
/// ratio is an integer up to rounding.
pub(crate) fn step_count(horizon: f64, delta: f64) -> usize {
    let ratio = horizon / delta;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.floor() as usize
    }
}

/// Serde adapter writing a matrix as a list of rows.
pub mod matrix_serde {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        super::matrix_from_rows(&rows, "matrix").map_err(serde::de::Error::custom)
    }
}
