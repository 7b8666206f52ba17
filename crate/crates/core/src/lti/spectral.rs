//! Real spectral and Jordan decompositions `A = P J P^{-1}`.
//!
//! Left eigenvectors are the rows of `P^{-1}`. Each block's columns of `P` are
//! scaled so the block's terminal left row (the left eigenvector) has unit
//! Euclidean norm with its largest-magnitude entry positive. Under that
//! convention `det(P)` and the modal inputs `P^{-1} b` are mutually consistent,
//! which is what the analytic volume formulas need.
//!
//! Numerical Jordan forms are ill-posed. When `A` is known to be a Jordan
//! matrix, pass its block structure to [`spectral_decompose_with_blocks`]
//! instead of relying on eigenvalue clustering.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::LtiSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Distinct,
    Jordan,
}

/// A Jordan block of size `size` for `eigenvalue`, ones on the superdiagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub eigenvalue: f64,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Eigenvalues with multiplicity, in block order.
    pub eigenvalues: Vec<f64>,
    pub structure: Structure,
    pub blocks: Vec<JordanBlock>,
    /// `P`, with `P^{-1} A P = J`.
    pub transform: DMatrix<f64>,
    pub transform_inv: DMatrix<f64>,
    /// Unit left eigenvector per block (terminal row of the block in `P^{-1}`).
    pub left_eigenvectors: Vec<DVector<f64>>,
    pub warnings: Vec<String>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.transform.nrows()
    }

    /// The block-diagonal Jordan matrix `J`.
    pub fn jordan_matrix(&self) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.n(), self.n());
        let mut off = 0;
        for blk in &self.blocks {
            for k in 0..blk.size {
                j[(off + k, off + k)] = blk.eigenvalue;
                if k + 1 < blk.size {
                    j[(off + k, off + k + 1)] = 1.0;
                }
            }
            off += blk.size;
        }
        j
    }

    /// Starting row of each block in the modal coordinates.
    pub fn block_offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |off, b| {
                let start = *off;
                *off += b.size;
                Some(start)
            })
            .collect()
    }

    /// Generalized left rows `q_{i,j}`: the rows of `P^{-1}`.
    pub fn left_rows(&self) -> Vec<DVector<f64>> {
        (0..self.n()).map(|i| self.transform_inv.row(i).transpose()).collect()
    }

    /// Modal input `P^{-1} b`, i.e. the products `q_{i,j} b`.
    pub fn modal_input(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.n() {
            return Err(Error::Dimension(format!(
                "input vector has length {}, expected {}",
                b.len(),
                self.n()
            )));
        }
        Ok(&self.transform_inv * b)
    }

    pub fn det_transform(&self) -> f64 {
        self.transform.determinant()
    }

    pub fn has_repeated_eigenvalues(&self) -> bool {
        self.structure == Structure::Jordan
    }

    /// Residual `||P J P^{-1} - A||_F`.
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        (&self.transform * self.jordan_matrix() * &self.transform_inv - a).norm()
    }
}

/// Default clustering tolerance: `1e-6 * ||A||_F`.
pub fn default_cluster_tol(a: &DMatrix<f64>) -> f64 {
    1e-6 * a.norm()
}

/// Decomposes a real-spectrum `A`. Eigenvalues closer than `cluster_tol`
/// (default [`default_cluster_tol`]) are treated as one repeated eigenvalue.
pub fn spectral_decompose(sys: &LtiSystem, cluster_tol: Option<f64>) -> Result<SpectralData> {
    let a = sys.a();
    let n = sys.n();
    let norm_a = a.norm();
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(a));
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!("cluster tolerance must be non-negative, got {tol}")));
    }

    let mut eig = sys.eigenvalues();
    let imag_tol = tol.max(1e-12 * norm_a);
    if let Some(&(re, im)) = eig.iter().find(|(_, im)| im.abs() > imag_tol) {
        return Err(Error::UnsupportedSpectrum(format!(
            "complex eigenvalue {re} {} {}i detected; only real spectra are supported",
            if im < 0.0 { '-' } else { '+' },
            im.abs()
        )));
    }
    eig.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for (re, _) in eig {
        match clusters.last_mut() {
            Some(c) if re - c[c.len() - 1] <= tol => c.push(re),
            _ => clusters.push(vec![re]),
        }
    }

    let singular_tol = (tol * norm_a.max(1.0)).sqrt();
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    let mut structure = Structure::Distinct;

    for cluster in &clusters {
        let m = cluster.len();
        let lambda = cluster.iter().sum::<f64>() / m as f64;
        let shifted = a - DMatrix::identity(n, n) * lambda;
        if m == 1 {
            columns.push(null_basis(&shifted, 1).column(0).into_owned());
            blocks.push(JordanBlock { eigenvalue: lambda, size: 1 });
            continue;
        }
        structure = Structure::Jordan;
        let geometric = sorted_singular_values(&shifted)
            .iter()
            .filter(|&&s| s < singular_tol)
            .count();
        if geometric == m {
            let basis = null_basis(&shifted, m);
            for k in 0..m {
                columns.push(basis.column(k).into_owned());
                blocks.push(JordanBlock { eigenvalue: lambda, size: 1 });
            }
        } else if geometric == 1 {
            let chain = jordan_chain(&shifted, m);
            columns.extend(chain);
            blocks.push(JordanBlock { eigenvalue: lambda, size: m });
        } else {
            return Err(Error::Decomposition(format!(
                "eigenvalue {lambda} has algebraic multiplicity {m} but geometric multiplicity {geometric}; \
                 mixed Jordan structures are not resolved numerically, supply the Jordan pair with explicit jordan_blocks"
            )));
        }
    }

    let p = DMatrix::from_columns(&columns);
    let data = normalize(p, blocks, structure)?;
    let residual = data.reconstruction_error(a);
    if residual > 1e-8 * norm_a.max(f64::MIN_POSITIVE) && residual > 1e-300 {
        return Err(Error::Decomposition(format!(
            "Jordan reconstruction residual {residual:.3e} exceeds 1e-8 * ||A||; \
             the transform is numerically unresolvable, supply the Jordan pair with explicit jordan_blocks"
        )));
    }
    Ok(data)
}

/// Uses a declared Jordan structure. `A` must already be the Jordan matrix of
/// `blocks` (in the given order); `P` is then the identity.
pub fn spectral_decompose_with_blocks(sys: &LtiSystem, blocks: &[JordanBlock]) -> Result<SpectralData> {
    let n = sys.n();
    if blocks.iter().any(|b| b.size == 0 || !b.eigenvalue.is_finite()) {
        return Err(Error::InvalidInput("Jordan blocks need a finite eigenvalue and size >= 1".into()));
    }
    let total: usize = blocks.iter().map(|b| b.size).sum();
    if total != n {
        return Err(Error::Dimension(format!("Jordan block sizes sum to {total}, expected {n}")));
    }
    let mut eigenvalues = Vec::with_capacity(n);
    for b in blocks {
        eigenvalues.extend(std::iter::repeat_n(b.eigenvalue, b.size));
    }
    let repeated = blocks.iter().any(|b| b.size > 1)
        || eigenvalues
            .iter()
            .enumerate()
            .any(|(i, x)| eigenvalues[i + 1..].contains(x));
    let data = SpectralData {
        eigenvalues,
        structure: if repeated { Structure::Jordan } else { Structure::Distinct },
        blocks: blocks.to_vec(),
        transform: DMatrix::identity(n, n),
        transform_inv: DMatrix::identity(n, n),
        left_eigenvectors: Vec::new(),
        warnings: Vec::new(),
    };
    let mismatch = (sys.a() - data.jordan_matrix()).amax();
    if mismatch > 1e-12 * (1.0 + sys.a().amax()) {
        return Err(Error::InvalidInput(format!(
            "state matrix differs from the declared Jordan matrix by {mismatch:.3e}"
        )));
    }
    let left = data
        .block_offsets()
        .iter()
        .zip(blocks)
        .map(|(&off, b)| {
            let mut e = DVector::zeros(n);
            e[off + b.size - 1] = 1.0;
            e
        })
        .collect();
    Ok(SpectralData { left_eigenvectors: left, ..data })
}

fn normalize(mut p: DMatrix<f64>, blocks: Vec<JordanBlock>, structure: Structure) -> Result<SpectralData> {
    let n = p.nrows();
    let inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Decomposition("eigenvector matrix is singular".into()))?;
    let mut off = 0;
    for blk in &blocks {
        let terminal = inv.row(off + blk.size - 1);
        let norm = terminal.norm();
        if norm == 0.0 {
            return Err(Error::Decomposition("zero left eigenvector".into()));
        }
        let imax = terminal.transpose().iamax();
        let alpha = norm * terminal[imax].signum();
        for k in off..off + blk.size {
            let mut col = p.column_mut(k);
            col *= alpha;
        }
        off += blk.size;
    }
    let inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Decomposition("transform became singular after scaling".into()))?;

    let mut warnings = Vec::new();
    let sv = sorted_singular_values(&p);
    let cond = sv[n - 1] / sv[0];
    if !(cond <= 1e8) {
        warnings.push(format!(
            "similarity transform is ill-conditioned (cond = {cond:.3e}); results may be inaccurate"
        ));
    }

    let mut left = Vec::with_capacity(blocks.len());
    let mut eigenvalues = Vec::with_capacity(n);
    let mut off = 0;
    for blk in &blocks {
        left.push(inv.row(off + blk.size - 1).transpose());
        eigenvalues.extend(std::iter::repeat_n(blk.eigenvalue, blk.size));
        off += blk.size;
    }
    Ok(SpectralData {
        eigenvalues,
        structure,
        blocks,
        transform: p,
        transform_inv: inv,
        left_eigenvectors: left,
        warnings,
    })
}

/// Singular values in ascending order.
fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// Orthonormal basis of the `dim` right singular vectors with smallest
/// singular values.
fn null_basis(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut basis = DMatrix::zeros(n, dim);
    for (k, &i) in order.iter().take(dim).enumerate() {
        basis.set_column(k, &v_t.row(i).transpose());
    }
    basis
}

fn top_right_singular(m: &DMatrix<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let imax = svd.singular_values.imax();
    v_t.row(imax).transpose()
}

/// Chain `[v_1, ..., v_m]` with `M v_1 = 0` and `M v_k = v_{k-1}`.
fn jordan_chain(shifted: &DMatrix<f64>, m: usize) -> Vec<DVector<f64>> {
    let n = shifted.nrows();
    let mut power = DMatrix::identity(n, n);
    for _ in 0..m - 1 {
        power = shifted * power;
    }
    let generalized = null_basis(&(shifted * &power), m);
    // pick the direction in ker(M^m) that M^(m-1) amplifies most
    let image = &power * &generalized;
    let w = top_right_singular(&image);
    let mut top = &generalized * w;
    top.normalize_mut();
    let mut chain = vec![top];
    for _ in 1..m {
        let next = shifted * chain.last().unwrap();
        chain.push(next);
    }
    chain.reverse();
    chain
}
