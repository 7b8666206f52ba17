//! Closed-form volumes of infinite-horizon controllability regions and the
//! shape factors obtained by splitting those formulas apart.
//!
//! Both formulas take the modal input `P^{-1} b` from [`SpectralData`], so
//! they hold for any `A` similar to a diagonal or Jordan matrix, not only for
//! matrices already in canonical form.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::{spectral_decompose, LtiSystem, SpectralData, Structure};

fn single_column(b: &DMatrix<f64>) -> Result<DVector<f64>> {
    if b.ncols() != 1 {
        return Err(Error::Unsupported(format!(
            "closed-form volumes are established for one input column only (got {}); use the discretized volume",
            b.ncols()
        )));
    }
    Ok(b.column(0).into_owned())
}

fn require_stable(sd: &SpectralData) -> Result<()> {
    if let Some(l) = sd.eigenvalues.iter().find(|&&l| !(l < 0.0)) {
        return Err(Error::UnsupportedSpectrum(format!(
            "eigenvalue {l} is not negative; the infinite-horizon region is bounded only when every eigenvalue lies in (-inf, 0)"
        )));
    }
    Ok(())
}

/// `|prod_{i<j} (l_j - l_i) / (l_i + l_j)|`, the eigenvalue evenness factor.
pub fn eigenvalue_evenness(eigenvalues: &[f64]) -> f64 {
    let mut prod = 1.0;
    for (i, &li) in eigenvalues.iter().enumerate() {
        for &lj in &eigenvalues[i + 1..] {
            prod *= (lj - li) / (li + lj);
        }
    }
    prod.abs()
}

/// Volume of `R(inf)` for `n` distinct negative eigenvalues and one input:
/// `2^n |det(P) prod_{i<j} (l_j - l_i)/(l_i + l_j) prod_i (q_i b)/l_i|`.
pub fn analytic_volume_distinct(sd: &SpectralData, b: &DMatrix<f64>) -> Result<f64> {
    let b = single_column(b)?;
    if sd.structure != Structure::Distinct {
        return Err(Error::RouteToJordan(format!(
            "eigenvalues {:?} contain repeats",
            sd.eigenvalues
        )));
    }
    require_stable(sd)?;
    let modal = sd.modal_input(&b)?;
    let n = sd.n();
    let modes: f64 = modal.iter().zip(&sd.eigenvalues).map(|(qb, l)| qb / l).product();
    let pairs = eigenvalue_evenness(&sd.eigenvalues);
    Ok(2f64.powi(n as i32) * (sd.det_transform() * modes).abs() * pairs)
}

/// Volume of `R(inf)` for a Jordan structure with blocks `(l_i, m_i)`:
/// `2^n |prod_{i<j} ((l_i - l_j)/(l_i + l_j))^{m_i m_j}|
///  * |det(P_J) prod_i (b_{i,m_i}/l_i)^{m_i} / (2 l_i)^{m_i (m_i - 1)/2}|`
/// where `b_{i,m_i}` is the modal input at the last row of block `i`.
/// Reduces to [`analytic_volume_distinct`] when every block has size one.
pub fn analytic_volume_jordan(sd: &SpectralData, b: &DMatrix<f64>) -> Result<f64> {
    let b = single_column(b)?;
    require_stable(sd)?;
    let modal = sd.modal_input(&b)?;
    let n = sd.n();

    let mut cross = 1.0;
    for (i, bi) in sd.blocks.iter().enumerate() {
        for bj in &sd.blocks[i + 1..] {
            let ratio = (bi.eigenvalue - bj.eigenvalue) / (bi.eigenvalue + bj.eigenvalue);
            cross *= ratio.powi((bi.size * bj.size) as i32);
        }
    }
    let mut own = sd.det_transform();
    for (blk, off) in sd.blocks.iter().zip(sd.block_offsets()) {
        let m = blk.size as i32;
        let last = modal[off + blk.size - 1];
        own *= (last / blk.eigenvalue).powi(m) / (2.0 * blk.eigenvalue).powi(m * (m - 1) / 2);
    }
    Ok(2f64.powi(n as i32) * cross.abs() * own.abs())
}

/// Dispatches to the distinct or Jordan formula after decomposing `A`.
pub fn analytic_volume(sys: &LtiSystem) -> Result<f64> {
    let sd = spectral_decompose(sys, None)?;
    analytic_volume_for(&sd, sys.b())
}

pub fn analytic_volume_for(sd: &SpectralData, b: &DMatrix<f64>) -> Result<f64> {
    match sd.structure {
        Structure::Distinct => analytic_volume_distinct(sd, b),
        Structure::Jordan => analytic_volume_jordan(sd, b),
    }
}

/// Shape factors of the infinite-horizon region.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeFactors {
    /// Eigenvalue evenness. In the Jordan case it also carries
    /// `prod_i |l_i|^{-m_i (m_i - 1)/2}`.
    #[serde(rename = "F1")]
    pub f1: f64,
    /// Half side lengths of the circumscribed box in modal coordinates, one
    /// per state coordinate in block order.
    #[serde(rename = "F2")]
    pub f2: Vec<f64>,
    /// `(block, position)` of each `F2` entry, both 1-based.
    #[serde(rename = "F2_index")]
    pub f2_index: Vec<(usize, usize)>,
    /// Modal controllability, one per block.
    #[serde(rename = "F3")]
    pub f3: Vec<f64>,
    /// Eigenvalue per `F3` entry.
    pub eigenvalues: Vec<f64>,
    /// Set when the modal inputs within a Jordan block change sign.
    pub mixed_signs: bool,
    pub warnings: Vec<String>,
}

/// `F1`, `F2`, `F3` for a distinct or Jordan spectrum.
///
/// Jordan `F2` entries follow the backward recursion
/// `G_m = q_m b / |l|`, `G_j = (q_j b + G_{j+1}) / |l|`, `F2_j = |G_j|`, which
/// equals the stated form `|q_j b + F2_{j+1}| / |l|` whenever the modal
/// inputs of the block share one sign. Note the Jordan `F1` uses
/// `l_i^{m_i(m_i-1)/2}` while the Jordan volume uses `(2 l_i)^{m_i(m_i-1)/2}`,
/// so `volume != F1 * prod(2 F2)` in that case.
pub fn shape_factors(sd: &SpectralData, b: &DMatrix<f64>) -> Result<ShapeFactors> {
    let b = single_column(b)?;
    require_stable(sd)?;
    let modal = sd.modal_input(&b)?;
    let mut warnings = sd.warnings.clone();

    if sd.structure == Structure::Distinct {
        let f2 = modal.iter().zip(&sd.eigenvalues).map(|(qb, l)| (qb / l).abs()).collect();
        return Ok(ShapeFactors {
            f1: eigenvalue_evenness(&sd.eigenvalues),
            f2,
            f2_index: (1..=sd.n()).map(|i| (i, 1)).collect(),
            f3: modal.iter().map(|v| v.abs()).collect(),
            eigenvalues: sd.eigenvalues.clone(),
            mixed_signs: false,
            warnings,
        });
    }

    let mut cross = 1.0;
    let mut own = 1.0;
    for (i, bi) in sd.blocks.iter().enumerate() {
        for bj in &sd.blocks[i + 1..] {
            let ratio = (bi.eigenvalue - bj.eigenvalue) / (bi.eigenvalue + bj.eigenvalue);
            cross *= ratio.powi((bi.size * bj.size) as i32);
        }
        let m = bi.size as i32;
        own /= bi.eigenvalue.powi(m * (m - 1) / 2);
    }

    let mut f2 = vec![0.0; sd.n()];
    let mut f2_index = Vec::with_capacity(sd.n());
    let mut f3 = Vec::with_capacity(sd.blocks.len());
    let mut mixed = false;
    for (bi, (blk, off)) in sd.blocks.iter().zip(sd.block_offsets()).enumerate() {
        let entries = &modal.as_slice()[off..off + blk.size];
        let positive = entries.iter().any(|&v| v > 0.0);
        let negative = entries.iter().any(|&v| v < 0.0);
        mixed |= positive && negative;
        let rate = blk.eigenvalue.abs();
        let mut carry = 0.0;
        for j in (0..blk.size).rev() {
            carry = (entries[j] + carry) / rate;
            f2[off + j] = carry.abs();
        }
        for j in 0..blk.size {
            f2_index.push((bi + 1, j + 1));
        }
        f3.push(entries[blk.size - 1].abs().powi(blk.size as i32));
    }
    if mixed {
        warnings.push("modal inputs within a Jordan block have mixed signs; F2 assumes a common sign".into());
    }
    Ok(ShapeFactors {
        f1: cross.abs() * own.abs(),
        f2,
        f2_index,
        f3,
        eigenvalues: sd.blocks.iter().map(|b| b.eigenvalue).collect(),
        mixed_signs: mixed,
        warnings,
    })
}
