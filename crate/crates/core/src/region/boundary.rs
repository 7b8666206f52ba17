use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{Horizon, RegionSpec};
use crate::error::{Error, Result};
use crate::lti::{matrix_exponential, LtiSystem};

/// Grid cells used to bracket sign changes of `d . e^{At} b_j`.
const BRACKET_CELLS: usize = 2048;

/// The boundary point of a region supported by a direction.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub point: Vec<f64>,
    /// `h(d) = d . point`.
    pub support: f64,
    /// Horizon actually integrated (the truncation time for infinite horizons).
    pub horizon: f64,
    /// Sign-change times of `d . e^{At} b_j`, per input column.
    pub switch_times: Vec<Vec<f64>>,
}

/// Time after which every mode has decayed below `1e-12` of its initial
/// size: `ln(1e12) / |max Re(l)|`.
pub fn truncation_horizon(sys: &LtiSystem) -> Result<f64> {
    let abscissa = sys.spectral_abscissa();
    if !(abscissa < 0.0) {
        return Err(Error::Divergence(format!(
            "spectral abscissa {abscissa} is not negative, the infinite-horizon region is unbounded"
        )));
    }
    Ok(1e12f64.ln() / abscissa.abs())
}

/// `x = int_0^T sgn(d . e^{At} b_j) e^{At} b_j dt`, summed over input columns.
///
/// Every sign change of the switching function is bracketed on a uniform grid
/// and refined by bisection, so no integration panel straddles a
/// discontinuity. Each smooth panel is integrated exactly through
/// `int_0^h e^{As} ds`, read off the exponential of `[[A, I], [0, 0]] h`.
pub fn boundary_point(sys: &LtiSystem, horizon: Horizon, d: &[f64]) -> Result<BoundaryPoint> {
    let n = sys.n();
    if d.len() != n {
        return Err(Error::Dimension(format!("direction of length {} in dimension {n}", d.len())));
    }
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::Parameter("boundary direction must be non-zero".into()));
    }
    let t_end = match horizon {
        Horizon::Finite(t) if t > 0.0 && t.is_finite() => t,
        Horizon::Finite(t) => return Err(Error::Parameter(format!("horizon must be positive, got {t}"))),
        Horizon::Infinite => truncation_horizon(sys)?,
    };
    let a = sys.a();
    let dir = DVector::from_column_slice(d);
    let cell = t_end / BRACKET_CELLS as f64;
    let step = matrix_exponential(a, cell)?;

    let mut point = DVector::zeros(n);
    let mut switch_times = Vec::with_capacity(sys.r());
    for j in 0..sys.r() {
        let b = sys.b().column(j).into_owned();
        let mut breaks = vec![0.0];
        let mut v = b.clone();
        let mut phi = dir.dot(&v);
        for k in 0..BRACKET_CELLS {
            let next_v = &step * &v;
            let next_phi = dir.dot(&next_v);
            let t0 = k as f64 * cell;
            if phi == 0.0 && k > 0 {
                breaks.push(t0);
            } else if phi * next_phi < 0.0 {
                breaks.push(t0 + refine_root(a, &dir, &v, cell)?);
            }
            v = next_v;
            phi = next_phi;
        }
        breaks.push(t_end);
        switch_times.push(breaks[1..breaks.len() - 1].to_vec());

        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let mid = matrix_exponential(a, 0.5 * (lo + hi))? * &b;
            let sign = dir.dot(&mid).signum();
            if dir.dot(&mid) == 0.0 {
                continue;
            }
            let start = matrix_exponential(a, lo)?;
            let panel = start * integral_of_exponential(a, hi - lo)? * &b;
            point += panel * sign;
        }
    }
    let support = dir.dot(&point);
    Ok(BoundaryPoint { point: point.iter().copied().collect(), support, horizon: t_end, switch_times })
}

/// [`boundary_point`] for the pair a [`RegionSpec`] integrates.
pub fn boundary_point_for(spec: &RegionSpec, d: &[f64]) -> Result<BoundaryPoint> {
    boundary_point(&spec.effective_system(), spec.horizon, d)
}

/// Root of `s -> d . e^{As} v` inside `[0, width]`, given a sign change.
fn refine_root(a: &DMatrix<f64>, dir: &DVector<f64>, v: &DVector<f64>, width: f64) -> Result<f64> {
    let f = |s: f64| -> Result<f64> { Ok(dir.dot(&(matrix_exponential(a, s)? * v))) };
    let (mut lo, mut hi) = (0.0, width);
    let f_lo = f(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `int_0^h e^{As} ds`.
fn integral_of_exponential(a: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, n)).fill_with_identity();
    let e = matrix_exponential(&aug, h)?;
    Ok(e.view((0, n), (n, n)).into_owned())
}
