//! Controllability Gramians and the scalar measures derived from them.

#![allow(clippy::excessive_precision)]

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::{matrix_exponential, matrix_serde, LtiSystem};
use crate::region::Horizon;

const REL_TOL: f64 = 1e-10;
const MAX_DEPTH: usize = 40;

// Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Serialize)]
pub struct GramianReport {
    #[serde(rename = "G", with = "matrix_serde")]
    pub g: DMatrix<f64>,
    pub horizon: Horizon,
    pub det: f64,
    pub lambda_min: f64,
    /// Volume of `{x : x^T G^{-1} x <= 1}`, the unit n-ball volume times `sqrt(det G)`.
    pub ellipsoid_volume: f64,
}

impl GramianReport {
    fn new(g: DMatrix<f64>, horizon: Horizon) -> Self {
        let g = (&g + g.transpose()) * 0.5;
        let n = g.nrows();
        let eig = g.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let det = g.determinant().max(0.0);
        let ellipsoid_volume = unit_ball_volume(n) * det.sqrt();
        Self { g, horizon, det, lambda_min, ellipsoid_volume }
    }
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    let (mut even, mut odd) = (1.0, 2.0);
    for k in 2..=n {
        let next = std::f64::consts::TAU / k as f64 * if k % 2 == 0 { even } else { odd };
        if k % 2 == 0 {
            even = next;
        } else {
            odd = next;
        }
    }
    if n.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// `G_T = int_0^T e^{At} B B^T e^{A^T t} dt` by adaptive Gauss-Kronrod
/// quadrature.
pub fn gramian_finite(sys: &LtiSystem, horizon: f64) -> Result<GramianReport> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("horizon must be positive and finite, got {horizon}")));
    }
    let bbt = sys.b() * sys.b().transpose();
    let integrand = |t: f64| -> Result<DMatrix<f64>> {
        let e = matrix_exponential(sys.a(), t)?;
        Ok(&e * &bbt * e.transpose())
    };
    let (coarse, _) = kronrod(&integrand, 0.0, horizon)?;
    let scale = coarse.norm().max(f64::MIN_POSITIVE);
    let g = adaptive(&integrand, 0.0, horizon, REL_TOL * scale, horizon, 0)?;
    Ok(GramianReport::new(g, Horizon::Finite(horizon)))
}

/// Solves `A G + G A^T = -B B^T` through its Kronecker-vectorized form.
pub fn gramian_infinite(sys: &LtiSystem) -> Result<GramianReport> {
    let abscissa = sys.spectral_abscissa();
    if !(abscissa < 0.0) {
        return Err(Error::Divergence(format!(
            "spectral abscissa {abscissa} is not negative, the infinite-horizon Gramian does not exist"
        )));
    }
    let n = sys.n();
    let a = sys.a();
    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -(sys.b() * sys.b().transpose());
    let vec_rhs = nalgebra::DVector::from_column_slice(rhs.as_slice());
    let sol = op
        .lu()
        .solve(&vec_rhs)
        .ok_or_else(|| Error::Decomposition("Lyapunov operator is singular".into()))?;
    let g = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok(GramianReport::new(g, Horizon::Infinite))
}

fn kronrod<F>(f: &F, lo: f64, hi: f64) -> Result<(DMatrix<f64>, f64)>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut k = &fc * WGK[7];
    let mut g = &fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let sum = f(center - dx)? + f(center + dx)?;
        k += &sum * WGK[i];
        if i % 2 == 1 {
            g += &sum * WG[i / 2];
        }
    }
    let k = k * half;
    let err = (&k - g * half).norm();
    Ok((k, err))
}

fn adaptive<F>(f: &F, lo: f64, hi: f64, tol: f64, total: f64, depth: usize) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let (value, err) = kronrod(f, lo, hi)?;
    let local = tol * (hi - lo) / total;
    if err <= local || depth >= MAX_DEPTH {
        if err > local {
            log::warn!("Gramian quadrature reached depth {MAX_DEPTH} with error {err:.3e} on [{lo}, {hi}]");
        }
        return Ok(value);
    }
    let mid = 0.5 * (lo + hi);
    Ok(adaptive(f, lo, mid, tol, total, depth + 1)? + adaptive(f, mid, hi, tol, total, depth + 1)?)
}
