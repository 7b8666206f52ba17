use rayon::prelude::*;
use serde::Serialize;

use super::{boundary_point, Horizon};
use crate::error::{Error, Result};
use crate::lti::LtiSystem;

/// Ordering of two systems by their controllability regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// Region 2 strictly contains region 1 (every margin positive).
    System2Stronger,
    /// Region 2 contains region 1 and the boundaries touch.
    System2NotWeaker,
    Equal,
    System1NotWeaker,
    System1Stronger,
    /// Margins of both signs.
    Incomparable,
}

/// Per-direction support margins `h_2(d) - h_1(d)`.
///
/// The verdict is certified only on the sampled directions.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonVerdict {
    pub directions: Vec<Vec<f64>>,
    pub margins: Vec<f64>,
    pub conclusion: Conclusion,
    pub horizon: Horizon,
    /// Margins with magnitude at most this are treated as zero.
    pub tolerance: f64,
}

/// 64 directions in the plane, 256 in space, both signs of the axis in 1-D.
pub fn default_direction_count(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 64,
        _ => 256,
    }
}

/// Deterministic quasi-uniform unit directions.
///
/// In the plane the angles are `2 pi k / count`, and for even `count` the
/// second half is the exact negation of the first. In three or more
/// dimensions a Fibonacci lattice on the sphere is used (embedded in the
/// first three coordinates, the remaining coordinates spread by a golden
/// ratio sequence before normalization).
pub fn sample_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let half = count / 2;
            if count.is_multiple_of(2) {
                let first: Vec<Vec<f64>> = (0..half)
                    .map(|k| {
                        let t = std::f64::consts::TAU * k as f64 / count as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                let second: Vec<Vec<f64>> = first.iter().map(|d| vec![-d[0], -d[1]]).collect();
                first.into_iter().chain(second).collect()
            } else {
                (0..count)
                    .map(|k| {
                        let t = std::f64::consts::TAU * k as f64 / count as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect()
            }
        }
        _ => {
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = std::f64::consts::TAU * k as f64 / golden;
                    let mut d = vec![rho * phi.cos(), rho * phi.sin(), z];
                    for extra in 3..n {
                        let frac = ((k + 1) as f64 * golden.powi(extra as i32 - 1)).fract();
                        d.push(2.0 * frac - 1.0);
                    }
                    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    d.iter().map(|v| v / norm).collect()
                })
                .collect()
        }
    }
}

/// Compares the broad regions of two systems at one horizon through their
/// support functions along `count` sampled directions.
pub fn compare(sys1: &LtiSystem, sys2: &LtiSystem, horizon: Horizon, count: usize) -> Result<ComparisonVerdict> {
    if sys1.n() != sys2.n() {
        return Err(Error::Dimension(format!(
            "systems have state dimensions {} and {}",
            sys1.n(),
            sys2.n()
        )));
    }
    if count == 0 {
        return Err(Error::Parameter("direction count must be positive".into()));
    }
    let directions = sample_directions(sys1.n(), count);
    let pairs: Vec<(f64, f64)> = directions
        .par_iter()
        .map(|d| Ok((boundary_point(sys1, horizon, d)?.support, boundary_point(sys2, horizon, d)?.support)))
        .collect::<Result<_>>()?;
    let scale = pairs.iter().fold(0.0f64, |m, (a, b)| m.max(a.abs()).max(b.abs()));
    let tolerance = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let margins: Vec<f64> = pairs.iter().map(|(h1, h2)| h2 - h1).collect();
    let conclusion = classify(&margins, tolerance);
    Ok(ComparisonVerdict { directions, margins, conclusion, horizon, tolerance })
}

fn classify(margins: &[f64], tol: f64) -> Conclusion {
    if margins.iter().all(|m| m.abs() <= tol) {
        Conclusion::Equal
    } else if margins.iter().all(|&m| m > tol) {
        Conclusion::System2Stronger
    } else if margins.iter().all(|&m| m >= -tol) {
        Conclusion::System2NotWeaker
    } else if margins.iter().all(|&m| m < -tol) {
        Conclusion::System1Stronger
    } else if margins.iter().all(|&m| m <= tol) {
        Conclusion::System1NotWeaker
    } else {
        Conclusion::Incomparable
    }
}

impl ComparisonVerdict {
    /// Region 2 contains region 1 on every sampled direction.
    pub fn system2_contains_system1(&self) -> bool {
        matches!(
            self.conclusion,
            Conclusion::Equal | Conclusion::System2NotWeaker | Conclusion::System2Stronger
        )
    }
}
