//! Empirical check that a larger controllability region never slows down
//! time-optimal transfer.

use rayon::prelude::*;
use serde::Serialize;

use super::{boundary_point, compare, default_direction_count, min_time_with, sample_directions, Horizon, MinTimeOptions};
use crate::error::{Error, Result};
use crate::lti::LtiSystem;

/// Transfer times to one boundary state of the first system's region.
#[derive(Debug, Clone, Serialize)]
pub struct StateMargin {
    pub direction: Vec<f64>,
    pub state: Vec<f64>,
    pub time1: f64,
    pub time2: f64,
    /// `time1 - time2`; non-negative when system 2 is at least as fast.
    pub margin: f64,
    pub interior1: usize,
    pub interior2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub tol: f64,
    /// Horizons at which region containment was checked.
    pub hypothesis_horizons: Vec<f64>,
    pub states: Vec<StateMargin>,
    pub min_margin: f64,
    pub passes: bool,
}

/// Checks at `sample_count` boundary states of `R_1(T)` that system 2 reaches
/// each of them no later than system 1 (up to `tol`), after confirming that
/// `R_1(tau)` lies inside `R_2(tau)` on a grid of horizons up to `T`.
pub fn verify_theorem1(
    sys1: &LtiSystem,
    sys2: &LtiSystem,
    horizon: f64,
    sample_count: usize,
    tol: f64,
) -> Result<Theorem1Report> {
    verify_theorem1_with(sys1, sys2, horizon, sample_count, tol, &MinTimeOptions::default())
}

pub fn verify_theorem1_with(
    sys1: &LtiSystem,
    sys2: &LtiSystem,
    horizon: f64,
    sample_count: usize,
    tol: f64,
    opts: &MinTimeOptions,
) -> Result<Theorem1Report> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("horizon must be positive and finite, got {horizon}")));
    }
    if sample_count == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let n = sys1.n();
    let hypothesis_horizons: Vec<f64> = (1..=4).map(|k| horizon * k as f64 / 4.0).collect();
    for &tau in &hypothesis_horizons {
        let verdict = compare(sys1, sys2, Horizon::Finite(tau), default_direction_count(n))?;
        if !verdict.system2_contains_system1() {
            let worst = verdict.margins.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::Hypothesis(format!(
                "region of system 1 is not contained in that of system 2 at horizon {tau} (margin {worst:.3e})"
            )));
        }
    }

    let states = sample_directions(n, sample_count)
        .into_par_iter()
        .map(|d| {
            let state = boundary_point(sys1, Horizon::Finite(horizon), &d)?.point;
            let r1 = min_time_with(sys1, &state, tol, opts)?;
            let r2 = min_time_with(sys2, &state, tol, opts)?;
            Ok(StateMargin {
                direction: d,
                state,
                time1: r1.time,
                time2: r2.time,
                margin: r1.time - r2.time,
                interior1: r1.interior_coefficients,
                interior2: r2.interior_coefficients,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_margin = states.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(Theorem1Report { horizon, tol, hypothesis_horizons, passes: min_margin >= -tol, min_margin, states })
}
