//! Minimum transfer time by bisection on the horizon.
//!
//! A state on the boundary of `R(T)` is reached in time `T` and no sooner, so
//! the first horizon whose region contains `x0` is the time-optimal transfer
//! time under unit-bounded inputs.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{boundary_point, default_direction_count, sample_directions, truncation_horizon, Horizon, MAX_GENERATORS};
use crate::error::{Error, Result};
use crate::lti::{matrix_exponential, step_count, LtiSystem};
use crate::zonotope::GeneratorZonotope;

#[derive(Debug, Clone, Default)]
pub struct MinTimeOptions {
    /// Sampling period of the membership regions; defaults to `tol / 10`.
    pub delta: Option<f64>,
    /// Largest horizon tried for systems without a finite truncation time
    /// (default 100).
    pub max_horizon: Option<f64>,
    /// First upper bracket (default 1).
    pub initial_horizon: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinTimeResult {
    pub time: f64,
    pub delta: f64,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
    pub membership_tests: usize,
    /// Coefficients strictly inside `(-1, 1)` of a combination reaching `x0`
    /// at the upper bracket, a proxy for how many input sequences reach it.
    pub interior_coefficients: usize,
}

/// Smallest `T` with `x0` in the broad region `R(T)`, to within `tol`.
pub fn min_time(sys: &LtiSystem, x0: &[f64], tol: f64) -> Result<f64> {
    Ok(min_time_with(sys, x0, tol, &MinTimeOptions::default())?.time)
}

pub fn min_time_with(sys: &LtiSystem, x0: &[f64], tol: f64, opts: &MinTimeOptions) -> Result<MinTimeResult> {
    let n = sys.n();
    if x0.len() != n {
        return Err(Error::Dimension(format!("state of length {} in dimension {n}", x0.len())));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Parameter(format!("time tolerance must be positive, got {tol}")));
    }
    let delta = opts.delta.unwrap_or(tol / 10.0);
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("sampling period must be positive, got {delta}")));
    }
    let x_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if x_norm == 0.0 {
        return Ok(MinTimeResult { time: 0.0, delta, bracket: (0.0, 0.0), membership_tests: 0, interior_coefficients: 0 });
    }

    let cap = if sys.is_hurwitz() {
        check_reachable(sys, x0, tol)?;
        truncation_horizon(sys)?
    } else {
        opts.max_horizon.unwrap_or(100.0)
    };

    let mut regions = SampledRegions::new(sys, delta)?;
    let mut tests = 0;
    let mut hi = opts.initial_horizon.unwrap_or(1.0).min(cap);
    let mut lo = 0.0;
    loop {
        tests += 1;
        if regions.contains(x0, hi, tol)? {
            break;
        }
        if hi >= cap {
            return Err(Error::Unreachable(format!(
                "state is not reached within the horizon limit {cap:.6}"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        tests += 1;
        if regions.contains(x0, mid, tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinTimeResult {
        time: 0.5 * (lo + hi),
        delta,
        bracket: (lo, hi),
        membership_tests: tests,
        interior_coefficients: regions.interior_count(x0, hi, tol)?,
    })
}

/// Rejects states outside `R(inf)` by a support-function test.
fn check_reachable(sys: &LtiSystem, x0: &[f64], tol: f64) -> Result<()> {
    let n = sys.n();
    let x_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut dirs = sample_directions(n, default_direction_count(n));
    dirs.push(x0.iter().map(|v| v / x_norm).collect());
    let speed = input_speed(sys, 0.0)?;
    for d in &dirs {
        let h = boundary_point(sys, Horizon::Infinite, d)?.support;
        let proj: f64 = d.iter().zip(x0).map(|(a, b)| a * b).sum();
        if proj > h + tol * speed {
            return Err(Error::Unreachable(format!(
                "state exceeds the infinite-horizon support {h:.6} by {:.3e} along {d:?}",
                proj - h
            )));
        }
    }
    Ok(())
}

/// `sum_j ||e^{At} b_j||`, the rate at which the region boundary can move.
fn input_speed(sys: &LtiSystem, t: f64) -> Result<f64> {
    let e = matrix_exponential(sys.a(), t)? * sys.b();
    Ok(e.column_iter().map(|c| c.norm()).sum())
}

/// Generators `delta e^{A delta i} b_j`, extended on demand and shared by
/// every membership test of one bisection.
struct SampledRegions<'a> {
    sys: &'a LtiSystem,
    delta: f64,
    step: DMatrix<f64>,
    columns: DMatrix<f64>,
    data: Vec<f64>,
}

impl<'a> SampledRegions<'a> {
    fn new(sys: &'a LtiSystem, delta: f64) -> Result<Self> {
        Ok(Self {
            sys,
            delta,
            step: matrix_exponential(sys.a(), delta)?,
            columns: sys.b().clone(),
            data: Vec::new(),
        })
    }

    fn ensure(&mut self, generators: usize) -> Result<()> {
        if generators > MAX_GENERATORS {
            return Err(Error::Resource(format!(
                "{generators} generators exceed the limit of {MAX_GENERATORS}; use a larger sampling period"
            )));
        }
        let n = self.sys.n();
        while self.data.len() < generators * n {
            for j in 0..self.sys.r() {
                self.data.extend(self.columns.column(j).iter().map(|v| v * self.delta));
            }
            self.columns = &self.step * &self.columns;
        }
        Ok(())
    }

    fn zonotope(&mut self, horizon: f64) -> Result<Option<GeneratorZonotope>> {
        let count = step_count(horizon, self.delta) * self.sys.r();
        if count == 0 {
            return Ok(None);
        }
        self.ensure(count)?;
        Ok(Some(GeneratorZonotope::from_flat(self.sys.n(), self.data[..count * self.sys.n()].to_vec())?))
    }

    fn geometric_tol(&self, x0: &[f64], horizon: f64, tol: f64) -> Result<f64> {
        let x_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((0.01 * tol * input_speed(self.sys, horizon)?).max(1e-12 * (1.0 + x_norm)))
    }

    fn contains(&mut self, x0: &[f64], horizon: f64, tol: f64) -> Result<bool> {
        let gtol = self.geometric_tol(x0, horizon, tol)?;
        match self.zonotope(horizon)? {
            None => Ok(false),
            Some(zono) => Ok(zono.distance_bounds(x0, gtol)?.within(gtol)),
        }
    }

    /// Interior coefficients of the reaching combination at `horizon`.
    fn interior_count(&mut self, x0: &[f64], horizon: f64, tol: f64) -> Result<usize> {
        let gtol = self.geometric_tol(x0, horizon, tol)?;
        match self.zonotope(horizon)? {
            None => Ok(0),
            Some(zono) => Ok(zono.project(x0, gtol, None)?.interior_count()),
        }
    }
}
