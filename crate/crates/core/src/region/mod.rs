//! Controllability regions of `dx/dt = A x + B u` under `|u_i| <= 1`.
//!
//! A finite-horizon region is approximated by the zonotope of the sampled
//! model; infinite-horizon volumes come in closed form from the spectrum.
//! Support values and boundary points are computed on the continuous-time
//! region directly.

mod analytic;
mod boundary;
mod compare;
mod min_time;
mod theorem;

pub use analytic::{
    analytic_volume, analytic_volume_distinct, analytic_volume_for, analytic_volume_jordan, eigenvalue_evenness,
    shape_factors, ShapeFactors,
};
pub use boundary::{boundary_point, boundary_point_for, truncation_horizon, BoundaryPoint};
pub use compare::{compare, default_direction_count, sample_directions, ComparisonVerdict, Conclusion};
pub use min_time::{min_time, min_time_with, MinTimeOptions, MinTimeResult};
pub use theorem::{verify_theorem1, verify_theorem1_with, StateMargin, Theorem1Report};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{matrix_exponential, step_count, LtiSystem};
use crate::zonotope::GeneratorZonotope;

/// Upper limit on generators of a discretized region.
pub const MAX_GENERATORS: usize = 2_000_000;

/// Which of the three regions a [`RegionSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// States steerable to the origin: the pair `(-A, B)`.
    NarrowControllability,
    /// States reachable from the origin: the pair `(A, B)`.
    Reachability,
    /// `{ int_0^T e^{At} B z_t dt : |z_t| <= 1 }`, also the pair `(A, B)`.
    Broad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn finite(self) -> Option<f64> {
        match self {
            Horizon::Finite(t) => Some(t),
            Horizon::Infinite => None,
        }
    }
}

/// Quadrature weights of the sampled region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `delta * sum_{i<N} e^{A delta i} B u_i`, one generator per sample.
    #[default]
    Rectangle,
    /// End samples weighted `delta/2`, interior samples `delta`; `N + 1` samples.
    Trapezoid,
}

#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub sys: LtiSystem,
    pub variant: Variant,
    pub horizon: Horizon,
    pub delta: f64,
    pub rule: Rule,
}

impl RegionSpec {
    pub fn new(sys: LtiSystem, variant: Variant, horizon: Horizon, delta: f64) -> Result<Self> {
        if let Horizon::Finite(t) = horizon {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Parameter(format!("horizon must be positive and finite, got {t}")));
            }
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(Error::Parameter(format!("sampling period must be positive, got {delta}")));
            }
        }
        Ok(Self { sys, variant, horizon, delta, rule: Rule::Rectangle })
    }

    /// Broad region of `sys` over a finite horizon.
    pub fn broad(sys: LtiSystem, horizon: f64, delta: f64) -> Result<Self> {
        Self::new(sys, Variant::Broad, Horizon::Finite(horizon), delta)
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    /// The pair actually integrated: `(-A, B)` for the narrow region.
    pub fn effective_system(&self) -> LtiSystem {
        match self.variant {
            Variant::NarrowControllability => self.sys.time_reversed(),
            Variant::Reachability | Variant::Broad => self.sys.clone(),
        }
    }

    fn finite_horizon(&self) -> Result<f64> {
        self.horizon
            .finite()
            .ok_or_else(|| Error::Parameter("a discretized region needs a finite horizon".into()))
    }
}

/// Sampled zonotope with generators `delta * e^{A delta i} b_j`.
pub fn finite_time_region(spec: &RegionSpec) -> Result<GeneratorZonotope> {
    let horizon = spec.finite_horizon()?;
    let steps = step_count(horizon, spec.delta);
    if steps == 0 {
        return Err(Error::Parameter(format!(
            "horizon {horizon} is shorter than the sampling period {}",
            spec.delta
        )));
    }
    let sys = spec.effective_system();
    let (n, r) = (sys.n(), sys.r());
    let samples = match spec.rule {
        Rule::Rectangle => steps,
        Rule::Trapezoid => steps + 1,
    };
    if samples.saturating_mul(r) > MAX_GENERATORS {
        return Err(Error::Resource(format!(
            "{} generators exceed the limit of {MAX_GENERATORS}; use a larger sampling period",
            samples * r
        )));
    }
    let step = matrix_exponential(sys.a(), spec.delta)?;
    let mut columns: DMatrix<f64> = sys.b().clone();
    let mut data = Vec::with_capacity(samples * r * n);
    for i in 0..samples {
        let weight = match spec.rule {
            Rule::Trapezoid if i == 0 || i == steps => spec.delta / 2.0,
            _ => spec.delta,
        };
        for j in 0..r {
            data.extend(columns.column(j).iter().map(|v| v * weight));
        }
        columns = &step * columns;
    }
    GeneratorZonotope::from_flat(n, data)
}

/// Volume of the sampled region. First-order accurate in `delta` for the
/// rectangle rule.
pub fn finite_time_volume(spec: &RegionSpec) -> Result<f64> {
    finite_time_region(spec)?.volume_exact()
}

/// Serializable summary of a region at one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct RegionExport {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub delta: f64,
    pub volume: f64,
    /// Rows `[d_1, ..., d_n, h(d)]`.
    pub support: Vec<Vec<f64>>,
}

/// Discretized volume plus continuous-time support values along `directions`.
pub fn export_region(spec: &RegionSpec, directions: &[Vec<f64>]) -> Result<RegionExport> {
    let volume = finite_time_volume(spec)?;
    let sys = spec.effective_system();
    let support = directions
        .iter()
        .map(|d| {
            let bp = boundary_point(&sys, spec.horizon, d)?;
            let mut row = d.clone();
            row.push(bp.support);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionExport { horizon: spec.horizon.finite(), delta: spec.delta, volume, support })
}
