//! Derivative-free maximization of control-ability measures over the input
//! vector of a single-input system.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::{gramian_finite, gramian_infinite};
use crate::lti::{matrix_serde, spectral_decompose, LtiSystem, SpectralData};
use crate::region::{analytic_volume_for, finite_time_volume, shape_factors, RegionSpec};

/// How the parameter vector `theta` maps to the input vector `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameterization {
    /// Unit vector in hyperspherical coordinates:
    /// `b_1 = cos t_1`, `b_k = sin t_1 ... sin t_{k-1} cos t_k`,
    /// `b_n = sin t_1 ... sin t_{n-1}`. Defaults to `[0, pi]` for every angle,
    /// which covers each region once since `b` and `-b` give the same region.
    UnitAngles {
        #[serde(default)]
        bounds: Option<Vec<[f64; 2]>>,
    },
    /// Entries of `b` at `indices` vary inside `[lower, upper]`; the rest stay
    /// at `base` (zero when omitted).
    BoxEntries {
        indices: Vec<usize>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        base: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Closed-form volume of the infinite-horizon region.
    InfiniteVolume,
    FiniteVolume {
        #[serde(rename = "T")]
        horizon: f64,
        delta: f64,
    },
    #[serde(rename = "F1", alias = "f1")]
    F1,
    /// Smallest circumscribed side `F2`.
    #[serde(rename = "min_F2", alias = "min_f2")]
    MinF2,
    /// `det G`, infinite horizon unless `T` is given.
    GramianDet {
        #[serde(rename = "T", default)]
        horizon: Option<f64>,
    },
    GramianLambdaMin {
        #[serde(rename = "T", default)]
        horizon: Option<f64>,
    },
}

fn default_budget() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationProblem {
    #[serde(rename = "A", with = "matrix_serde")]
    pub a: DMatrix<f64>,
    pub param: Parameterization,
    pub objective: Objective,
    /// Maximum number of objective evaluations.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub theta: Vec<f64>,
    /// `None` when the objective could not be evaluated.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub b: Vec<f64>,
    pub trace: Vec<Evaluation>,
}

/// The objective as a function of `theta`, with the spectral data of the
/// fixed state matrix computed once.
pub struct CompiledProblem {
    problem: OptimizationProblem,
    spectral: Option<SpectralData>,
    bounds: Vec<[f64; 2]>,
}

impl CompiledProblem {
    pub fn new(problem: OptimizationProblem) -> Result<Self> {
        let n = problem.a.nrows();
        if n == 0 || problem.a.ncols() != n {
            return Err(Error::Dimension(format!(
                "state matrix must be square and non-empty, got {}x{}",
                n,
                problem.a.ncols()
            )));
        }
        let bounds = match &problem.param {
            Parameterization::UnitAngles { bounds } => {
                if n < 2 {
                    return Err(Error::Parameter("angle parameterization needs n >= 2".into()));
                }
                let bounds = bounds.clone().unwrap_or_else(|| vec![[0.0, std::f64::consts::PI]; n - 1]);
                if bounds.len() != n - 1 {
                    return Err(Error::Dimension(format!("{} angle bounds for {} angles", bounds.len(), n - 1)));
                }
                bounds
            }
            Parameterization::BoxEntries { indices, lower, upper, base } => {
                if indices.is_empty() || indices.len() != lower.len() || indices.len() != upper.len() {
                    return Err(Error::Dimension(
                        "box parameterization needs equally long, non-empty indices, lower and upper".into(),
                    ));
                }
                if let Some(&i) = indices.iter().find(|&&i| i >= n) {
                    return Err(Error::Dimension(format!("entry index {i} out of range for n = {n}")));
                }
                if base.as_ref().is_some_and(|b| b.len() != n) {
                    return Err(Error::Dimension(format!("base vector must have length {n}")));
                }
                lower.iter().zip(upper).map(|(&l, &u)| [l, u]).collect()
            }
        };
        if bounds.iter().any(|[l, u]| !l.is_finite() || !u.is_finite() || l > u) {
            return Err(Error::Parameter("parameter bounds must be finite with lower <= upper".into()));
        }
        if problem.budget == 0 {
            return Err(Error::Parameter("evaluation budget must be positive".into()));
        }
        let needs_spectrum = matches!(problem.objective, Objective::InfiniteVolume | Objective::F1 | Objective::MinF2);
        let spectral = if needs_spectrum {
            let probe = LtiSystem::new(problem.a.clone(), DMatrix::from_element(n, 1, 1.0))?;
            Some(spectral_decompose(&probe, None)?)
        } else {
            None
        };
        Ok(Self { problem, spectral, bounds })
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    /// Input vector for parameters `theta`.
    pub fn input(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.problem.a.nrows();
        match &self.problem.param {
            Parameterization::UnitAngles { .. } => {
                let mut b = vec![0.0; n];
                let mut prod = 1.0;
                for (k, &t) in theta.iter().enumerate() {
                    b[k] = prod * t.cos();
                    prod *= t.sin();
                }
                b[n - 1] = prod;
                b
            }
            Parameterization::BoxEntries { indices, base, .. } => {
                let mut b = base.clone().unwrap_or_else(|| vec![0.0; n]);
                for (&i, &t) in indices.iter().zip(theta) {
                    b[i] = t;
                }
                b
            }
        }
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        let b = self.input(theta);
        let bm = DMatrix::from_column_slice(b.len(), 1, &b);
        let sys = || LtiSystem::new(self.problem.a.clone(), bm.clone());
        let spectral = || self.spectral.as_ref().expect("spectrum computed for spectral objectives");
        let value = match self.problem.objective {
            Objective::InfiniteVolume => analytic_volume_for(spectral(), &bm)?,
            Objective::FiniteVolume { horizon, delta } => finite_time_volume(&RegionSpec::broad(sys()?, horizon, delta)?)?,
            Objective::F1 => shape_factors(spectral(), &bm)?.f1,
            Objective::MinF2 => shape_factors(spectral(), &bm)?.f2.iter().cloned().fold(f64::INFINITY, f64::min),
            Objective::GramianDet { horizon } => gramian_report(&sys()?, horizon)?.det,
            Objective::GramianLambdaMin { horizon } => gramian_report(&sys()?, horizon)?.lambda_min,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::InvalidInput(format!("objective is not finite at theta = {theta:?}")))
        }
    }
}

fn gramian_report(sys: &LtiSystem, horizon: Option<f64>) -> Result<crate::gramian::GramianReport> {
    match horizon {
        Some(t) => gramian_finite(sys, t),
        None => gramian_infinite(sys),
    }
}

/// Maximizes the objective by Nelder-Mead simplex search restarted from
/// `2p + 1` Latin-hypercube points (`p` parameters), all drawn from `seed`.
/// Parameters are clamped to their bounds; among equal values the
/// lexicographically smaller `theta` wins.
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    let compiled = CompiledProblem::new(problem.clone())?;
    let bounds = compiled.bounds().to_vec();
    let p = bounds.len();
    let starts = latin_hypercube(&bounds, 2 * p + 1, problem.seed);

    let mut search = Search { compiled: &compiled, bounds: &bounds, budget: problem.budget, trace: Vec::new(), best: None };
    let initial: Vec<&Vec<f64>> = starts.iter().take(problem.budget).collect();
    let values: Vec<Option<f64>> = initial.par_iter().map(|t| compiled.evaluate(t).ok()).collect();
    for (t, v) in initial.iter().zip(&values) {
        search.record(t, *v);
    }
    if search.best.is_none() {
        return Err(Error::InfeasibleStart(format!(
            "objective failed at all {} starting points",
            initial.len()
        )));
    }

    let mut feasible: Vec<(Vec<f64>, f64)> = initial
        .iter()
        .zip(&values)
        .filter_map(|(t, v)| v.map(|v| ((*t).clone(), v)))
        .collect();
    feasible.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| lex_cmp(&a.0, &b.0)));
    for (k, (start, value)) in feasible.iter().enumerate() {
        let remaining = search.budget.saturating_sub(search.trace.len());
        if remaining == 0 {
            break;
        }
        let share = remaining / (feasible.len() - k);
        search.nelder_mead(start, *value, share.max(1));
    }

    let (theta, _) = search.best.clone().expect("best point recorded");
    let value = compiled.evaluate(&theta)?;
    Ok(OptimizationResult { b: compiled.input(&theta), theta, value, evals: search.trace.len(), trace: search.trace })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// One point per stratum in each coordinate, strata shuffled independently.
fn latin_hypercube(bounds: &[[f64; 2]], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![Vec::with_capacity(bounds.len()); count];
    for &[lo, hi] in bounds {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(&mut rng);
        for (point, s) in points.iter_mut().zip(strata) {
            let u: f64 = rng.random();
            point.push(lo + (hi - lo) * (s as f64 + u) / count as f64);
        }
    }
    points
}

struct Search<'a> {
    compiled: &'a CompiledProblem,
    bounds: &'a [[f64; 2]],
    budget: usize,
    trace: Vec<Evaluation>,
    best: Option<(Vec<f64>, f64)>,
}

impl Search<'_> {
    fn record(&mut self, theta: &[f64], value: Option<f64>) {
        self.trace.push(Evaluation { theta: theta.to_vec(), value });
        if let Some(v) = value {
            let better = match &self.best {
                None => true,
                Some((bt, bv)) => v > *bv || (v == *bv && lex_cmp(theta, bt).is_lt()),
            };
            if better {
                self.best = Some((theta.to_vec(), v));
            }
        }
    }

    /// Cost to minimize (negated objective); failures cost `+inf`.
    fn cost(&mut self, theta: &[f64]) -> Option<f64> {
        if self.trace.len() >= self.budget {
            return None;
        }
        let value = self.compiled.evaluate(theta).ok();
        self.record(theta, value);
        Some(value.map_or(f64::INFINITY, |v| -v))
    }

    fn clamp(&self, x: DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().zip(self.bounds).map(|(&v, [lo, hi])| v.clamp(*lo, *hi)))
    }

    fn nelder_mead(&mut self, start: &[f64], start_value: f64, budget: usize) {
        let p = start.len();
        let stop_at = (self.trace.len() + budget).min(self.budget);
        let widths: Vec<f64> = self.bounds.iter().map(|[lo, hi]| hi - lo).collect();
        let xtol = 1e-10 * widths.iter().cloned().fold(0.0, f64::max).max(1e-300);

        let x0 = DVector::from_column_slice(start);
        let mut simplex = vec![(x0.clone(), -start_value)];
        for i in 0..p {
            let mut x = x0.clone();
            let step = 0.1 * widths[i];
            x[i] = if x[i] + step <= self.bounds[i][1] { x[i] + step } else { x[i] - step };
            let Some(c) = self.bounded_cost(&x, stop_at) else { return };
            simplex.push((x, c));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let diameter = simplex[1..].iter().map(|(x, _)| (x - &simplex[0].0).amax()).fold(0.0, f64::max);
            if diameter <= xtol {
                return;
            }
            let centroid = simplex[..p].iter().fold(DVector::zeros(p), |acc, (x, _)| acc + x) / p as f64;
            let (worst, worst_cost) = simplex[p].clone();

            let reflected = self.clamp(&centroid + (&centroid - &worst));
            let Some(fr) = self.bounded_cost(&reflected, stop_at) else { return };
            if fr < simplex[0].1 {
                let expanded = self.clamp(&centroid + (&centroid - &worst) * 2.0);
                let Some(fe) = self.bounded_cost(&expanded, stop_at) else { return };
                simplex[p] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[p - 1].1 {
                simplex[p] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst_cost {
                let x = self.clamp(&centroid + (&reflected - &centroid) * 0.5);
                let Some(f) = self.bounded_cost(&x, stop_at) else { return };
                (x, f)
            } else {
                let x = self.clamp(&centroid + (&worst - &centroid) * 0.5);
                let Some(f) = self.bounded_cost(&x, stop_at) else { return };
                (x, f)
            };
            if fc < worst_cost.min(fr) {
                simplex[p] = (contracted, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = &best + (&vertex.0 - &best) * 0.5;
                let Some(f) = self.bounded_cost(&x, stop_at) else { return };
                *vertex = (x, f);
            }
        }
    }

    fn bounded_cost(&mut self, x: &DVector<f64>, stop_at: usize) -> Option<f64> {
        if self.trace.len() >= stop_at {
            return None;
        }
        self.cost(x.as_slice())
    }
}
