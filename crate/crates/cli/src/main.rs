mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctlab::gramian::{gramian_finite, gramian_infinite};
use ctlab::io::{load_system, SystemInput};
use ctlab::lti::{controllability_matrix, LtiSystem};
use ctlab::optimizer::{optimize, OptimizationProblem};
use ctlab::region::{
    analytic_volume_for, boundary_point, compare, default_direction_count, finite_time_region, min_time_with,
    sample_directions, shape_factors, verify_theorem1, Horizon, MinTimeOptions, RegionSpec, Rule, Variant,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{emit, to_json, write_csv};

/// Control ability of linear systems through their controllability regions.
#[derive(Parser, Debug)]
#[command(name = "ctlab", version)]
struct Cli {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum, controllability and the available volume measures.
    Analyze(SystemArg),
    /// Region volume, closed form or from the sampled zonotope.
    Volume(VolumeArgs),
    /// Shape factors F1, F2, F3 of the infinite-horizon region.
    Factors(SystemArg),
    /// Boundary points by support direction, with optional SVG and CSV.
    Boundary(BoundaryArgs),
    /// Compare two systems through their support functions.
    Compare(CompareArgs),
    /// Minimum transfer time to a state.
    Mintime(MinTimeArgs),
    /// Controllability Gramian and its scalar measures.
    Gramian(GramianArgs),
    /// Maximize a measure over the input vector.
    Optimize(OptimizeArgs),
    /// Check that a larger region never slows down time-optimal transfer.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1(TheoremArgs),
}

#[derive(Args, Debug)]
struct SystemArg {
    /// System JSON: {"A": [[..]], "B": [[..]], "jordan_blocks": [[l, m], ..]}.
    #[arg(long)]
    system: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Finite,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Broad,
    Reachability,
    Narrow,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Broad => Variant::Broad,
            VariantArg::Reachability => Variant::Reachability,
            VariantArg::Narrow => Variant::NarrowControllability,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Rectangle,
    Trapezoid,
}

#[derive(Args, Debug)]
struct VolumeArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_enum, default_value = "analytic")]
    mode: Mode,
    /// Horizon, required for the finite mode.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Sampling period; defaults to min(0.01, T/1000).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value = "rectangle")]
    rule: RuleArg,
    #[arg(long, value_enum, default_value = "broad")]
    variant: VariantArg,
}

#[derive(Args, Debug)]
struct BoundaryArgs {
    #[arg(long)]
    system: PathBuf,
    /// Comma-separated horizons; `inf` for the infinite horizon.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    horizons: Vec<f64>,
    /// Number of support directions (default 64 in the plane, 256 otherwise).
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long, value_enum, default_value = "broad")]
    variant: VariantArg,
    /// SVG plot of the boundary polygons (planar systems only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// CSV of boundary points; defaults to the SVG path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    system1: PathBuf,
    #[arg(long)]
    system2: PathBuf,
    /// Horizon; `inf` for the infinite horizon.
    #[arg(long = "T", default_value = "inf")]
    horizon: f64,
    #[arg(long)]
    directions: Option<usize>,
}

#[derive(Args, Debug)]
struct MinTimeArgs {
    #[arg(long)]
    system: PathBuf,
    /// Comma-separated target state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x0: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Sampling period of the membership regions; defaults to tol/10.
    #[arg(long)]
    delta: Option<f64>,
    /// Horizon limit for systems that are not asymptotically stable.
    #[arg(long)]
    max_horizon: Option<f64>,
}

#[derive(Args, Debug)]
struct GramianArgs {
    #[arg(long)]
    system: PathBuf,
    /// Finite horizon; the infinite-horizon Gramian when omitted.
    #[arg(long = "T")]
    horizon: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Problem JSON: {"A", "param", "objective", "budget", "seed"}.
    #[arg(long)]
    problem: PathBuf,
    /// Overrides the problem's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the problem's evaluation budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Include every evaluation in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct TheoremArgs {
    #[arg(long)]
    system1: PathBuf,
    #[arg(long)]
    system2: PathBuf,
    #[arg(long = "T")]
    horizon: f64,
    /// Boundary states of system 1 to test.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 5e-3)]
    tol: f64,
}

#[derive(Debug)]
enum CliError {
    Core(ctlab::Error),
    Usage(String),
    Output(String),
}

impl From<ctlab::Error> for CliError {
    fn from(e: ctlab::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ctlab::Error::*;
        match self {
            CliError::Core(InvalidInput(_) | Dimension(_) | Parameter(_)) | CliError::Usage(_) => 2,
            CliError::Core(UnsupportedSpectrum(_) | Divergence(_) | RouteToJordan(_)) => 3,
            CliError::Core(_) | CliError::Output(_) => 1,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Core(e) => (e.kind(), e.to_string()),
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Output(m) => ("output", m.clone()),
        };
        json!({"error": kind, "message": message})
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim().to_string())),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}

fn run(cli: &Cli) -> CliResult<()> {
    let report = match &cli.command {
        Command::Analyze(a) => analyze(&load(&a.system)?)?,
        Command::Volume(a) => volume(a)?,
        Command::Factors(a) => factors(&load(&a.system)?)?,
        Command::Boundary(a) => boundary(a)?,
        Command::Compare(a) => compare_cmd(a)?,
        Command::Mintime(a) => mintime(a)?,
        Command::Gramian(a) => gramian(a)?,
        Command::Optimize(a) => optimize_cmd(a)?,
        Command::VerifyTheorem1(a) => theorem(a)?,
    };
    let text = to_json(&report).map_err(|e| CliError::Output(e.to_string()))?;
    emit(&text, cli.out.as_deref()).map_err(|e| CliError::Output(format!("cannot write report: {e}")))
}

fn load(path: &Path) -> CliResult<SystemInput> {
    Ok(load_system(path)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && !v.is_nan() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn horizon_of(t: f64) -> CliResult<Horizon> {
    if t == f64::INFINITY {
        Ok(Horizon::Infinite)
    } else {
        positive("T", t).map(Horizon::Finite)
    }
}

/// The pair integrated for a region variant, keeping declared Jordan blocks
/// only when the dynamics are not reversed.
fn variant_input(input: &SystemInput, variant: Variant) -> SystemInput {
    match variant {
        Variant::NarrowControllability => SystemInput { sys: input.sys.time_reversed(), blocks: None },
        _ => input.clone(),
    }
}

fn analyze(input: &SystemInput) -> CliResult<Value> {
    let sys = &input.sys;
    let cm = controllability_matrix(sys);
    let mut notes = Vec::new();
    let mut report = json!({
        "n": sys.n(),
        "r": sys.r(),
        "eigenvalues": sys.eigenvalues().iter().map(|&(re, im)| [re, im]).collect::<Vec<_>>(),
        "spectral_abscissa": sys.spectral_abscissa(),
        "hurwitz": sys.is_hurwitz(),
        "controllability_rank": cm.rank,
        "controllable": cm.is_full_rank(),
    });
    match input.spectral() {
        Ok(sd) => {
            report["structure"] = to_value(&sd.structure);
            report["jordan_blocks"] = to_value(&sd.blocks);
            notes.extend(sd.warnings.iter().cloned());
            match analytic_volume_for(&sd, sys.b()) {
                Ok(v) => report["analytic_volume"] = json!(v),
                Err(e) => notes.push(format!("analytic volume: {e}")),
            }
            match shape_factors(&sd, sys.b()) {
                Ok(f) => report["shape_factors"] = to_value(&f),
                Err(e) => notes.push(format!("shape factors: {e}")),
            }
        }
        Err(e) => notes.push(format!("spectral decomposition: {e}")),
    }
    match gramian_infinite(sys) {
        Ok(g) => report["gramian"] = json!({"det": g.det, "lambda_min": g.lambda_min, "ellipsoid_volume": g.ellipsoid_volume}),
        Err(e) => notes.push(format!("Gramian: {e}")),
    }
    report["notes"] = json!(notes);
    Ok(report)
}

fn default_delta(horizon: f64) -> f64 {
    0.01f64.min(horizon / 1000.0)
}

fn volume(a: &VolumeArgs) -> CliResult<Value> {
    let variant = Variant::from(a.variant);
    match a.mode {
        Mode::Analytic => {
            let input = variant_input(&load(&a.system)?, variant);
            let sd = input.spectral()?;
            let volume = analytic_volume_for(&sd, input.sys.b())?;
            Ok(json!({
                "mode": "analytic",
                "variant": to_value(&variant),
                "structure": to_value(&sd.structure),
                "eigenvalues": sd.eigenvalues,
                "volume": volume,
            }))
        }
        Mode::Finite => {
            let horizon = positive("T", a.horizon.ok_or_else(|| CliError::Usage("--T is required with --mode finite".into()))?)?;
            if horizon.is_infinite() {
                return Err(CliError::Usage("--mode finite needs a finite --T".into()));
            }
            let delta = positive("delta", a.delta.unwrap_or_else(|| default_delta(horizon)))?;
            let sys = load(&a.system)?.sys;
            let rule = match a.rule {
                RuleArg::Rectangle => Rule::Rectangle,
                RuleArg::Trapezoid => Rule::Trapezoid,
            };
            let spec = RegionSpec::new(sys, variant, Horizon::Finite(horizon), delta)?.with_rule(rule);
            let zono = finite_time_region(&spec)?;
            let (n, r) = (spec.sys.n(), spec.sys.r());
            if zono.len() < 50 * n {
                log::warn!(
                    "only {} generators for n = {n}, r = {r}; the sampled volume may be far from converged, reduce --delta",
                    zono.len()
                );
            }
            Ok(json!({
                "mode": "finite",
                "variant": to_value(&variant),
                "rule": to_value(&rule),
                "T": horizon,
                "delta": delta,
                "generators": zono.len(),
                "volume": zono.volume_exact()?,
            }))
        }
    }
}

fn factors(input: &SystemInput) -> CliResult<Value> {
    let sd = input.spectral()?;
    Ok(to_value(&shape_factors(&sd, input.sys.b())?))
}

fn boundary(a: &BoundaryArgs) -> CliResult<Value> {
    let sys = variant_input(&load(&a.system)?, a.variant.into()).sys;
    let n = sys.n();
    let count = a.directions.unwrap_or_else(|| default_direction_count(n));
    if count == 0 {
        return Err(CliError::Usage("--directions must be positive".into()));
    }
    if a.svg.is_some() && n != 2 {
        return Err(CliError::Usage(format!("SVG output needs a planar system, got n = {n}")));
    }
    let horizons = a.horizons.iter().map(|&t| horizon_of(t)).collect::<CliResult<Vec<_>>>()?;
    let dirs = sample_directions(n, count);

    let mut curves = Vec::new();
    for &h in &horizons {
        let mut points = Vec::with_capacity(dirs.len());
        let mut support = Vec::with_capacity(dirs.len());
        for d in &dirs {
            let bp = boundary_point(&sys, h, d)?;
            points.push(bp.point);
            support.push(bp.support);
        }
        curves.push((h, points, support));
    }

    let label = |h: Horizon| h.finite().map_or("inf".to_string(), output::format_float);
    if let Some(path) = &a.svg {
        let plot: Vec<(String, Vec<[f64; 2]>)> =
            curves.iter().map(|(h, pts, _)| (format!("T={}", label(*h)), pts.iter().map(|p| [p[0], p[1]]).collect())).collect();
        std::fs::write(path, svg::region_plot(&plot))
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    }
    let csv_path = a.csv.clone().or_else(|| a.svg.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = &csv_path {
        let many = curves.len() > 1;
        let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        if many {
            header.insert(0, "T".into());
        }
        let mut rows = Vec::new();
        for (h, pts, _) in &curves {
            for p in pts {
                let mut row = p.clone();
                if many {
                    row.insert(0, h.finite().unwrap_or(f64::INFINITY));
                }
                rows.push(row);
            }
        }
        write_csv(path, &header, &rows).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(json!({
        "directions": dirs,
        "curves": curves.iter().map(|(h, pts, sup)| json!({
            "T": h.finite(),
            "points": pts,
            "support": sup,
        })).collect::<Vec<_>>(),
    }))
}

fn compare_cmd(a: &CompareArgs) -> CliResult<Value> {
    let s1 = load(&a.system1)?.sys;
    let s2 = load(&a.system2)?.sys;
    let count = a.directions.unwrap_or_else(|| default_direction_count(s1.n()));
    Ok(to_value(&compare(&s1, &s2, horizon_of(a.horizon)?, count)?))
}

fn mintime(a: &MinTimeArgs) -> CliResult<Value> {
    positive("tol", a.tol)?;
    if let Some(d) = a.delta {
        positive("delta", d)?;
    }
    let sys = load(&a.system)?.sys;
    let opts = MinTimeOptions { delta: a.delta, max_horizon: a.max_horizon, initial_horizon: None };
    let result = min_time_with(&sys, &a.x0, a.tol, &opts)?;
    let mut report = to_value(&result);
    report["x0"] = json!(a.x0);
    Ok(report)
}

fn gramian(a: &GramianArgs) -> CliResult<Value> {
    let sys: LtiSystem = load(&a.system)?.sys;
    let report = match a.horizon {
        Some(t) => gramian_finite(&sys, positive("T", t)?)?,
        None => gramian_infinite(&sys)?,
    };
    Ok(to_value(&report))
}

fn optimize_cmd(a: &OptimizeArgs) -> CliResult<Value> {
    let text = std::fs::read_to_string(&a.problem)
        .map_err(|e| ctlab::Error::InvalidInput(format!("cannot read {}: {e}", a.problem.display())))?;
    let mut problem: OptimizationProblem = serde_json::from_str(&text)
        .map_err(|e| ctlab::Error::InvalidInput(format!("malformed problem JSON: {e}")))?;
    if let Some(seed) = a.seed {
        problem.seed = seed;
    }
    if let Some(budget) = a.budget {
        problem.budget = budget;
    }
    let result = optimize(&problem)?;
    let mut report = json!({"theta": result.theta, "value": result.value, "evals": result.evals, "b": result.b});
    if a.trace {
        report["trace"] = to_value(&result.trace);
    }
    Ok(report)
}

fn theorem(a: &TheoremArgs) -> CliResult<Value> {
    positive("T", a.horizon)?;
    positive("tol", a.tol)?;
    let s1 = load(&a.system1)?.sys;
    let s2 = load(&a.system2)?.sys;
    Ok(to_value(&verify_theorem1(&s1, &s2, a.horizon, a.samples, a.tol)?))
}
