//! Experiment plans: a problem, a list of labeled runs and an output
//! directory, expressed in the same TOML dialect as problem files.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use gimvi::config::{check_schema_version, ProblemConfig, SCHEMA_VERSION};
use gimvi::{ErrorMetric, IntegrationMethod, ProblemSpec, SolverConfig};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Inertial,
    Projection,
    Continuous,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Inertial => "inertial",
            SolverChoice::Projection => "projection",
            SolverChoice::Continuous => "continuous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MetricConfig {
    Norm,
    NormSquared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodConfig {
    Rk4,
    Euler,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    label: String,
    solver: SolverChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    record_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<MetricConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<MethodConfig>,
}

/// A plan file: `schema_version`, optional `output_dir` and `seed`, a
/// `[problem]` table and one or more `[[run]]` entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    problem: ProblemConfig,
    #[serde(default, rename = "run", skip_serializing_if = "Vec::is_empty")]
    runs: Vec<RunConfig>,
}

/// One fully resolved run.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub label: String,
    pub solver: SolverChoice,
    pub kappa: f64,
    pub rho: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub record_every: usize,
    pub metric: ErrorMetric,
    /// First initial point (discrete) or initial position (continuous).
    pub w0: Vec<f64>,
    /// Second initial point (discrete) or initial velocity (continuous).
    pub w1: Vec<f64>,
    pub h: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub method: IntegrationMethod,
}

impl RunSpec {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            kappa: self.kappa,
            rho: self.rho,
            max_iters: self.max_iters,
            tol: self.tol,
            error_metric: self.metric,
            record_every: self.record_every,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunPlan {
    pub problem: ProblemSpec,
    pub problem_config: ProblemConfig,
    pub runs: Vec<RunSpec>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn resolve_run(raw: &RunConfig, dimension: usize) -> Result<RunSpec, CliError> {
    let bad = |what: String| CliError::Config(format!("run `{}`: {what}", raw.label));
    if raw.label.trim().is_empty() {
        return Err(CliError::Config("run labels must be nonempty".to_string()));
    }
    let kappa = match (raw.solver, raw.kappa) {
        (SolverChoice::Projection, k) => k.unwrap_or(1.0),
        (_, Some(k)) => k,
        (s, None) => {
            return Err(bad(format!("solver `{}` requires `kappa`", s.name())));
        }
    };
    let broadcast = |v: &Option<Vec<f64>>, fallback: f64| -> Result<Vec<f64>, CliError> {
        match v {
            None => Ok(vec![fallback; dimension]),
            Some(values) if values.len() == dimension => Ok(values.clone()),
            Some(values) if values.len() == 1 => Ok(vec![values[0]; dimension]),
            Some(values) => Err(bad(format!(
                "initial point has {} entries, problem dimension is {dimension}",
                values.len()
            ))),
        }
    };
    let w0 = broadcast(&raw.w0, 100.0)?;
    let w1 = match raw.solver {
        // Discrete runs default the second initial point to the first;
        // continuous runs start at rest.
        SolverChoice::Continuous => broadcast(&raw.w1, 0.0)?,
        _ => match &raw.w1 {
            None => w0.clone(),
            some => broadcast(some, 100.0)?,
        },
    };
    let spec = RunSpec {
        label: raw.label.clone(),
        solver: raw.solver,
        kappa,
        rho: raw.rho,
        max_iters: raw.max_iters.unwrap_or(1000),
        tol: raw.tol.unwrap_or(0.0),
        record_every: raw.record_every.unwrap_or(1),
        metric: match raw.metric.unwrap_or(MetricConfig::Norm) {
            MetricConfig::Norm => ErrorMetric::Norm,
            MetricConfig::NormSquared => ErrorMetric::NormSquared,
        },
        w0,
        w1,
        h: raw.h.unwrap_or(1e-3),
        t_end: raw.t_end.unwrap_or(10.0),
        sample_every: raw.sample_every.unwrap_or(10),
        method: match raw.method.unwrap_or(MethodConfig::Rk4) {
            MethodConfig::Rk4 => IntegrationMethod::RungeKutta4,
            MethodConfig::Euler => IntegrationMethod::Euler,
        },
    };
    match spec.solver {
        SolverChoice::Continuous => {
            if spec.h <= 0.0
                || spec.h.is_nan()
                || spec.t_end <= 0.0
                || spec.t_end.is_nan()
                || spec.sample_every == 0
            {
                return Err(bad(
                    "continuous runs need h > 0, t_end > 0, sample_every >= 1".to_string(),
                ));
            }
        }
        _ => {
            spec.solver_config()
                .validate()
                .map_err(|e| bad(e.to_string()))?;
        }
    }
    Ok(spec)
}

fn parse_plan_file(text: &str) -> Result<PlanFile, CliError> {
    let file: PlanFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    check_schema_version(file.schema_version).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(file)
}

/// Parses and validates a plan from TOML text. Every problem invariant is
/// enforced here; diagnostics from the TOML layer carry line/column spans.
pub fn parse_plan(text: &str) -> Result<RunPlan, CliError> {
    let file = parse_plan_file(text)?;
    let problem = file
        .problem
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if file.runs.is_empty() {
        return Err(CliError::Config("plan has no [[run]] entries".to_string()));
    }
    let mut labels = HashSet::new();
    for run in &file.runs {
        if !labels.insert(run.label.clone()) {
            return Err(CliError::Config(format!(
                "duplicate run label `{}`",
                run.label
            )));
        }
    }
    let runs = file
        .runs
        .iter()
        .map(|r| resolve_run(r, problem.dimension))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunPlan {
        problem,
        problem_config: file.problem,
        runs,
        output_dir: PathBuf::from(file.output_dir.as_deref().unwrap_or("out")),
        seed: file.seed.unwrap_or(0),
    })
}

/// Parses just the problem from a plan or problem file (runs optional).
pub fn parse_problem(text: &str) -> Result<ProblemSpec, CliError> {
    let file = parse_plan_file(text)?;
    file.problem
        .build()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Emits a plan as TOML; parsing the result reproduces an equivalent plan
/// with all defaults materialized.
pub fn emit_plan(plan: &RunPlan) -> Result<String, CliError> {
    let runs = plan
        .runs
        .iter()
        .map(|r| RunConfig {
            label: r.label.clone(),
            solver: r.solver,
            kappa: Some(r.kappa),
            rho: r.rho,
            max_iters: Some(r.max_iters),
            tol: Some(r.tol),
            record_every: Some(r.record_every),
            metric: Some(match r.metric {
                ErrorMetric::Norm => MetricConfig::Norm,
                ErrorMetric::NormSquared => MetricConfig::NormSquared,
            }),
            w0: Some(r.w0.clone()),
            w1: Some(r.w1.clone()),
            h: Some(r.h),
            t_end: Some(r.t_end),
            sample_every: Some(r.sample_every),
            method: Some(match r.method {
                IntegrationMethod::RungeKutta4 => MethodConfig::Rk4,
                IntegrationMethod::Euler => MethodConfig::Euler,
            }),
        })
        .collect();
    let file = PlanFile {
        schema_version: SCHEMA_VERSION,
        output_dir: Some(plan.output_dir.display().to_string()),
        seed: Some(plan.seed),
        problem: plan.problem_config.clone(),
        runs,
    };
    toml::to_string_pretty(&file).map_err(|e| CliError::Config(e.to_string()))
}

/// The bundled benchmark plan: the scalar half-line problem with the
/// four-method grid at both step sizes.
pub fn bundled_bench_plan() -> RunPlan {
    parse_plan(include_str!("../plans/bench.toml")).expect("bundled plan parses")
}
