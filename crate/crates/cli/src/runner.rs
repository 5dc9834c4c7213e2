//! Plan execution: runs every entry, writes per-run trace and figure files,
//! a summary (text and CSV) and a condition-report file.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use gimvi::{
    check_continuous_conditions, check_discrete_conditions, check_existence_uniqueness,
    estimate_coupled_monotone, estimate_moduli_empirical, find_epsilon, fit_exponential_rate,
    fit_linear_rate, integrate, solve_inertial, solve_projection, IntegrationConfig, ParamSchedule,
    SampleBox, StopReason, TrajectoryTrace,
};

use crate::plan::{RunPlan, RunSpec, SolverChoice};
use crate::report;
use crate::CliError;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub label: String,
    pub solver: String,
    /// Damping parameter; absent for the projection baseline.
    pub kappa: Option<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub final_error: Option<f64>,
    pub final_residual: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub stop_reason: String,
    pub aborted: bool,
    /// Reported on stdout only; never written into output files so repeat
    /// runs stay byte-identical.
    pub wall: Duration,
    pub note: Option<String>,
}

#[derive(Debug)]
pub struct ExperimentSummary {
    pub outcomes: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

impl ExperimentSummary {
    pub fn any_aborted(&self) -> bool {
        self.outcomes.iter().any(|o| o.aborted)
    }
}

/// Executes one run against the plan's problem.
pub fn execute_run(
    plan: &RunPlan,
    run: &RunSpec,
) -> Result<(RunOutcome, TrajectoryTrace), CliError> {
    let p = &plan.problem;
    let started = Instant::now();
    let mut trace = match run.solver {
        SolverChoice::Inertial => solve_inertial(p, &run.solver_config(), &run.w0, &run.w1)?,
        SolverChoice::Projection => solve_projection(p, &run.solver_config(), &run.w0)?,
        SolverChoice::Continuous => {
            let kappa = ParamSchedule::constant(run.kappa)?;
            let rho = ParamSchedule::constant(run.rho)?;
            let cfg = IntegrationConfig {
                step: run.h,
                t_end: run.t_end,
                method: run.method,
                sample_every: run.sample_every,
            };
            integrate(p, &kappa, &rho, &run.w0, &run.w1, &cfg)?
        }
    };
    let wall = started.elapsed();
    trace.metadata.problem = "plan-problem".to_string();

    let mut note = None;
    let fitted_rate = match (&p.known_solution, run.solver) {
        (Some(ws), SolverChoice::Continuous) => match fit_exponential_rate(&trace, ws) {
            Ok(fit) => Some(fit.rate),
            Err(e) => {
                note = Some(format!("rate fit skipped: {e}"));
                None
            }
        },
        (Some(ws), _) => match fit_linear_rate(&trace, ws) {
            Ok(fit) => Some(fit.rate),
            Err(e) => {
                note = Some(format!("rate fit skipped: {e}"));
                None
            }
        },
        (None, _) => None,
    };

    let aborted = matches!(
        trace.metadata.stop_reason,
        StopReason::NonFinite { .. } | StopReason::Diverged { .. }
    );
    let outcome = RunOutcome {
        label: run.label.clone(),
        solver: run.solver.name().to_string(),
        kappa: match run.solver {
            SolverChoice::Projection => None,
            _ => Some(run.kappa),
        },
        rho: run.rho,
        iterations: trace.rows.last().map_or(0, |r| r.index),
        final_error: trace.final_error(),
        final_residual: trace.final_residual(),
        fitted_rate,
        stop_reason: trace.metadata.stop_reason.to_string(),
        aborted,
        wall,
        note,
    };
    Ok((outcome, trace))
}

/// Condition-report text for the plan: derived constants, solvability,
/// per-run sufficient conditions and seeded empirical moduli estimates.
pub fn conditions_text(plan: &RunPlan) -> String {
    let mut out = String::new();
    let p = &plan.problem;

    match p.constants() {
        Ok(c) => {
            out.push_str(&report::format_constants(&c));
            out.push('\n');
            out.push_str(&report::format_condition_report(
                &check_existence_uniqueness(&c),
            ));
            out.push('\n');
            for run in &plan.runs {
                match run.solver {
                    SolverChoice::Continuous => {
                        let grid: Vec<f64> =
                            (0..=100).map(|i| i as f64 * run.t_end / 100.0).collect();
                        let kappa = vec![run.kappa; grid.len()];
                        let rho = vec![run.rho; grid.len()];
                        match check_continuous_conditions(&grid, &kappa, &rho, &c, run.kappa) {
                            Ok(r) => {
                                out.push_str(&format!("run `{}`:\n", run.label));
                                out.push_str(&report::format_condition_report(&r));
                            }
                            Err(e) => {
                                out.push_str(&format!("run `{}`: check failed: {e}\n", run.label));
                            }
                        }
                    }
                    _ => {
                        let r = check_discrete_conditions(run.kappa, run.rho, &c);
                        out.push_str(&format!("run `{}`:\n", run.label));
                        out.push_str(&report::format_condition_report(&r));
                        if r.satisfied {
                            match find_epsilon(run.kappa, run.rho, &c, 1e-4) {
                                Ok(eps) => {
                                    out.push_str(&format!("   amplification factor eps = {eps}\n"))
                                }
                                Err(e) => out.push_str(&format!("   no eps found: {e}\n")),
                            }
                        }
                    }
                }
                out.push('\n');
            }
        }
        Err(e) => {
            out.push_str(&format!("constants unavailable: {e}\n\n"));
        }
    }

    let sampler = SampleBox::centered(p.dimension, 10.0, plan.seed);
    out.push_str("empirical moduli (sampled):\n");
    match estimate_moduli_empirical(&p.t, &sampler, 200) {
        Ok(m) => {
            out.push_str(&format!(
                "   t: lipschitz >= {}, strong_monotone <= {}\n",
                m.lipschitz, m.strong_monotone
            ));
        }
        Err(e) => out.push_str(&format!("   t: estimate failed: {e}\n")),
    }
    match estimate_moduli_empirical(&p.g, &sampler, 200) {
        Ok(m) => {
            out.push_str(&format!(
                "   g: lipschitz >= {}, strong_monotone <= {}\n",
                m.lipschitz, m.strong_monotone
            ));
        }
        Err(e) => out.push_str(&format!("   g: estimate failed: {e}\n")),
    }
    match estimate_coupled_monotone(&p.t, &p.g, &sampler, 200) {
        Ok(alpha) => out.push_str(&format!("   (t, g): coupled_monotone <= {alpha}\n")),
        Err(e) => out.push_str(&format!("   (t, g): estimate failed: {e}\n")),
    }
    out
}

/// Runs every entry of the plan and writes all output files into the plan's
/// output directory. Individual aborted runs are recorded in the summary,
/// not raised as errors; the caller decides the exit status via
/// [`ExperimentSummary::any_aborted`].
pub fn run_experiment(plan: &RunPlan) -> Result<ExperimentSummary, CliError> {
    fs::create_dir_all(&plan.output_dir)?;
    let mut outcomes = Vec::with_capacity(plan.runs.len());
    let mut files = Vec::new();

    for run in &plan.runs {
        let (outcome, trace) = execute_run(plan, run)?;

        let trace_path = plan.output_dir.join(format!("{}.csv", run.label));
        fs::write(&trace_path, trace.to_csv_string())?;
        files.push(trace_path);

        if trace.rows.iter().any(|r| r.error.is_some()) {
            let path = plan
                .output_dir
                .join(format!("{}_log10_error.csv", run.label));
            fs::write(&path, report::log10_error_series(&trace))?;
            files.push(path);
        }
        if run.solver == SolverChoice::Continuous && trace.rows.iter().any(|r| r.xi.is_some()) {
            let path = plan.output_dir.join(format!("{}_log10_xi.csv", run.label));
            fs::write(&path, report::log10_xi_series(&trace))?;
            files.push(path);
        }
        outcomes.push(outcome);
    }

    let summary_txt = plan.output_dir.join("summary.txt");
    fs::write(&summary_txt, report::summary_text(&outcomes))?;
    files.push(summary_txt);

    let summary_csv = plan.output_dir.join("summary.csv");
    fs::write(&summary_csv, report::summary_csv(&outcomes))?;
    files.push(summary_csv);

    let conditions = plan.output_dir.join("conditions.txt");
    fs::write(&conditions, conditions_text(plan))?;
    files.push(conditions);

    Ok(ExperimentSummary { outcomes, files })
}
