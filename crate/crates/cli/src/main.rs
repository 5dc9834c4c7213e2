use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gimvi::config::ProblemConfig;
use gimvi::{ErrorMetric, IntegrationMethod, ProblemSpec};
use gimvi_cli::{
    bundled_bench_plan, conditions_text, parse_plan, parse_problem, run_experiment, CliError,
    ExperimentSummary, RunPlan, RunSpec, SolverChoice,
};

#[derive(Parser)]
#[command(
    name = "gimvi",
    version,
    about = "Inverse mixed variational inequalities: condition checks, projection solvers and damped dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Problem or plan file (TOML); defaults to the bundled scalar benchmark
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output directory for traces, summaries and reports
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the sufficient-condition bundles for a problem (and
    /// optionally one parameter pair)
    Check {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Damping parameter to check the discrete conditions at
        #[arg(long)]
        kappa: Option<f64>,
        /// Step size to check the discrete conditions at
        #[arg(long)]
        rho: Option<f64>,
        /// Seed for the sampled moduli estimates
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the discrete iteration (inertial with --kappa, projection without)
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Damping parameter; omit to run the plain projection iteration
        #[arg(long)]
        kappa: Option<f64>,
        /// Step size
        #[arg(long)]
        rho: f64,
        /// Iteration budget
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Stop once the residual norm falls below this
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Error metric: norm | norm-squared
        #[arg(long, default_value = "norm")]
        metric: String,
        /// Record every k-th iteration
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Initial iterate (comma-separated; scalar broadcasts)
        #[arg(long, value_delimiter = ',')]
        w0: Option<Vec<f64>>,
        /// Second initial iterate for the inertial scheme (defaults to w0)
        #[arg(long, value_delimiter = ',')]
        w1: Option<Vec<f64>>,
    },
    /// Integrate the damped second-order dynamics
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Constant damping schedule value
        #[arg(long)]
        kappa: f64,
        /// Constant step-size schedule value
        #[arg(long)]
        rho: f64,
        /// Integration step
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Horizon
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Integrator: rk4 | euler
        #[arg(long, default_value = "rk4")]
        method: String,
        /// Record every k-th step
        #[arg(long, default_value_t = 10)]
        sample_every: usize,
        /// Initial position (comma-separated; scalar broadcasts)
        #[arg(long, value_delimiter = ',')]
        w0: Option<Vec<f64>>,
        /// Initial velocity (defaults to rest)
        #[arg(long, value_delimiter = ',')]
        w1: Option<Vec<f64>>,
    },
    /// Run the bundled benchmark plan (or a plan file) and reproduce its
    /// summary tables
    Bench {
        /// Plan file; defaults to the bundled table-reproduction plan
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the plan's output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the plan's seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid of inertial runs over kappa and rho values
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Damping values (comma-separated)
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<f64>,
        /// Step sizes (comma-separated)
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        /// Iteration budget per run
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Seed recorded into the condition report
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_problem(args: &ProblemArgs) -> Result<(ProblemSpec, ProblemConfig), CliError> {
    match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let problem = parse_problem(&text)?;
            let config = ProblemConfig::from_problem(&problem).map_err(CliError::Core)?;
            Ok((problem, config))
        }
        None => {
            let problem = gimvi::registry::halfline_1d();
            let config = ProblemConfig::from_problem(&problem).map_err(CliError::Core)?;
            Ok((problem, config))
        }
    }
}

fn parse_metric(name: &str) -> Result<ErrorMetric, CliError> {
    match name {
        "norm" => Ok(ErrorMetric::Norm),
        "norm-squared" => Ok(ErrorMetric::NormSquared),
        other => Err(CliError::Config(format!(
            "unknown metric `{other}` (expected norm | norm-squared)"
        ))),
    }
}

fn parse_method(name: &str) -> Result<IntegrationMethod, CliError> {
    match name {
        "rk4" => Ok(IntegrationMethod::RungeKutta4),
        "euler" => Ok(IntegrationMethod::Euler),
        other => Err(CliError::Config(format!(
            "unknown method `{other}` (expected rk4 | euler)"
        ))),
    }
}

fn broadcast(values: Option<Vec<f64>>, fallback: f64, d: usize) -> Result<Vec<f64>, CliError> {
    match values {
        None => Ok(vec![fallback; d]),
        Some(v) if v.len() == d => Ok(v),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; d]),
        Some(v) => Err(CliError::Config(format!(
            "initial point has {} entries, problem dimension is {d}",
            v.len()
        ))),
    }
}

fn report_summary(summary: &ExperimentSummary) {
    print!("{}", gimvi_cli::report::summary_text(&summary.outcomes));
    for o in &summary.outcomes {
        println!(
            "run `{}`: {} iterations in {:.1} ms{}",
            o.label,
            o.iterations,
            o.wall.as_secs_f64() * 1e3,
            o.note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
    }
    println!("wrote {} files", summary.files.len());
}

fn run_single(plan: RunPlan) -> Result<ExitCode, CliError> {
    let summary = run_experiment(&plan)?;
    report_summary(&summary);
    Ok(if summary.any_aborted() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Check {
            problem,
            kappa,
            rho,
            seed,
        } => {
            let (problem, problem_config) = load_problem(&problem)?;
            let runs = match (kappa, rho) {
                (Some(k), Some(r)) => vec![RunSpec {
                    label: format!("check-k{k}-r{r}"),
                    solver: SolverChoice::Inertial,
                    kappa: k,
                    rho: r,
                    max_iters: 1,
                    tol: 0.0,
                    record_every: 1,
                    metric: ErrorMetric::Norm,
                    w0: vec![0.0; problem.dimension],
                    w1: vec![0.0; problem.dimension],
                    h: 1e-3,
                    t_end: 1.0,
                    sample_every: 1,
                    method: IntegrationMethod::RungeKutta4,
                }],
                (None, None) => Vec::new(),
                _ => {
                    return Err(CliError::Config(
                        "--kappa and --rho must be given together".to_string(),
                    ))
                }
            };
            let plan = RunPlan {
                problem,
                problem_config,
                runs,
                output_dir: PathBuf::from("."),
                seed,
            };
            print!("{}", conditions_text(&plan));
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            problem,
            output,
            kappa,
            rho,
            iters,
            tol,
            metric,
            record_every,
            w0,
            w1,
        } => {
            let (problem, problem_config) = load_problem(&problem)?;
            let d = problem.dimension;
            let solver = if kappa.is_some() {
                SolverChoice::Inertial
            } else {
                SolverChoice::Projection
            };
            let kappa = kappa.unwrap_or(1.0);
            let w0 = broadcast(w0, 100.0, d)?;
            let w1 = match w1 {
                None => w0.clone(),
                some => broadcast(some, 100.0, d)?,
            };
            let run = RunSpec {
                label: format!("{}-k{kappa}-r{rho}", solver.name()),
                solver,
                kappa,
                rho,
                max_iters: iters,
                tol,
                record_every,
                metric: parse_metric(&metric)?,
                w0,
                w1,
                h: 1e-3,
                t_end: 1.0,
                sample_every: 1,
                method: IntegrationMethod::RungeKutta4,
            };
            run.solver_config()
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            run_single(RunPlan {
                problem,
                problem_config,
                runs: vec![run],
                output_dir: output.out,
                seed: 0,
            })
        }
        Command::Simulate {
            problem,
            output,
            kappa,
            rho,
            h,
            t_end,
            method,
            sample_every,
            w0,
            w1,
        } => {
            let (problem, problem_config) = load_problem(&problem)?;
            let d = problem.dimension;
            let run = RunSpec {
                label: format!("continuous-k{kappa}-r{rho}"),
                solver: SolverChoice::Continuous,
                kappa,
                rho,
                max_iters: 1,
                tol: 0.0,
                record_every: 1,
                metric: ErrorMetric::Norm,
                w0: broadcast(w0, 100.0, d)?,
                w1: broadcast(w1, 0.0, d)?,
                h,
                t_end,
                sample_every,
                method: parse_method(&method)?,
            };
            if run.h <= 0.0
                || run.h.is_nan()
                || run.t_end <= 0.0
                || run.t_end.is_nan()
                || run.sample_every == 0
            {
                return Err(CliError::Config(
                    "simulate needs h > 0, t-end > 0, sample-every >= 1".to_string(),
                ));
            }
            run_single(RunPlan {
                problem,
                problem_config,
                runs: vec![run],
                output_dir: output.out,
                seed: 0,
            })
        }
        Command::Bench { config, out, seed } => {
            let mut plan = match config {
                None => bundled_bench_plan(),
                Some(path) => parse_plan(&fs::read_to_string(path)?)?,
            };
            if let Some(out) = out {
                plan.output_dir = out;
            }
            if let Some(seed) = seed {
                plan.seed = seed;
            }
            let summary = run_experiment(&plan)?;
            report_summary(&summary);
            Ok(if summary.any_aborted() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Sweep {
            problem,
            output,
            kappa,
            rho,
            iters,
            seed,
        } => {
            let (problem, problem_config) = load_problem(&problem)?;
            let d = problem.dimension;
            let mut runs = Vec::new();
            for &k in &kappa {
                for &r in &rho {
                    runs.push(RunSpec {
                        label: format!("sweep-k{k}-r{r}"),
                        solver: SolverChoice::Inertial,
                        kappa: k,
                        rho: r,
                        max_iters: iters,
                        tol: 0.0,
                        record_every: 1,
                        metric: ErrorMetric::Norm,
                        w0: vec![100.0; d],
                        w1: vec![100.0; d],
                        h: 1e-3,
                        t_end: 1.0,
                        sample_every: 1,
                        method: IntegrationMethod::RungeKutta4,
                    });
                }
            }
            if runs.is_empty() {
                return Err(CliError::Config(
                    "sweep needs kappa and rho values".to_string(),
                ));
            }
            run_single(RunPlan {
                problem,
                problem_config,
                runs,
                output_dir: output.out,
                seed,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
