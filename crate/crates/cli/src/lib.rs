//! Library half of the CLI: plan parsing, experiment execution and report
//! rendering, kept separate from the binary so test suites can drive the
//! exact production code paths.

use thiserror::Error;

pub mod plan;
pub mod report;
pub mod runner;

pub use plan::{
    bundled_bench_plan, emit_plan, parse_plan, parse_problem, RunPlan, RunSpec, SolverChoice,
};
pub use runner::{conditions_text, execute_run, run_experiment, ExperimentSummary, RunOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] gimvi::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(gimvi::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}
