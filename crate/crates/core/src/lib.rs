//! Solvers and analysis tooling for generalized inverse mixed variational
//! inequalities: find `w*` with `T(w*)` in a closed convex set `K` and
//! `<g(w*), y - T(w*)> + f(y) - f(T(w*)) >= 0` for all `y` in `K`.
//!
//! The crate provides
//!
//! * problem definitions with verified operator moduli ([`problem`]),
//! * the generalized f-projection operator with a closed-form catalog and
//!   an independent numeric oracle ([`fprojection`]),
//! * the residual map whose zeros are exactly the solutions ([`residual`]),
//! * derived analysis constants and checkers for every sufficient-condition
//!   bundle of the underlying theory ([`constants`], [`conditions`]),
//! * a fixed-step integrator for the damped second-order dynamics with
//!   Lyapunov/energy monitoring ([`dynamics`]),
//! * the inertial projection iteration and linear-rate estimation
//!   ([`solver`]),
//! * TOML problem descriptions ([`config`]) and built-in instances
//!   ([`registry`]).

pub mod conditions;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fprojection;
mod linalg;
pub mod problem;
pub mod registry;
pub mod residual;
pub mod solver;
pub mod trace;

pub use conditions::{
    check_continuous_conditions, check_discrete_conditions, check_existence_uniqueness,
    find_epsilon, ConditionReport, SubCondition,
};
pub use constants::{derive_constants, derive_constants_with, BetaTerm, ConstantsBundle};
pub use dynamics::{
    fit_exponential_rate, integrate, lyapunov_monitor, vector_field, IntegrationConfig,
    IntegrationMethod, ParamSchedule, PhaseState,
};
pub use error::{Error, Result};
pub use fprojection::{
    check_variational_characterization, prox, prox_numeric_oracle, ProxMethod, ProxResult,
};
pub use problem::{
    apply_operator, estimate_coupled_monotone, estimate_moduli_empirical, ConvexFunctionSpec,
    DeclaredModuli, EmpiricalModuli, FeasibleSetSpec, OperatorKind, OperatorSpec, ProblemSpec,
    SampleBox,
};
pub use residual::{check_residual_estimates, is_solution, ResidualEvaluation};
pub use solver::{
    characteristic_root, difference_ops, fit_linear_rate, local_residual_slope, solve_inertial,
    solve_projection, step_inertial, ErrorMetric, LinearRateFit, RootPrediction, SolverConfig,
};
pub use trace::{StopReason, TraceAxis, TraceMetadata, TraceRow, TrajectoryTrace};
