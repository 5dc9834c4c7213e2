//! Discrete iterations: the inertial projection scheme
//! `u_n = w_n + (1 - kappa)(w_n - w_{n-1})`, `w_{n+1} = u_n - rho A(w_n)`
//! and its non-inertial specialization `w_{n+1} = w_n - rho A(w_n)`
//! (`kappa = 1`), plus difference-operator utilities and linear-rate
//! estimation against the characteristic-root oracle.

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::ProblemSpec;
use crate::residual::residual;
use crate::trace::{
    StopReason, TraceAxis, TraceMetadata, TraceRow, TrajectoryTrace, MAX_RECORDED_DIMENSION,
};

/// Factor over the initial error beyond which a run is declared divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorMetric {
    /// `||w_n - w*||` — reproduces the reference table values.
    #[default]
    Norm,
    /// `||w_n - w*||^2`, for sensitivity analysis.
    NormSquared,
}

impl ErrorMetric {
    fn apply(self, distance: f64) -> f64 {
        match self {
            ErrorMetric::Norm => distance,
            ErrorMetric::NormSquared => distance * distance,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorMetric::Norm => "norm",
            ErrorMetric::NormSquared => "norm-squared",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub kappa: f64,
    pub rho: f64,
    /// Number of steps taken after the starting iterate; the trace holds
    /// rows 0..=max_iters unless stopped early.
    pub max_iters: usize,
    /// Stop once `||A(w_n)|| <= tol`.
    pub tol: f64,
    pub error_metric: ErrorMetric,
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(kappa: f64, rho: f64) -> Self {
        SolverConfig {
            kappa,
            rho,
            max_iters: 1000,
            tol: 0.0,
            error_metric: ErrorMetric::Norm,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() {
            return Err(Error::invalid_parameter("kappa", "must be finite"));
        }
        if !self.rho.is_finite() {
            return Err(Error::invalid_parameter("rho", "must be finite"));
        }
        if self.max_iters < 1 {
            return Err(Error::invalid_parameter("max_iters", "must be >= 1"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::invalid_parameter("tol", "must be >= 0"));
        }
        if self.record_every < 1 {
            return Err(Error::invalid_parameter("record_every", "must be >= 1"));
        }
        Ok(())
    }
}

/// One inertial step. The residual is evaluated at `w_n`, not at the
/// extrapolated point.
#[derive(Clone, Debug)]
pub struct InertialStep {
    pub extrapolated: Vec<f64>,
    pub next: Vec<f64>,
}

pub fn step_inertial(
    p: &ProblemSpec,
    kappa: f64,
    rho: f64,
    w_n: &[f64],
    w_prev: &[f64],
) -> Result<InertialStep> {
    if w_n.len() != w_prev.len() {
        return Err(Error::DimensionMismatch {
            expected: w_n.len(),
            actual: w_prev.len(),
        });
    }
    let res = residual(p, w_n)?;
    let extrapolated: Vec<f64> = w_n
        .iter()
        .zip(w_prev)
        .map(|(c, pv)| c + (1.0 - kappa) * (c - pv))
        .collect();
    let next = linalg::add_scaled(&extrapolated, -rho, &res.value);
    Ok(InertialStep { extrapolated, next })
}

fn run_iteration(
    p: &ProblemSpec,
    cfg: &SolverConfig,
    solver_name: &str,
    inertial: bool,
    start: Vec<f64>,
    predecessor: Vec<f64>,
) -> Result<TrajectoryTrace> {
    cfg.validate()?;
    if start.len() != p.dimension || predecessor.len() != p.dimension {
        return Err(Error::DimensionMismatch {
            expected: p.dimension,
            actual: if start.len() != p.dimension {
                start.len()
            } else {
                predecessor.len()
            },
        });
    }

    let known = p.known_solution.clone();
    let keep_vectors = p.dimension <= MAX_RECORDED_DIMENSION;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut w_prev = predecessor;
    let mut w_cur = start;
    let mut n = 0usize;
    let mut initial_distance: Option<f64> = None;
    let stop_reason;

    loop {
        let res = residual(p, &w_cur)?;
        let distance = known.as_ref().map(|ws| linalg::dist(&w_cur, ws));
        if initial_distance.is_none() {
            initial_distance = distance;
        }

        let diverged = match (distance, initial_distance) {
            (Some(d), Some(d0)) if d0 > 0.0 => d > DIVERGENCE_FACTOR * d0,
            _ => {
                res.norm
                    > DIVERGENCE_FACTOR
                        * f64::max(1.0, rows.first().map_or(res.norm, |r| r.residual_norm))
            }
        };

        let mut stop = if res.norm <= cfg.tol {
            Some(StopReason::Converged)
        } else if diverged {
            Some(StopReason::Diverged { step: n })
        } else if n == cfg.max_iters {
            Some(StopReason::MaxIterations)
        } else {
            None
        };

        if stop.is_some() || n.is_multiple_of(cfg.record_every) {
            rows.push(TraceRow {
                index: n,
                t: n as f64,
                w: if keep_vectors {
                    w_cur.clone()
                } else {
                    Vec::new()
                },
                w_norm: linalg::norm(&w_cur),
                v: None,
                residual_norm: res.norm,
                error: distance.map(|d| cfg.error_metric.apply(d)),
                xi: None,
                energy: None,
            });
        }
        if let Some(reason) = stop.take() {
            stop_reason = reason;
            break;
        }

        let w_next = if inertial {
            let extrapolated: Vec<f64> = w_cur
                .iter()
                .zip(&w_prev)
                .map(|(c, pv)| c + (1.0 - cfg.kappa) * (c - pv))
                .collect();
            linalg::add_scaled(&extrapolated, -cfg.rho, &res.value)
        } else {
            linalg::add_scaled(&w_cur, -cfg.rho, &res.value)
        };
        if !linalg::all_finite(&w_next) {
            if rows.last().map(|r| r.index) != Some(n) {
                rows.push(TraceRow {
                    index: n,
                    t: n as f64,
                    w: if keep_vectors {
                        w_cur.clone()
                    } else {
                        Vec::new()
                    },
                    w_norm: linalg::norm(&w_cur),
                    v: None,
                    residual_norm: res.norm,
                    error: distance.map(|d| cfg.error_metric.apply(d)),
                    xi: None,
                    energy: None,
                });
            }
            stop_reason = StopReason::NonFinite { step: n + 1 };
            break;
        }
        w_prev = std::mem::replace(&mut w_cur, w_next);
        n += 1;
    }

    let mut params = vec![
        ("rho".to_string(), format!("{}", cfg.rho)),
        ("tol".to_string(), format!("{}", cfg.tol)),
        ("metric".to_string(), cfg.error_metric.name().to_string()),
    ];
    if inertial {
        params.insert(0, ("kappa".to_string(), format!("{}", cfg.kappa)));
    }
    Ok(TrajectoryTrace {
        rows,
        metadata: TraceMetadata {
            problem: String::new(),
            solver: solver_name.to_string(),
            params,
            stop_reason,
            axis: TraceAxis::Iteration,
            dimension: p.dimension,
        },
    })
}

/// Runs the inertial iteration from the pair `(w0, w1)`.
///
/// Row 0 is `w1`; `w0` enters only through the first extrapolation. Each
/// subsequent row is one step, so row `k` holds iterate `k+1` of the usual
/// double-indexed numbering. With `kappa = 1` and `w1 = w0` the trace is
/// bit-identical to [`solve_projection`] from `w0`.
pub fn solve_inertial(
    p: &ProblemSpec,
    cfg: &SolverConfig,
    w0: &[f64],
    w1: &[f64],
) -> Result<TrajectoryTrace> {
    run_iteration(p, cfg, "inertial", true, w1.to_vec(), w0.to_vec())
}

/// Runs the non-inertial iteration `w_{n+1} = w_n - rho A(w_n)`; `cfg.kappa`
/// is ignored.
pub fn solve_projection(
    p: &ProblemSpec,
    cfg: &SolverConfig,
    w0: &[f64],
) -> Result<TrajectoryTrace> {
    run_iteration(p, cfg, "projection", false, w0.to_vec(), w0.to_vec())
}

/// Forward difference `w[n+1] - w[n]`.
pub fn forward_difference(seq: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if n + 1 >= seq.len() {
        return Err(Error::InvalidInput(format!(
            "forward difference at {n} needs {} elements",
            n + 2
        )));
    }
    Ok(linalg::sub(&seq[n + 1], &seq[n]))
}

/// Backward difference `w[n] - w[n-1]`.
pub fn backward_difference(seq: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if n == 0 || n >= seq.len() {
        return Err(Error::InvalidInput(format!(
            "backward difference at {n} needs indices {}..{}",
            1,
            seq.len()
        )));
    }
    Ok(linalg::sub(&seq[n], &seq[n - 1]))
}

/// Second difference `w[n+1] - 2 w[n] + w[n-1]`, computed as the
/// composition of the first differences so the identity
/// `second = forward - backward` holds to the bit.
pub fn second_difference(seq: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if n == 0 || n + 1 >= seq.len() {
        return Err(Error::InvalidInput(format!(
            "second difference at {n} needs interior index",
        )));
    }
    Ok(seq[n + 1]
        .iter()
        .zip(seq[n].iter().zip(&seq[n - 1]))
        .map(|(next, (cur, prev))| (next - cur) - (cur - prev))
        .collect())
}

/// All three difference sequences over the interior indices `1..len-1`;
/// entry `k` of each field corresponds to `n = k + 1`.
#[derive(Clone, Debug)]
pub struct DifferenceOps {
    pub forward: Vec<Vec<f64>>,
    pub backward: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

pub fn difference_ops(seq: &[Vec<f64>]) -> Result<DifferenceOps> {
    if seq.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "difference operators need at least 3 elements, got {}",
            seq.len()
        )));
    }
    let interior = 1..seq.len() - 1;
    Ok(DifferenceOps {
        forward: interior
            .clone()
            .map(|n| forward_difference(seq, n).unwrap())
            .collect(),
        backward: interior
            .clone()
            .map(|n| backward_difference(seq, n).unwrap())
            .collect(),
        second: interior
            .map(|n| second_difference(seq, n).unwrap())
            .collect(),
    })
}

/// Per-iteration linear-rate fit `error_n ~ C * rate^n` over the trailing
/// half of the recorded rows.
#[derive(Clone, Copy, Debug)]
pub struct LinearRateFit {
    /// `exp` of the fitted log-error slope; below 1 means contraction.
    pub rate: f64,
    pub r_squared: f64,
    /// Iteration index where the fitted tail begins.
    pub tail_start: usize,
    pub intercept: f64,
}

/// Fits the linear rate of a discrete trace. Needs at least 20 recorded
/// rows with positive error; a row with exact-zero error truncates the fit
/// to the prefix before it.
pub fn fit_linear_rate(trace: &TrajectoryTrace, w_star: &[f64]) -> Result<LinearRateFit> {
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(trace.rows.len());
    for row in &trace.rows {
        let err = if row.w.len() == w_star.len() {
            linalg::dist(&row.w, w_star)
        } else {
            row.error.ok_or_else(|| {
                Error::InvalidInput("rows carry neither state nor error".to_string())
            })?
        };
        if err == 0.0 {
            break;
        }
        points.push((row.index as f64, err.ln()));
    }
    if points.len() < 20 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 20 rows with positive error, got {}",
            points.len()
        )));
    }
    let tail = &points[points.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared) = linalg::line_fit(&xs, &ys);
    Ok(LinearRateFit {
        rate: slope.exp(),
        r_squared,
        tail_start: xs[0] as usize,
        intercept,
    })
}

/// Dominant root of `x^2 - (2 - kappa - rho*s) x + (1 - kappa)`, the local
/// recursion of the inertial scheme around a solution where the residual has
/// slope `s`. Complex roots are reported by modulus.
#[derive(Clone, Copy, Debug)]
pub struct RootPrediction {
    pub dominant_modulus: f64,
    pub real: bool,
}

pub fn characteristic_root(kappa: f64, rho: f64, local_slope: f64) -> RootPrediction {
    let b = 2.0 - kappa - rho * local_slope;
    let c = 1.0 - kappa;
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let r1 = 0.5 * (b + sq);
        let r2 = 0.5 * (b - sq);
        RootPrediction {
            dominant_modulus: r1.abs().max(r2.abs()),
            real: true,
        }
    } else {
        RootPrediction {
            dominant_modulus: c.sqrt(),
            real: false,
        }
    }
}

/// Central-difference slope of the scalar residual around `w_star`
/// (one-dimensional problems only), for the characteristic-root oracle.
pub fn local_residual_slope(p: &ProblemSpec, w_star: &[f64], probe_step: f64) -> Result<f64> {
    if p.dimension != 1 {
        return Err(Error::InvalidInput(
            "local slope probing is defined for 1-D problems".to_string(),
        ));
    }
    if probe_step <= 0.0 || !probe_step.is_finite() {
        return Err(Error::invalid_parameter(
            "probe_step",
            "must be finite and > 0",
        ));
    }
    let plus = residual(p, &[w_star[0] + probe_step])?.value[0];
    let minus = residual(p, &[w_star[0] - probe_step])?.value[0];
    Ok((plus - minus) / (2.0 * probe_step))
}
