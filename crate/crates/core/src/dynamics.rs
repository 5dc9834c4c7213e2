//! Second-order damped dynamics driven by the residual map,
//! `w'' + kappa(t) w' + rho(t) A(w) = 0`, integrated through its first-order
//! reduction on the phase `(w, w')`, plus the Lyapunov/energy monitoring
//! used to certify exponential decay.

use std::fmt;
use std::sync::Arc;

use crate::constants::ConstantsBundle;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::ProblemSpec;
use crate::residual::residual;
use crate::trace::{StopReason, TraceAxis, TraceMetadata, TraceRow, TrajectoryTrace};

/// Phase-space state of the reduced first-order system.
#[derive(Clone, Debug)]
pub struct PhaseState {
    pub t: f64,
    pub w: Vec<f64>,
    /// Velocity `w'(t)`.
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && linalg::all_finite(&self.w) && linalg::all_finite(&self.v)
    }
}

/// A nonnegative time-varying parameter.
#[derive(Clone)]
pub enum ParamSchedule {
    Constant(f64),
    /// Linear interpolation between knots; held flat outside the knot range.
    PiecewiseLinear(Vec<(f64, f64)>),
    Callback(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ParamSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSchedule::Constant(v) => write!(f, "Constant({v})"),
            ParamSchedule::PiecewiseLinear(k) => write!(f, "PiecewiseLinear({} knots)", k.len()),
            ParamSchedule::Callback(_) => write!(f, "Callback"),
        }
    }
}

impl ParamSchedule {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::invalid_parameter(
                "schedule",
                format!("constant value must be finite and >= 0, got {value}"),
            ));
        }
        Ok(ParamSchedule::Constant(value))
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid_parameter(
                "schedule",
                "needs at least one knot",
            ));
        }
        if knots
            .windows(2)
            .any(|w| w[0].0.is_nan() || w[1].0.is_nan() || w[1].0 <= w[0].0)
        {
            return Err(Error::invalid_parameter(
                "schedule",
                "knot times must be strictly increasing",
            ));
        }
        if knots
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite() || *v < 0.0)
        {
            return Err(Error::invalid_parameter(
                "schedule",
                "knot values must be finite and >= 0",
            ));
        }
        Ok(ParamSchedule::PiecewiseLinear(knots))
    }

    /// Wraps an arbitrary function; nonnegativity is enforced only when the
    /// schedule is evaluated.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ParamSchedule::Callback(Arc::new(f))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ParamSchedule::Constant(v) => *v,
            ParamSchedule::PiecewiseLinear(knots) => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                if t >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let i = knots.partition_point(|(kt, _)| *kt <= t);
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            ParamSchedule::Callback(f) => f(t),
        }
    }

    /// The constant value, when the schedule is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ParamSchedule::Constant(v) => Some(*v),
            _ => None,
        }
    }

    pub fn sample(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|t| self.value(*t)).collect()
    }
}

/// Right-hand side of the reduced system:
/// `(x, y) -> (y, -kappa(t) y - rho(t) A(x))`.
pub fn vector_field(
    p: &ProblemSpec,
    kappa: &ParamSchedule,
    rho: &ParamSchedule,
    t: f64,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (k, r) = (kappa.value(t), rho.value(t));
    if !k.is_finite() || k < 0.0 || !r.is_finite() || r < 0.0 {
        return Err(Error::invalid_parameter(
            "schedule",
            format!("values must be finite and >= 0 (kappa({t}) = {k}, rho({t}) = {r})"),
        ));
    }
    let a = residual(p, x)?.value;
    let accel: Vec<f64> = y.iter().zip(&a).map(|(yi, ai)| -k * yi - r * ai).collect();
    Ok((y.to_vec(), accel))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationMethod {
    RungeKutta4,
    Euler,
}

#[derive(Clone, Debug)]
pub struct IntegrationConfig {
    pub step: f64,
    pub t_end: f64,
    pub method: IntegrationMethod,
    /// Record every this many steps (the first and final states are always
    /// recorded).
    pub sample_every: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            step: 1e-3,
            t_end: 10.0,
            method: IntegrationMethod::RungeKutta4,
            sample_every: 10,
        }
    }
}

struct EnergyTerms {
    kappa: f64,
    n: f64,
}

/// Fixed-step integration of the damped dynamics from `w(0) = w0`,
/// `w'(0) = w1`.
///
/// Rows record time, state, velocity, residual norm and, when the problem
/// carries a known solution, the error and `xi = ||w - w*||^2 / 2`. With
/// constant schedules and derivable constants (`a > 0`) each row also
/// carries the monitored energy
/// `e^t <w - w*, w'> + (kappa - 1) e^t xi + n e^t ||w'||^2`,
/// `n = a1 kappa / (2 rho)`, using the analytic form of `xi'`.
///
/// A non-finite state aborts the run; the partial trace is returned with a
/// [`StopReason::NonFinite`] marker rather than discarded.
pub fn integrate(
    p: &ProblemSpec,
    kappa: &ParamSchedule,
    rho: &ParamSchedule,
    w0: &[f64],
    w1: &[f64],
    cfg: &IntegrationConfig,
) -> Result<TrajectoryTrace> {
    if cfg.step <= 0.0 || !cfg.step.is_finite() {
        return Err(Error::invalid_parameter("step", "must be finite and > 0"));
    }
    if cfg.t_end <= 0.0 || !cfg.t_end.is_finite() {
        return Err(Error::invalid_parameter("t_end", "must be finite and > 0"));
    }
    if cfg.sample_every == 0 {
        return Err(Error::invalid_parameter("sample_every", "must be >= 1"));
    }
    if w0.len() != p.dimension || w1.len() != p.dimension {
        return Err(Error::DimensionMismatch {
            expected: p.dimension,
            actual: if w0.len() != p.dimension {
                w0.len()
            } else {
                w1.len()
            },
        });
    }

    // Energy terms only make sense for constant schedules with a > 0.
    let energy = match (kappa.as_constant(), rho.as_constant(), p.constants()) {
        (Some(k), Some(r), Ok(c)) if c.a_positive && r > 0.0 && p.known_solution.is_some() => {
            Some(EnergyTerms {
                kappa: k,
                n: c.a1 * k / (2.0 * r),
            })
        }
        _ => None,
    };

    let n_steps = (cfg.t_end / cfg.step).ceil() as usize;
    let mut state = PhaseState {
        t: 0.0,
        w: w0.to_vec(),
        v: w1.to_vec(),
    };
    let mut rows: Vec<TraceRow> = Vec::with_capacity(n_steps / cfg.sample_every + 2);
    let mut stop_reason = StopReason::HorizonReached;

    let record = |rows: &mut Vec<TraceRow>, index: usize, state: &PhaseState| -> Result<()> {
        let res = residual(p, &state.w)?;
        let error = p
            .known_solution
            .as_ref()
            .map(|ws| linalg::dist(&state.w, ws));
        let xi = error.map(|e| 0.5 * e * e);
        let energy_value = match (&energy, p.known_solution.as_ref()) {
            (Some(terms), Some(ws)) => {
                let diff = linalg::sub(&state.w, ws);
                let xi_dot = linalg::dot(&diff, &state.v);
                let speed2 = linalg::dot(&state.v, &state.v);
                let et = state.t.exp();
                Some(
                    et * xi_dot
                        + (terms.kappa - 1.0) * et * xi.unwrap_or(0.0)
                        + terms.n * et * speed2,
                )
            }
            _ => None,
        };
        rows.push(TraceRow {
            index,
            t: state.t,
            w: state.w.clone(),
            w_norm: linalg::norm(&state.w),
            v: Some(state.v.clone()),
            residual_norm: res.norm,
            error,
            xi,
            energy: energy_value,
        });
        Ok(())
    };

    record(&mut rows, 0, &state)?;
    for step_index in 1..=n_steps {
        let h = cfg.step.min(cfg.t_end - state.t);
        if h <= 0.0 {
            // horizon reached a step early through rounding; keep the
            // final state in the trace regardless of the sampling cadence
            if rows.last().map(|r| r.index) != Some(step_index - 1) {
                record(&mut rows, step_index - 1, &state)?;
            }
            break;
        }
        let next = match cfg.method {
            IntegrationMethod::Euler => {
                let (dw, dv) = vector_field(p, kappa, rho, state.t, &state.w, &state.v)?;
                PhaseState {
                    t: state.t + h,
                    w: linalg::add_scaled(&state.w, h, &dw),
                    v: linalg::add_scaled(&state.v, h, &dv),
                }
            }
            IntegrationMethod::RungeKutta4 => {
                let (k1w, k1v) = vector_field(p, kappa, rho, state.t, &state.w, &state.v)?;
                let (k2w, k2v) = vector_field(
                    p,
                    kappa,
                    rho,
                    state.t + 0.5 * h,
                    &linalg::add_scaled(&state.w, 0.5 * h, &k1w),
                    &linalg::add_scaled(&state.v, 0.5 * h, &k1v),
                )?;
                let (k3w, k3v) = vector_field(
                    p,
                    kappa,
                    rho,
                    state.t + 0.5 * h,
                    &linalg::add_scaled(&state.w, 0.5 * h, &k2w),
                    &linalg::add_scaled(&state.v, 0.5 * h, &k2v),
                )?;
                let (k4w, k4v) = vector_field(
                    p,
                    kappa,
                    rho,
                    state.t + h,
                    &linalg::add_scaled(&state.w, h, &k3w),
                    &linalg::add_scaled(&state.v, h, &k3v),
                )?;
                let combine = |x: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
                    x.iter()
                        .enumerate()
                        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                        .collect::<Vec<f64>>()
                };
                PhaseState {
                    t: state.t + h,
                    w: combine(&state.w, &k1w, &k2w, &k3w, &k4w),
                    v: combine(&state.v, &k1v, &k2v, &k3v, &k4v),
                }
            }
        };
        if !next.is_finite() {
            stop_reason = StopReason::NonFinite { step: step_index };
            if rows.last().map(|r| r.index) != Some(step_index - 1) {
                record(&mut rows, step_index - 1, &state)?;
            }
            break;
        }
        state = next;
        if step_index % cfg.sample_every == 0 || step_index == n_steps {
            record(&mut rows, step_index, &state)?;
        }
    }

    let mut params = vec![
        ("h".to_string(), format!("{}", cfg.step)),
        ("t_end".to_string(), format!("{}", cfg.t_end)),
        (
            "method".to_string(),
            match cfg.method {
                IntegrationMethod::RungeKutta4 => "rk4".to_string(),
                IntegrationMethod::Euler => "euler".to_string(),
            },
        ),
    ];
    if let Some(k) = kappa.as_constant() {
        params.push(("kappa".to_string(), format!("{k}")));
    }
    if let Some(r) = rho.as_constant() {
        params.push(("rho".to_string(), format!("{r}")));
    }
    Ok(TrajectoryTrace {
        rows,
        metadata: TraceMetadata {
            problem: String::new(),
            solver: match cfg.method {
                IntegrationMethod::RungeKutta4 => "continuous-rk4".to_string(),
                IntegrationMethod::Euler => "continuous-euler".to_string(),
            },
            params,
            stop_reason,
            axis: TraceAxis::Time,
            dimension: p.dimension,
        },
    })
}

/// Outcome of replaying the energy argument over a recorded trace.
#[derive(Clone, Debug)]
pub struct LyapunovReport {
    /// Whether `xi` is nonincreasing over the trailing half of the trace.
    pub xi_tail_monotone: bool,
    /// Whether the recomputed energy never rises by more than
    /// `energy_tolerance` between consecutive rows.
    pub energy_nonincreasing: bool,
    /// Largest observed energy increase between consecutive rows.
    pub worst_energy_increase: f64,
    /// `10 * max_spacing^2 * (1 + max xi)`, the discretization allowance.
    pub energy_tolerance: f64,
    pub rows_used: usize,
}

/// Recomputes the monitored energy from a recorded trace using finite
/// differences of `xi` (rather than the analytic inner product recorded at
/// integration time) and checks it for monotone decrease.
///
/// The trace must come from a run with constant schedules; the same
/// formulas evaluated pointwise cover slowly varying schedules, in which
/// case the caller passes representative values.
pub fn lyapunov_monitor(
    trace: &TrajectoryTrace,
    c: &ConstantsBundle,
    kappa: f64,
    rho: f64,
) -> Result<LyapunovReport> {
    if trace.rows.len() < 3 {
        return Err(Error::InvalidInput(
            "energy monitoring needs at least 3 rows".to_string(),
        ));
    }
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::invalid_parameter("rho", "must be > 0"));
    }
    let rows = &trace.rows;
    let xi: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.xi.ok_or_else(|| Error::InvalidInput("trace rows carry no xi column".to_string()))
        })
        .collect::<Result<_>>()?;
    let speed2: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.v.as_ref()
                .map(|v| linalg::dot(v, v))
                .ok_or_else(|| Error::InvalidInput("trace rows carry no velocity".to_string()))
        })
        .collect::<Result<_>>()?;
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();

    let n = rows.len();
    let xi_dot: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                (xi[1] - xi[0]) / (ts[1] - ts[0])
            } else if i == n - 1 {
                (xi[n - 1] - xi[n - 2]) / (ts[n - 1] - ts[n - 2])
            } else {
                (xi[i + 1] - xi[i - 1]) / (ts[i + 1] - ts[i - 1])
            }
        })
        .collect();

    let nn = c.a1 * kappa / (2.0 * rho);
    let energy: Vec<f64> = (0..n)
        .map(|i| {
            let et = ts[i].exp();
            et * xi_dot[i] + (kappa - 1.0) * et * xi[i] + nn * et * speed2[i]
        })
        .collect();

    let max_spacing = ts.windows(2).map(|w| w[1] - w[0]).fold(0.0_f64, f64::max);
    let max_xi = xi.iter().cloned().fold(0.0_f64, f64::max);
    let energy_tolerance = 10.0 * max_spacing * max_spacing * (1.0 + max_xi);

    let worst_energy_increase = energy
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let energy_nonincreasing = worst_energy_increase <= energy_tolerance;

    let tail = &xi[n / 2..];
    let xi_tail_monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0]));

    Ok(LyapunovReport {
        xi_tail_monotone,
        energy_nonincreasing,
        worst_energy_increase,
        energy_tolerance,
        rows_used: n,
    })
}

/// Exponential-rate fit `log ||w(t) - w*|| ~ rate * t + intercept` over the
/// trailing half of a trace.
#[derive(Clone, Copy, Debug)]
pub struct ExponentialRateFit {
    /// Slope of the log-error line; negative means decay.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits the decay rate of the distance to `w_star`. Needs at least 10 rows
/// with positive error; if the error hits exact zero the fit uses the
/// prefix before the first zero.
pub fn fit_exponential_rate(trace: &TrajectoryTrace, w_star: &[f64]) -> Result<ExponentialRateFit> {
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
        points.push((row.t, err.ln()));
    }
    if points.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 10 rows with positive error, got {}",
            points.len()
        )));
    }
    let tail = &points[points.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (rate, intercept, r_squared) = linalg::line_fit(&xs, &ys);
    Ok(ExponentialRateFit {
        rate,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::derive_constants;
    use crate::registry;

    #[test]
    fn field_matches_hand_value_on_the_benchmark() {
        let p = registry::halfline_1d();
        let kappa = ParamSchedule::constant(2.0).unwrap();
        let rho = ParamSchedule::constant(0.1).unwrap();
        let (dw, dv) = vector_field(&p, &kappa, &rho, 0.0, &[100.0], &[0.0]).unwrap();
        assert_eq!(dw, vec![0.0]);
        assert!(
            (dv[0] + 7.442_105_263_157_895).abs() < 1e-9,
            "dv = {}",
            dv[0]
        );
    }

    #[test]
    fn field_vanishes_at_equilibrium() {
        let p = registry::halfline_1d();
        let kappa = ParamSchedule::constant(2.0).unwrap();
        let rho = ParamSchedule::constant(0.1).unwrap();
        let (dw, dv) = vector_field(&p, &kappa, &rho, 1.0, &[0.0], &[0.0]).unwrap();
        assert_eq!(dw, vec![0.0]);
        assert_eq!(dv, vec![0.0]);
    }

    #[test]
    fn zero_step_schedule_gives_pure_damping() {
        let p = registry::halfline_1d();
        let kappa = ParamSchedule::constant(3.0).unwrap();
        let rho = ParamSchedule::constant(0.0).unwrap();
        let (dw, dv) = vector_field(&p, &kappa, &rho, 0.0, &[7.0], &[2.0]).unwrap();
        assert_eq!(dw, vec![2.0]);
        assert_eq!(dv, vec![-6.0]);
    }

    #[test]
    fn piecewise_linear_schedule_interpolates_and_clamps() {
        let s = ParamSchedule::piecewise_linear(vec![(0.0, 2.0), (1.0, 4.0)]).unwrap();
        assert_eq!(s.value(-1.0), 2.0);
        assert_eq!(s.value(0.5), 3.0);
        assert_eq!(s.value(5.0), 4.0);
        assert!(ParamSchedule::piecewise_linear(vec![(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(ParamSchedule::piecewise_linear(vec![(0.0, -1.0)]).is_err());
        assert!(ParamSchedule::constant(-0.5).is_err());
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let p = registry::halfline_1d();
        let cfg = IntegrationConfig {
            step: 1e-2,
            t_end: 1.0,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(0.1).unwrap(),
            &[0.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        for row in &trace.rows {
            assert_eq!(row.w[0], 0.0);
            assert_eq!(row.error, Some(0.0));
            assert_eq!(row.xi, Some(0.0));
        }
        assert_eq!(trace.metadata.stop_reason, StopReason::HorizonReached);
    }

    #[test]
    fn pure_damping_velocity_decays_analytically() {
        use crate::problem::{ConvexFunctionSpec, FeasibleSetSpec, OperatorSpec, ProblemSpec};
        // g = 0 makes the residual vanish identically
        let p = ProblemSpec::new(
            OperatorSpec::scalar_linear(1.0).unwrap(),
            OperatorSpec::scalar_linear(0.0).unwrap(),
            ConvexFunctionSpec::Zero,
            FeasibleSetSpec::whole_space(1),
            1.0,
            1,
        )
        .unwrap();
        let kappa = 1.5;
        let cfg = IntegrationConfig {
            step: 1e-3,
            t_end: 2.0,
            sample_every: 100,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(kappa).unwrap(),
            &ParamSchedule::constant(0.5).unwrap(),
            &[0.0],
            &[1.0],
            &cfg,
        )
        .unwrap();
        let last = trace.rows.last().unwrap();
        let expected = (-kappa * last.t).exp();
        assert!(
            (last.v.as_ref().unwrap()[0] - expected).abs() < 1e-10,
            "v = {}, expected {expected}",
            last.v.as_ref().unwrap()[0]
        );
    }

    #[test]
    fn rk4_beats_euler_and_converges_at_fourth_order() {
        // line-1d: A(w) = w, so kappa = 3, rho = 2 has roots -1 and -2:
        // w(t) = 2 e^-t - e^-2t for w(0) = 1, w'(0) = 0.
        let p = registry::line_1d();
        let exact = |t: f64| 2.0 * (-t).exp() - (-2.0 * t).exp();
        let run = |h: f64, method: IntegrationMethod| {
            let cfg = IntegrationConfig {
                step: h,
                t_end: 2.0,
                method,
                sample_every: usize::MAX,
            };
            let trace = integrate(
                &p,
                &ParamSchedule::constant(3.0).unwrap(),
                &ParamSchedule::constant(2.0).unwrap(),
                &[1.0],
                &[0.0],
                &cfg,
            )
            .unwrap();
            let last = trace.rows.last().unwrap();
            (last.w[0] - exact(last.t)).abs()
        };
        let e1 = run(0.05, IntegrationMethod::RungeKutta4);
        let e2 = run(0.025, IntegrationMethod::RungeKutta4);
        assert!(e1 / e2 >= 12.0, "ratio = {}", e1 / e2);
        assert!(run(0.025, IntegrationMethod::Euler) > e2);
    }

    #[test]
    fn non_finite_state_truncates_with_diagnostic() {
        // explicit Euler with an absurd step on a stiff linear problem blows up
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1.0,
            t_end: 400.0,
            method: IntegrationMethod::Euler,
            sample_every: 1,
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(0.0).unwrap(),
            &ParamSchedule::constant(1e8).unwrap(),
            &[1.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        assert!(matches!(
            trace.metadata.stop_reason,
            StopReason::NonFinite { .. }
        ));
        assert!(!trace.rows.is_empty());
        for row in &trace.rows {
            assert!(row.w.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn xi_matches_half_squared_error_rowwise() {
        let p = registry::halfline_1d();
        let cfg = IntegrationConfig {
            step: 1e-2,
            t_end: 2.0,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(0.1).unwrap(),
            &[100.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        for row in &trace.rows {
            let e = row.error.unwrap();
            let xi = row.xi.unwrap();
            assert!((xi - 0.5 * e * e).abs() <= 1e-12 * xi.max(1.0));
        }
    }

    // Analysis constants with a = tau = a1 = 1; paired with line-1d
    // (residual slope 1) they satisfy the continuous conditions at
    // kappa = 2, rho = 1 with zero margin.
    fn unit_bundle() -> ConstantsBundle {
        derive_constants(0.5, 0.0, 1.0, 0.625, 0.0, 1.0).unwrap()
    }

    #[test]
    fn energy_is_nonincreasing_in_the_critically_damped_case() {
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1e-3,
            t_end: 6.0,
            sample_every: 10,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(1.0).unwrap(),
            &[1.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        let report = lyapunov_monitor(&trace, &unit_bundle(), 2.0, 1.0).unwrap();
        assert!(
            report.energy_nonincreasing,
            "worst increase {} vs tol {}",
            report.worst_energy_increase, report.energy_tolerance
        );
        assert!(report.xi_tail_monotone);
    }

    #[test]
    fn analytic_and_difference_energies_agree() {
        // The trace records the energy with the analytic xi' = <w - w*, w'>;
        // rebuilding it from central differences of xi must agree to the
        // discretization allowance away from the endpoints.
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1e-3,
            t_end: 4.0,
            sample_every: 10,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(1.0).unwrap(),
            &[1.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        let c = p.constants().unwrap();
        let n_term = c.a1 * 2.0 / 2.0;
        let rows = &trace.rows;
        let spacing = rows[1].t - rows[0].t;
        let tol = 10.0 * spacing * spacing * (1.0 + rows[0].xi.unwrap());
        for i in 1..rows.len() - 1 {
            let xi_dot = (rows[i + 1].xi.unwrap() - rows[i - 1].xi.unwrap())
                / (rows[i + 1].t - rows[i - 1].t);
            let speed2: f64 = rows[i].v.as_ref().unwrap().iter().map(|x| x * x).sum();
            let et = rows[i].t.exp();
            let fd_energy =
                et * xi_dot + (2.0 - 1.0) * et * rows[i].xi.unwrap() + n_term * et * speed2;
            let recorded = rows[i].energy.unwrap();
            assert!(
                (fd_energy - recorded).abs() <= tol,
                "row {i}: fd {fd_energy} vs analytic {recorded}"
            );
        }
    }

    #[test]
    fn undamped_run_flags_energy_increase() {
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1e-3,
            t_end: 6.0,
            sample_every: 10,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(0.0).unwrap(),
            &ParamSchedule::constant(1.0).unwrap(),
            &[1.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        let report = lyapunov_monitor(&trace, &unit_bundle(), 0.0, 1.0).unwrap();
        assert!(!report.energy_nonincreasing);
    }

    #[test]
    fn equilibrium_energy_is_identically_zero() {
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1e-2,
            t_end: 1.0,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(1.0).unwrap(),
            &[0.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        let report = lyapunov_monitor(&trace, &unit_bundle(), 2.0, 1.0).unwrap();
        assert!(report.energy_nonincreasing);
        assert_eq!(report.worst_energy_increase, 0.0);
    }

    #[test]
    fn monitor_needs_three_rows() {
        let p = registry::line_1d();
        let cfg = IntegrationConfig {
            step: 1.0,
            t_end: 1.0,
            sample_every: 1,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(1.0).unwrap(),
            &[1.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        assert!(matches!(
            lyapunov_monitor(&trace, &unit_bundle(), 2.0, 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    fn synthetic_exponential_trace(rate: f64, n: usize) -> TrajectoryTrace {
        let rows = (0..n)
            .map(|i| {
                let t = i as f64 * 0.1;
                let w = (rate * t).exp();
                TraceRow {
                    index: i,
                    t,
                    w: vec![w],
                    w_norm: w.abs(),
                    v: None,
                    residual_norm: 0.0,
                    error: Some(w.abs()),
                    xi: None,
                    energy: None,
                }
            })
            .collect();
        TrajectoryTrace {
            rows,
            metadata: TraceMetadata {
                problem: "synthetic".to_string(),
                solver: "synthetic".to_string(),
                params: vec![],
                stop_reason: StopReason::HorizonReached,
                axis: TraceAxis::Time,
                dimension: 1,
            },
        }
    }

    #[test]
    fn exponential_fit_recovers_synthetic_rate() {
        let trace = synthetic_exponential_trace(-2.0, 100);
        let fit = fit_exponential_rate(&trace, &[0.0]).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-6, "rate = {}", fit.rate);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn constant_trace_fits_zero_rate() {
        let trace = synthetic_exponential_trace(0.0, 50);
        let fit = fit_exponential_rate(&trace, &[0.0]).unwrap();
        assert_eq!(fit.rate, 0.0);
    }

    #[test]
    fn fit_uses_prefix_before_exact_zero() {
        let mut trace = synthetic_exponential_trace(-1.0, 60);
        for row in trace.rows.iter_mut().skip(40) {
            row.w = vec![0.0];
            row.error = Some(0.0);
        }
        let fit = fit_exponential_rate(&trace, &[0.0]).unwrap();
        assert!((fit.rate + 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_rejects_too_few_points() {
        let trace = synthetic_exponential_trace(-1.0, 5);
        assert!(matches!(
            fit_exponential_rate(&trace, &[0.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn benchmark_run_decays_with_negative_fitted_rate() {
        let p = registry::halfline_1d();
        let cfg = IntegrationConfig {
            step: 1e-3,
            t_end: 50.0,
            sample_every: 100,
            ..Default::default()
        };
        let trace = integrate(
            &p,
            &ParamSchedule::constant(2.0).unwrap(),
            &ParamSchedule::constant(0.1).unwrap(),
            &[100.0],
            &[0.0],
            &cfg,
        )
        .unwrap();
        let xi0 = trace.rows.first().unwrap().xi.unwrap();
        let xi_end = trace.rows.last().unwrap().xi.unwrap();
        assert!(xi_end < xi0);
        let fit = fit_exponential_rate(&trace, &[0.0]).unwrap();
        assert!(fit.rate < 0.0, "rate = {}", fit.rate);
    }
}
