//! Text rendering for condition reports, run summaries and figure-data
//! series. Everything here is deterministic: no timestamps, no wall times.

use std::fmt::Write as _;

use gimvi::{ConditionReport, ConstantsBundle, TraceAxis, TrajectoryTrace};

use crate::runner::RunOutcome;

/// Floor for log10 series, keeping zero errors out of `-inf`.
pub const LOG10_FLOOR: f64 = -308.0;

pub fn format_condition_report(report: &ConditionReport) -> String {
    let mut out = String::new();
    let verdict = if !report.applicable {
        "INAPPLICABLE"
    } else if report.satisfied {
        "SATISFIED"
    } else {
        "VIOLATED"
    };
    let _ = writeln!(
        out,
        "== {}: {} (worst margin {:e})",
        report.condition_id, verdict, report.margin
    );
    for d in &report.details {
        let mark = if d.satisfied { "ok " } else { "FAIL" };
        let _ = write!(out, "   [{mark}] {:<26} margin={:<24e}", d.id, d.margin);
        if let Some(note) = &d.note {
            let _ = write!(out, " {note}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn format_constants(c: &ConstantsBundle) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "constants: eta={} beta={} lambda={} alpha={} zeta={} gamma={}",
        c.eta, c.beta, c.lambda, c.alpha, c.zeta, c.gamma
    );
    let _ = writeln!(
        out,
        "derived:   a={} a1={} tau={} (a {} 0)",
        c.a,
        c.a1,
        c.tau,
        if c.a_positive { ">" } else { "<=" }
    );
    out
}

fn format_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6e}"),
        None => "-".to_string(),
    }
}

/// Aligned plain-text summary, one table per step size (mirroring the
/// benchmark tables' layout: each table lists the methods at one rho).
pub fn summary_text(outcomes: &[RunOutcome]) -> String {
    let mut groups: Vec<(f64, Vec<&RunOutcome>)> = Vec::new();
    for o in outcomes {
        match groups.iter_mut().find(|(rho, _)| *rho == o.rho) {
            Some((_, members)) => members.push(o),
            None => groups.push((o.rho, vec![o])),
        }
    }
    let mut out = String::new();
    for (rho, members) in groups {
        let _ = writeln!(out, "step size rho = {rho}");
        let _ = writeln!(
            out,
            "{:<28} {:<12} {:>8} {:>10} {:>14} {:>14} {:>12}  stop",
            "label", "solver", "kappa", "iterations", "final_error", "final_resid", "fitted_rate"
        );
        for o in members {
            let _ = writeln!(
                out,
                "{:<28} {:<12} {:>8} {:>10} {:>14} {:>14} {:>12}  {}",
                o.label,
                o.solver,
                o.kappa
                    .map(|k| format!("{k}"))
                    .unwrap_or_else(|| "-".to_string()),
                o.iterations,
                format_cell(o.final_error),
                format_cell(o.final_residual),
                format_cell(o.fitted_rate),
                o.stop_reason,
            );
        }
        let _ = writeln!(out);
    }
    out
}

pub fn summary_csv(outcomes: &[RunOutcome]) -> String {
    let mut out = String::from(
        "label,solver,kappa,rho,iterations,final_error,final_residual,fitted_rate,stop_reason,aborted\n",
    );
    for o in outcomes {
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            o.label,
            o.solver,
            opt(o.kappa),
            o.rho,
            o.iterations,
            opt(o.final_error),
            opt(o.final_residual),
            opt(o.fitted_rate),
            o.stop_reason,
            o.aborted,
        );
    }
    out
}

fn floored_log10(v: f64) -> f64 {
    if v <= 0.0 {
        LOG10_FLOOR
    } else {
        v.log10().max(LOG10_FLOOR)
    }
}

/// `(iteration | t, log10 error)` series for plotting.
pub fn log10_error_series(trace: &TrajectoryTrace) -> String {
    let axis = match trace.metadata.axis {
        TraceAxis::Time => "t",
        TraceAxis::Iteration => "n",
    };
    let mut out = format!("{axis},log10_error\n");
    for row in &trace.rows {
        if let Some(err) = row.error {
            let x = match trace.metadata.axis {
                TraceAxis::Time => format!("{}", row.t),
                TraceAxis::Iteration => format!("{}", row.index),
            };
            let _ = writeln!(out, "{x},{}", floored_log10(err));
        }
    }
    out
}

/// `(t, log10 xi)` series for continuous traces.
pub fn log10_xi_series(trace: &TrajectoryTrace) -> String {
    let mut out = String::from("t,log10_xi\n");
    for row in &trace.rows {
        if let Some(xi) = row.xi {
            let _ = writeln!(out, "{},{}", row.t, floored_log10(xi));
        }
    }
    out
}
