//! Trajectory traces shared by the continuous integrator and the discrete
//! solvers, with CSV emission.
//!
//! Continuous traces are keyed by time and carry velocity, the squared-error
//! functional and (when available) the monitored energy; discrete traces are
//! keyed by iteration. Numbers are written with Rust's shortest round-trip
//! decimal formatting, so parsing a CSV back yields bit-identical values.

use std::fmt;
use std::io::{self, Write};

/// Vector payloads are recorded in full only up to this dimension; larger
/// traces keep norms to bound CSV size.
pub const MAX_RECORDED_DIMENSION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceAxis {
    Time,
    Iteration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    /// Residual norm fell to the configured tolerance.
    Converged,
    MaxIterations,
    HorizonReached,
    /// A non-finite state appeared at the given step; the trace holds the
    /// last finite rows.
    NonFinite {
        step: usize,
    },
    /// Error grew beyond the divergence guard at the given step.
    Diverged {
        step: usize,
    },
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Converged => write!(f, "converged"),
            StopReason::MaxIterations => write!(f, "max-iterations"),
            StopReason::HorizonReached => write!(f, "horizon-reached"),
            StopReason::NonFinite { step } => write!(f, "non-finite-state at step {step}"),
            StopReason::Diverged { step } => write!(f, "diverged at step {step}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    /// Step or iteration index.
    pub index: usize,
    /// Time for continuous traces; equals `index` as f64 for discrete ones.
    pub t: f64,
    /// Iterate, empty when the dimension exceeds [`MAX_RECORDED_DIMENSION`]
    /// on the iteration axis.
    pub w: Vec<f64>,
    pub w_norm: f64,
    /// Velocity, continuous traces only.
    pub v: Option<Vec<f64>>,
    pub residual_norm: f64,
    /// Distance to the known solution under the configured metric, when one
    /// is known.
    pub error: Option<f64>,
    /// Squared-error functional `||w - w*||^2 / 2`, continuous traces only.
    pub xi: Option<f64>,
    /// Monitored energy, continuous traces with constant schedules only.
    pub energy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TraceMetadata {
    pub problem: String,
    pub solver: String,
    pub params: Vec<(String, String)>,
    pub stop_reason: StopReason,
    pub axis: TraceAxis,
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct TrajectoryTrace {
    pub rows: Vec<TraceRow>,
    pub metadata: TraceMetadata,
}

fn push_field(line: &mut String, value: Option<f64>) {
    line.push(',');
    if let Some(v) = value {
        line.push_str(&format!("{v}"));
    }
}

impl TrajectoryTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.error)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.rows.last().map(|r| r.residual_norm)
    }

    /// Writes the trace as CSV. Time-axis traces use columns
    /// `t,w0..,v0..,residual_norm,error,xi,energy`; iteration-axis traces use
    /// `n,w0../|w|,residual_norm,error` followed by a `#`-prefixed
    /// stop-reason footer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let d = self.metadata.dimension;
        match self.metadata.axis {
            TraceAxis::Time => {
                let mut header = String::from("t");
                for i in 0..d {
                    header.push_str(&format!(",w{i}"));
                }
                for i in 0..d {
                    header.push_str(&format!(",v{i}"));
                }
                header.push_str(",residual_norm,error,xi,energy");
                writeln!(out, "{header}")?;
                for row in &self.rows {
                    let mut line = format!("{}", row.t);
                    for x in &row.w {
                        line.push_str(&format!(",{x}"));
                    }
                    match &row.v {
                        Some(v) => {
                            for x in v {
                                line.push_str(&format!(",{x}"));
                            }
                        }
                        None => line.push_str(&",".repeat(d)),
                    }
                    line.push_str(&format!(",{}", row.residual_norm));
                    push_field(&mut line, row.error);
                    push_field(&mut line, row.xi);
                    push_field(&mut line, row.energy);
                    writeln!(out, "{line}")?;
                }
            }
            TraceAxis::Iteration => {
                let full = d <= MAX_RECORDED_DIMENSION;
                let mut header = String::from("n");
                if full {
                    for i in 0..d {
                        header.push_str(&format!(",w{i}"));
                    }
                } else {
                    header.push_str(",|w|");
                }
                header.push_str(",residual_norm,error");
                writeln!(out, "{header}")?;
                for row in &self.rows {
                    let mut line = format!("{}", row.index);
                    if full {
                        for x in &row.w {
                            line.push_str(&format!(",{x}"));
                        }
                    } else {
                        line.push_str(&format!(",{}", row.w_norm));
                    }
                    line.push_str(&format!(",{}", row.residual_norm));
                    push_field(&mut line, row.error);
                    writeln!(out, "{line}")?;
                }
                writeln!(out, "# stop_reason: {}", self.metadata.stop_reason)?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn discrete_trace() -> TrajectoryTrace {
        TrajectoryTrace {
            rows: vec![
                TraceRow {
                    index: 0,
                    t: 0.0,
                    w: vec![100.0],
                    w_norm: 100.0,
                    v: None,
                    residual_norm: 74.5,
                    error: Some(100.0),
                    xi: None,
                    energy: None,
                },
                TraceRow {
                    index: 1,
                    t: 1.0,
                    w: vec![93.25],
                    w_norm: 93.25,
                    v: None,
                    residual_norm: 69.1,
                    error: Some(93.25),
                    xi: None,
                    energy: None,
                },
            ],
            metadata: TraceMetadata {
                problem: "halfline-1d".to_string(),
                solver: "inertial".to_string(),
                params: vec![],
                stop_reason: StopReason::MaxIterations,
                axis: TraceAxis::Iteration,
                dimension: 1,
            },
        }
    }

    #[test]
    fn iteration_csv_layout() {
        let csv = discrete_trace().to_csv_string();
        let expected = "n,w0,residual_norm,error\n\
                        0,100,74.5,100\n\
                        1,93.25,69.1,93.25\n\
                        # stop_reason: max-iterations\n";
        assert_eq!(csv, expected);
    }

    #[test]
    fn time_csv_has_header_and_optional_cells() {
        let trace = TrajectoryTrace {
            rows: vec![TraceRow {
                index: 0,
                t: 0.0,
                w: vec![1.0],
                w_norm: 1.0,
                v: Some(vec![0.5]),
                residual_norm: 2.0,
                error: None,
                xi: None,
                energy: None,
            }],
            metadata: TraceMetadata {
                problem: "p".to_string(),
                solver: "continuous-rk4".to_string(),
                params: vec![],
                stop_reason: StopReason::HorizonReached,
                axis: TraceAxis::Time,
                dimension: 1,
            },
        };
        let csv = trace.to_csv_string();
        assert_eq!(csv, "t,w0,v0,residual_norm,error,xi,energy\n0,1,0.5,2,,,\n");
    }

    #[test]
    fn csv_numbers_round_trip() {
        let values: [f64; 4] = [0.1 + 0.2, 1.0 / 3.0, 1e-300, 74.42105263157895];
        for v in values {
            let s = format!("{v}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn final_accessors_read_last_row() {
        let trace = discrete_trace();
        assert_eq!(trace.final_error(), Some(93.25));
        assert_eq!(trace.final_residual(), Some(69.1));
    }
}
