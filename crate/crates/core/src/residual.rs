//! The residual map whose zeros are exactly the problem solutions:
//! `A(w) = T(w) - P(T(w) - gamma*g(w))` with `P` the generalized
//! f-projection. `||A(w)||` is the canonical stopping and convergence
//! quantity throughout the crate.

use crate::constants::ConstantsBundle;
use crate::error::{Error, Result};
use crate::fprojection::prox;
use crate::linalg;
use crate::problem::{apply_operator, ProblemSpec};

/// Residual-norm threshold below which a supplied reference solution is
/// accepted by [`check_residual_estimates`].
pub const SOLUTION_VERIFICATION_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ResidualEvaluation {
    pub value: Vec<f64>,
    pub norm: f64,
    /// `<A(w), w - w*>` when the problem carries a known solution.
    pub inner_with_error: Option<f64>,
}

/// Evaluates the residual map at `w`.
pub fn residual(p: &ProblemSpec, w: &[f64]) -> Result<ResidualEvaluation> {
    if w.len() != p.dimension {
        return Err(Error::DimensionMismatch {
            expected: p.dimension,
            actual: w.len(),
        });
    }
    let tw = apply_operator(&p.t, w)?;
    let gw = apply_operator(&p.g, w)?;
    let shifted: Vec<f64> = tw.iter().zip(&gw).map(|(t, g)| t - p.gamma * g).collect();
    let projected = prox(&shifted, p.gamma, &p.f, &p.set)?;
    let value = linalg::sub(&tw, &projected.point);
    let norm = linalg::norm(&value);
    let inner_with_error = p
        .known_solution
        .as_ref()
        .map(|ws| linalg::dot(&value, &linalg::sub(w, ws)));
    Ok(ResidualEvaluation {
        value,
        norm,
        inner_with_error,
    })
}

/// True iff `||A(w)|| <= tol`.
pub fn is_solution(p: &ProblemSpec, w: &[f64], tol: f64) -> Result<bool> {
    Ok(residual(p, w)?.norm <= tol)
}

#[derive(Clone, Copy, Debug)]
pub struct InequalityMargin {
    pub id: &'static str,
    /// Signed slack; nonnegative means the inequality holds as stated.
    pub margin: f64,
    /// Whether the margin clears `-scaled_tol`.
    pub holds: bool,
}

/// Pointwise verification of the residual estimates at `w` against a
/// reference solution.
#[derive(Clone, Debug)]
pub struct ResidualEstimatesReport {
    /// False when `a <= 0`, in which case no margins are computed.
    pub applicable: bool,
    pub entries: Vec<InequalityMargin>,
    pub all_hold: bool,
    /// `1e-9 * (1 + ||w - w*||^2)`; both sides of the inequalities grow
    /// quadratically, so the slack scales the same way.
    pub scaled_tol: f64,
}

/// Checks the four residual estimates at `w`:
///
/// * alignment: `<w - w*, A(w)> >= a1 ||A(w)||^2`
/// * error bound: `a ||w - w*|| <= ||A(w)||`
/// * descent: `<A(w), w - w*> >= a ||w - w*||^2`
/// * Lipschitz: `||A(w)|| <= (2*eta + gamma*beta) ||w - w*||`
///
/// `w_star` must pass [`is_solution`] at [`SOLUTION_VERIFICATION_TOL`].
/// Intended as a property-test kernel, not a solver step.
pub fn check_residual_estimates(
    p: &ProblemSpec,
    c: &ConstantsBundle,
    w: &[f64],
    w_star: &[f64],
) -> Result<ResidualEstimatesReport> {
    let star_residual = residual(p, w_star)?;
    if star_residual.norm > SOLUTION_VERIFICATION_TOL {
        return Err(Error::NotASolution {
            residual_norm: star_residual.norm,
            tol: SOLUTION_VERIFICATION_TOL,
        });
    }
    if !c.a_positive {
        return Ok(ResidualEstimatesReport {
            applicable: false,
            entries: Vec::new(),
            all_hold: false,
            scaled_tol: f64::NAN,
        });
    }
    let eval = residual(p, w)?;
    let err = linalg::dist(w, w_star);
    let inner = linalg::dot(&eval.value, &linalg::sub(w, w_star));
    let scaled_tol = 1e-9 * (1.0 + err * err);

    let raw = [
        ("alignment", inner - c.a1 * eval.norm * eval.norm),
        ("error-bound", eval.norm - c.a * err),
        ("descent", inner - c.a * err * err),
        ("lipschitz", c.tau * err - eval.norm),
    ];
    let entries: Vec<InequalityMargin> = raw
        .into_iter()
        .map(|(id, margin)| InequalityMargin {
            id,
            margin,
            holds: margin >= -scaled_tol,
        })
        .collect();
    let all_hold = entries.iter().all(|e| e.holds);
    Ok(ResidualEstimatesReport {
        applicable: true,
        entries,
        all_hold,
        scaled_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    #[test]
    fn residual_vanishes_at_the_benchmark_solution() {
        let p = registry::halfline_1d();
        let r = residual(&p, &[0.0]).unwrap();
        assert_eq!(r.value, vec![0.0]);
        assert_eq!(r.norm, 0.0);
        assert_eq!(r.inner_with_error, Some(0.0));
    }

    #[test]
    fn residual_at_100_matches_hand_value() {
        let p = registry::halfline_1d();
        let r = residual(&p, &[100.0]).unwrap();
        // 75 - (5 - 2.8)/3.8
        assert!(
            (r.norm - 74.421_052_631_578_95).abs() < 1e-9,
            "norm = {}",
            r.norm
        );
    }

    #[test]
    fn residual_at_1_stays_clamped() {
        let p = registry::halfline_1d();
        let r = residual(&p, &[1.0]).unwrap();
        assert!((r.norm - 0.75).abs() < 1e-12);
    }

    #[test]
    fn whole_space_zero_function_reduces_to_scaled_inner_operator() {
        use crate::problem::{ConvexFunctionSpec, FeasibleSetSpec, OperatorSpec, ProblemSpec};
        let p = ProblemSpec::new(
            OperatorSpec::scalar_linear(0.3).unwrap(),
            OperatorSpec::scalar_linear(2.0).unwrap(),
            ConvexFunctionSpec::Zero,
            FeasibleSetSpec::whole_space(2),
            0.5,
            2,
        )
        .unwrap();
        let r = residual(&p, &[3.0, -4.0]).unwrap();
        // A(w) = gamma * g(w) = 0.5 * 2 * w = w
        assert!((r.value[0] - 3.0).abs() < 1e-12);
        assert!((r.value[1] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn is_solution_thresholds() {
        let p = registry::halfline_1d();
        assert!(is_solution(&p, &[0.0], 1e-12).unwrap());
        assert!(!is_solution(&p, &[1.0], 1e-12).unwrap());
        assert!(is_solution(&p, &[1.0], f64::INFINITY).unwrap());
    }

    #[test]
    fn residual_estimates_hold_at_100() {
        let p = registry::halfline_1d();
        let c = p.constants().unwrap();
        let report = check_residual_estimates(&p, &c, &[100.0], &[0.0]).unwrap();
        assert!(report.applicable);
        assert!(report.all_hold, "{:?}", report.entries);
        let lipschitz = report.entries.iter().find(|e| e.id == "lipschitz").unwrap();
        assert!((lipschitz.margin - (220.0 - 74.421_052_631_578_95)).abs() < 1e-6);
    }

    #[test]
    fn residual_estimates_hold_with_equality_at_the_solution() {
        let p = registry::halfline_1d();
        let c = p.constants().unwrap();
        let report = check_residual_estimates(&p, &c, &[0.0], &[0.0]).unwrap();
        assert!(report.all_hold);
        for e in &report.entries {
            assert_eq!(e.margin, 0.0, "{}", e.id);
        }
    }

    #[test]
    fn residual_estimates_sweep_random_points() {
        use rand::Rng;
        use rand::SeedableRng;
        let p = registry::halfline_1d();
        let c = p.constants().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let w = vec![rng.gen_range(-1e3..1e3)];
            let report = check_residual_estimates(&p, &c, &w, &[0.0]).unwrap();
            assert!(
                report.all_hold,
                "violation at w = {w:?}: {:?}",
                report.entries
            );
        }
    }

    #[test]
    fn unverified_reference_point_is_rejected() {
        let p = registry::halfline_1d();
        let c = p.constants().unwrap();
        let err = check_residual_estimates(&p, &c, &[100.0], &[1.0]);
        assert!(matches!(err, Err(Error::NotASolution { .. })));
    }

    #[test]
    fn nonpositive_a_reports_inapplicable() {
        let p = registry::halfline_1d();
        let c = crate::constants::derive_constants(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let report = check_residual_estimates(&p, &c, &[10.0], &[0.0]).unwrap();
        assert!(!report.applicable);
        assert!(report.entries.is_empty());
    }

    #[test]
    fn residual_is_tau_lipschitz() {
        use rand::Rng;
        use rand::SeedableRng;
        let p = registry::halfline_1d();
        let c = p.constants().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let w = vec![rng.gen_range(-500.0..500.0)];
            let v = vec![rng.gen_range(-500.0..500.0)];
            let aw = residual(&p, &w).unwrap().value;
            let av = residual(&p, &v).unwrap().value;
            let lhs = linalg::dist(&aw, &av);
            let rhs = c.tau * linalg::dist(&w, &v);
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }
}
