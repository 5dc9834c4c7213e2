//! Built-in problem instances used by the benchmark runner and the test
//! suites.

use crate::problem::{ConvexFunctionSpec, FeasibleSetSpec, OperatorSpec, ProblemSpec};

#[derive(Clone, Debug)]
pub struct RegisteredProblem {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: ProblemSpec,
}

/// Scalar benchmark on the half line: `T(w) = 3w/4`, `g(w) = w/2`,
/// `f(v) = v^2 + 2v + 1`, `K = [0, inf)`, `gamma = 1.4`, solution `w* = 0`.
///
/// Moduli: eta = lambda = 3/4, beta = zeta = 1/2, alpha = 3/8; the derived
/// `a` is 0.00375.
pub fn halfline_1d() -> ProblemSpec {
    ProblemSpec::new(
        OperatorSpec::scalar_linear(0.75).expect("literal slope"),
        OperatorSpec::scalar_linear(0.5).expect("literal slope"),
        ConvexFunctionSpec::separable_quadratic(vec![1.0], vec![2.0], 1.0)
            .expect("literal coefficients"),
        FeasibleSetSpec::nonnegative_orthant(1),
        1.4,
        1,
    )
    .expect("literal problem")
    .with_coupled_monotone(0.375)
    .expect("exact coupling of the linear pair")
    .with_known_solution(vec![0.0])
    .expect("dimension 1")
}

/// Whole-space scalar problem with identity operators and `f = 0`, so the
/// residual map is the identity. Used as the linear oracle for integrator
/// and monitor tests.
pub fn line_1d() -> ProblemSpec {
    ProblemSpec::new(
        OperatorSpec::scalar_linear(1.0).expect("literal slope"),
        OperatorSpec::scalar_linear(1.0).expect("literal slope"),
        ConvexFunctionSpec::Zero,
        FeasibleSetSpec::whole_space(1),
        1.0,
        1,
    )
    .expect("literal problem")
    .with_known_solution(vec![0.0])
    .expect("dimension 1")
}

/// Eight-dimensional diagonal problem over a box with mixed finite and
/// infinite bounds, separable quadratic `f` and solution at the origin.
pub fn box_quadratic_8d() -> ProblemSpec {
    let t_diag = [1.0, 1.1, 1.05, 1.0, 1.1, 1.05, 1.0, 1.1];
    let g_diag = [0.65, 0.6, 0.62, 0.64, 0.61, 0.63, 0.65, 0.6];
    let d = t_diag.len();
    let diagonal = |values: &[f64]| -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { values[i] } else { 0.0 })
                    .collect()
            })
            .collect()
    };
    let quad = vec![0.5, 0.25, 0.75, 0.5, 0.3, 0.6, 0.4, 0.55];
    let inf = f64::INFINITY;
    let lower = vec![0.0, 0.0, 0.0, 0.0, -1.0, -1.0, -inf, -inf];
    let upper = vec![inf, inf, 2.0, 2.0, 1.0, 1.0, inf, inf];
    ProblemSpec::new(
        OperatorSpec::affine(diagonal(&t_diag), vec![0.0; d]).expect("literal matrix"),
        OperatorSpec::affine(diagonal(&g_diag), vec![0.0; d]).expect("literal matrix"),
        ConvexFunctionSpec::separable_quadratic(quad, vec![0.0; d], 0.0)
            .expect("literal coefficients"),
        FeasibleSetSpec::box_set(lower, upper).expect("literal bounds"),
        1.0,
        d,
    )
    .expect("literal problem")
    .with_known_solution(vec![0.0; d])
    .expect("dimension matches")
}

/// Every built-in problem, for sweep-style test suites.
pub fn all() -> Vec<RegisteredProblem> {
    vec![
        RegisteredProblem {
            name: "halfline-1d",
            description: "scalar benchmark on [0, inf) with quadratic f",
            problem: halfline_1d(),
        },
        RegisteredProblem {
            name: "line-1d",
            description: "identity residual on the whole line",
            problem: line_1d(),
        },
        RegisteredProblem {
            name: "box-quadratic-8d",
            description: "diagonal 8-D problem over a mixed box",
            problem: box_quadratic_8d(),
        },
    ]
}

/// Looks a built-in problem up by name.
pub fn by_name(name: &str) -> Option<ProblemSpec> {
    all()
        .into_iter()
        .find(|r| r.name == name)
        .map(|r| r.problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::is_solution;

    #[test]
    fn benchmark_constants_are_the_reference_values() {
        let p = halfline_1d();
        assert!((p.coupled_monotone.unwrap() - 0.375).abs() < 1e-15);
        let c = p.constants().unwrap();
        assert!((c.a - 0.00375).abs() <= 1e-15);
        assert!(c.a_positive);
    }

    #[test]
    fn registered_solutions_verify() {
        for entry in all() {
            let ws = entry.problem.known_solution.clone().unwrap();
            assert!(
                is_solution(&entry.problem, &ws, 1e-12).unwrap(),
                "{} known solution fails",
                entry.name
            );
        }
    }

    #[test]
    fn registered_problems_with_positive_a_satisfy_the_estimates() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for entry in all() {
            let c = match entry.problem.constants() {
                Ok(c) if c.a_positive => c,
                _ => continue,
            };
            let ws = entry.problem.known_solution.clone().unwrap();
            for _ in 0..200 {
                let w: Vec<f64> = (0..entry.problem.dimension)
                    .map(|_| rng.gen_range(-100.0..100.0))
                    .collect();
                let report =
                    crate::residual::check_residual_estimates(&entry.problem, &c, &w, &ws).unwrap();
                assert!(report.all_hold, "{}: {:?}", entry.name, report.entries);
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("halfline-1d").is_some());
        assert!(by_name("nope").is_none());
    }
}
