//! Problem instances: operators, convex terms, feasible sets and the
//! assembled inverse mixed variational inequality.
//!
//! A problem asks for `w*` with `T(w*)` feasible and
//! `<g(w*), y - T(w*)> + f(y) - f(T(w*)) >= 0` for every feasible `y`.
//! All types are immutable after construction; operations are pure.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::{derive_constants_with, BetaTerm, ConstantsBundle};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for declared-vs-computed modulus consistency checks.
pub const MODULUS_CONSISTENCY_TOL: f64 = 1e-12;

/// Operator moduli a caller declares (or a constructor derives).
///
/// `lipschitz` is the smallest L with `||Op(w) - Op(v)|| <= L ||w - v||`;
/// `strong_monotone` the largest m with `<Op(w) - Op(v), w - v> >= m ||w - v||^2`.
/// Either may be absent when unknown (callback operators) or undefined
/// (non-monotone operators have no nonnegative strong-monotonicity modulus).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DeclaredModuli {
    pub lipschitz: Option<f64>,
    pub strong_monotone: Option<f64>,
}

/// Evaluation callback for operators without a closed coefficient form.
pub type OperatorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum OperatorKind {
    /// `w -> matrix * w + offset`, square matrix in row-major nested form.
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// `w -> slope * w`, applied coordinatewise in any dimension.
    ScalarLinear { slope: f64 },
    /// Opaque evaluation handle; moduli cannot be verified, only declared.
    Callback { eval: OperatorFn },
}

#[derive(Clone)]
pub struct OperatorSpec {
    kind: OperatorKind,
    dimension: Option<usize>,
    declared: DeclaredModuli,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            OperatorKind::Affine { .. } => "Affine",
            OperatorKind::ScalarLinear { slope } => return write!(f, "ScalarLinear({slope})"),
            OperatorKind::Callback { .. } => "Callback",
        };
        write!(f, "{kind}(dim={:?}, {:?})", self.dimension, self.declared)
    }
}

fn check_consistent(name: &'static str, declared: f64, computed: Option<f64>) -> Result<()> {
    if !declared.is_finite() || declared < 0.0 {
        return Err(Error::invalid_parameter(
            name,
            format!("modulus must be finite and >= 0, got {declared}"),
        ));
    }
    match computed {
        Some(c) => {
            let tol = MODULUS_CONSISTENCY_TOL * f64::max(1.0, c.abs());
            if (declared - c).abs() > tol {
                Err(Error::InconsistentModulus {
                    name,
                    declared,
                    computed: c,
                    tol: MODULUS_CONSISTENCY_TOL,
                })
            } else {
                Ok(())
            }
        }
        // No nonnegative modulus exists (e.g. a non-monotone linear map).
        None => Err(Error::InconsistentModulus {
            name,
            declared,
            computed: f64::NAN,
            tol: MODULUS_CONSISTENCY_TOL,
        }),
    }
}

impl OperatorSpec {
    /// Coordinatewise `w -> slope * w`. Moduli are derived exactly:
    /// Lipschitz `|slope|`, strong monotonicity `slope` when nonnegative.
    pub fn scalar_linear(slope: f64) -> Result<Self> {
        if !slope.is_finite() {
            return Err(Error::invalid_parameter("slope", "must be finite"));
        }
        Ok(OperatorSpec {
            kind: OperatorKind::ScalarLinear { slope },
            dimension: None,
            declared: DeclaredModuli {
                lipschitz: Some(slope.abs()),
                strong_monotone: (slope >= 0.0).then_some(slope),
            },
        })
    }

    /// `w -> matrix * w + offset` with a square matrix. The Lipschitz modulus
    /// is the spectral norm; the strong-monotonicity modulus the smallest
    /// eigenvalue of the symmetric part, when nonnegative.
    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 {
            return Err(Error::invalid_parameter("matrix", "must be nonempty"));
        }
        if matrix.iter().any(|row| row.len() != d) {
            return Err(Error::invalid_parameter("matrix", "must be square"));
        }
        if offset.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: offset.len(),
            });
        }
        if matrix.iter().any(|r| !linalg::all_finite(r)) || !linalg::all_finite(&offset) {
            return Err(Error::invalid_parameter("matrix", "entries must be finite"));
        }
        let lipschitz = linalg::spectral_norm(&matrix);
        let min_eig = linalg::min_symmetric_eigenvalue(&matrix);
        Ok(OperatorSpec {
            kind: OperatorKind::Affine { matrix, offset },
            dimension: Some(d),
            declared: DeclaredModuli {
                lipschitz: Some(lipschitz),
                strong_monotone: (min_eig >= 0.0).then_some(min_eig),
            },
        })
    }

    /// Opaque operator. Declared moduli are taken on trust; use
    /// [`estimate_moduli_empirical`] to sanity-check them.
    pub fn callback<F>(dimension: usize, declared: DeclaredModuli, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::invalid_parameter("dimension", "must be >= 1"));
        }
        for (name, v) in [
            ("lipschitz", declared.lipschitz),
            ("strong_monotone", declared.strong_monotone),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid_parameter(
                        name,
                        format!("modulus must be finite and >= 0, got {v}"),
                    ));
                }
            }
        }
        Ok(OperatorSpec {
            kind: OperatorKind::Callback {
                eval: Arc::new(eval),
            },
            dimension: Some(dimension),
            declared,
        })
    }

    /// Replaces the declared moduli. For coefficient-backed kinds the values
    /// must match the computed moduli to [`MODULUS_CONSISTENCY_TOL`].
    pub fn with_declared_moduli(mut self, declared: DeclaredModuli) -> Result<Self> {
        match &self.kind {
            OperatorKind::Callback { .. } => {
                for (name, v) in [
                    ("lipschitz", declared.lipschitz),
                    ("strong_monotone", declared.strong_monotone),
                ] {
                    if let Some(v) = v {
                        if !v.is_finite() || v < 0.0 {
                            return Err(Error::invalid_parameter(
                                name,
                                format!("modulus must be finite and >= 0, got {v}"),
                            ));
                        }
                    }
                }
            }
            _ => {
                if let Some(l) = declared.lipschitz {
                    check_consistent("lipschitz", l, self.declared.lipschitz)?;
                }
                if let Some(m) = declared.strong_monotone {
                    check_consistent("strong_monotone", m, self.declared.strong_monotone)?;
                }
            }
        }
        self.declared = declared;
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Fixed dimension, when the kind pins one (scalar maps apply in any).
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.declared.lipschitz
    }

    pub fn strong_monotone(&self) -> Option<f64> {
        self.declared.strong_monotone
    }

    pub fn declared_moduli(&self) -> DeclaredModuli {
        self.declared
    }

    fn check_dimension(&self, d: usize) -> Result<()> {
        match self.dimension {
            Some(expected) if expected != d => Err(Error::DimensionMismatch {
                expected,
                actual: d,
            }),
            _ => Ok(()),
        }
    }
}

/// Evaluates an operator at `w`.
pub fn apply_operator(op: &OperatorSpec, w: &[f64]) -> Result<Vec<f64>> {
    op.check_dimension(w.len())?;
    match &op.kind {
        OperatorKind::Affine { matrix, offset } => Ok(matrix
            .iter()
            .zip(offset)
            .map(|(row, b)| linalg::dot(row, w) + b)
            .collect()),
        OperatorKind::ScalarLinear { slope } => Ok(w.iter().map(|x| slope * x).collect()),
        OperatorKind::Callback { eval } => {
            let out = eval(w);
            if out.len() != w.len() {
                return Err(Error::DimensionMismatch {
                    expected: w.len(),
                    actual: out.len(),
                });
            }
            Ok(out)
        }
    }
}

/// The convex term in the inequality.
#[derive(Clone, Debug)]
pub enum ConvexFunctionSpec {
    /// The zero function; the projection reduces to the metric projection.
    Zero,
    /// `v -> sum_i quad[i] v_i^2 + lin[i] v_i + constant`, `quad[i] >= 0`.
    SeparableQuadratic {
        quad: Vec<f64>,
        lin: Vec<f64>,
        constant: f64,
    },
}

impl ConvexFunctionSpec {
    pub fn separable_quadratic(quad: Vec<f64>, lin: Vec<f64>, constant: f64) -> Result<Self> {
        if quad.len() != lin.len() {
            return Err(Error::DimensionMismatch {
                expected: quad.len(),
                actual: lin.len(),
            });
        }
        if quad.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(Error::invalid_parameter(
                "quad",
                "coefficients must be finite and >= 0 (convexity)",
            ));
        }
        if !linalg::all_finite(&lin) || !constant.is_finite() {
            return Err(Error::invalid_parameter("lin", "entries must be finite"));
        }
        Ok(ConvexFunctionSpec::SeparableQuadratic {
            quad,
            lin,
            constant,
        })
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            ConvexFunctionSpec::Zero => None,
            ConvexFunctionSpec::SeparableQuadratic { quad, .. } => Some(quad.len()),
        }
    }

    pub fn evaluate(&self, v: &[f64]) -> Result<f64> {
        match self {
            ConvexFunctionSpec::Zero => Ok(0.0),
            ConvexFunctionSpec::SeparableQuadratic {
                quad,
                lin,
                constant,
            } => {
                if v.len() != quad.len() {
                    return Err(Error::DimensionMismatch {
                        expected: quad.len(),
                        actual: v.len(),
                    });
                }
                Ok(v.iter()
                    .zip(quad.iter().zip(lin))
                    .map(|(x, (q, l))| q * x * x + l * x)
                    .sum::<f64>()
                    + constant)
            }
        }
    }
}

/// Feasible set description. Infinite bounds are explicit `+-inf` sentinels,
/// never large finite stand-ins.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSetSpec {
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl FeasibleSetSpec {
    pub fn box_set(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::invalid_parameter(
                    "bounds",
                    format!("NaN at index {i}"),
                ));
            }
            if lo > hi {
                return Err(Error::invalid_parameter(
                    "bounds",
                    format!("lower[{i}] = {lo} exceeds upper[{i}] = {hi}"),
                ));
            }
        }
        Ok(FeasibleSetSpec::Box { lower, upper })
    }

    pub fn nonnegative_orthant(d: usize) -> Self {
        FeasibleSetSpec::Box {
            lower: vec![0.0; d],
            upper: vec![f64::INFINITY; d],
        }
    }

    pub fn whole_space(d: usize) -> Self {
        FeasibleSetSpec::Box {
            lower: vec![f64::NEG_INFINITY; d],
            upper: vec![f64::INFINITY; d],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            FeasibleSetSpec::Box { lower, .. } => lower.len(),
        }
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        match self {
            FeasibleSetSpec::Box { lower, upper } => (lower, upper),
        }
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        let (lower, upper) = self.bounds();
        w.len() == lower.len()
            && w.iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (lo, hi))| *x >= lo - tol && *x <= hi + tol)
    }

    /// Componentwise clamp onto the box.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let (lower, upper) = self.bounds();
        w.iter()
            .zip(lower.iter().zip(upper))
            .map(|(x, (lo, hi))| x.max(*lo).min(*hi))
            .collect()
    }
}

/// A full problem instance.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    /// Outer operator mapped into the feasible set at a solution.
    pub t: OperatorSpec,
    /// Inner operator appearing in the inequality pairing.
    pub g: OperatorSpec,
    pub f: ConvexFunctionSpec,
    pub set: FeasibleSetSpec,
    pub gamma: f64,
    pub dimension: usize,
    pub known_solution: Option<Vec<f64>>,
    /// Coupling modulus of the pair `(t, g)`: the largest `alpha` with
    /// `<T(w) - T(v), g(w) - g(v)> >= alpha ||w - v||^2`.
    pub coupled_monotone: Option<f64>,
}

fn linear_matrix(op: &OperatorSpec, d: usize) -> Option<Vec<Vec<f64>>> {
    match op.kind() {
        OperatorKind::Affine { matrix, .. } => Some(matrix.clone()),
        OperatorKind::ScalarLinear { slope } => Some(
            (0..d)
                .map(|i| (0..d).map(|j| if i == j { *slope } else { 0.0 }).collect())
                .collect(),
        ),
        OperatorKind::Callback { .. } => None,
    }
}

impl ProblemSpec {
    pub fn new(
        t: OperatorSpec,
        g: OperatorSpec,
        f: ConvexFunctionSpec,
        set: FeasibleSetSpec,
        gamma: f64,
        dimension: usize,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid_parameter("dimension", "must be >= 1"));
        }
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(Error::invalid_parameter(
                "gamma",
                format!("must be finite and > 0, got {gamma}"),
            ));
        }
        t.check_dimension(dimension)?;
        g.check_dimension(dimension)?;
        if let Some(df) = f.dimension() {
            if df != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: df,
                });
            }
        }
        if set.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: set.dimension(),
            });
        }
        // Coupling modulus is computable for coefficient-backed pairs.
        let coupled = match (linear_matrix(&t, dimension), linear_matrix(&g, dimension)) {
            (Some(mt), Some(mg)) => {
                let eig = linalg::min_coupling_eigenvalue(&mt, &mg);
                (eig >= 0.0).then_some(eig)
            }
            _ => None,
        };
        Ok(ProblemSpec {
            t,
            g,
            f,
            set,
            gamma,
            dimension,
            known_solution: None,
            coupled_monotone: coupled,
        })
    }

    pub fn with_known_solution(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: w.len(),
            });
        }
        self.known_solution = Some(w);
        Ok(self)
    }

    /// Declares the coupling modulus of `(t, g)`; checked against the
    /// computed value when both operators are coefficient backed.
    pub fn with_coupled_monotone(mut self, alpha: f64) -> Result<Self> {
        let computable = linear_matrix(&self.t, self.dimension).is_some()
            && linear_matrix(&self.g, self.dimension).is_some();
        if computable {
            check_consistent("coupled_monotone", alpha, self.coupled_monotone)?;
        } else if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid_parameter(
                "coupled_monotone",
                format!("modulus must be finite and >= 0, got {alpha}"),
            ));
        }
        self.coupled_monotone = Some(alpha);
        Ok(self)
    }

    /// Derives the analysis constants from the declared moduli.
    pub fn constants(&self) -> Result<ConstantsBundle> {
        self.constants_with(BetaTerm::Verbatim)
    }

    pub fn constants_with(&self, beta_term: BetaTerm) -> Result<ConstantsBundle> {
        let missing = |what: &str| Error::ModuliUnavailable(what.to_string());
        let eta = self
            .t
            .lipschitz()
            .ok_or_else(|| missing("Lipschitz modulus of t"))?;
        let lambda = self
            .t
            .strong_monotone()
            .ok_or_else(|| missing("strong-monotonicity modulus of t"))?;
        let beta = self
            .g
            .lipschitz()
            .ok_or_else(|| missing("Lipschitz modulus of g"))?;
        let zeta = self
            .g
            .strong_monotone()
            .ok_or_else(|| missing("strong-monotonicity modulus of g"))?;
        let alpha = self
            .coupled_monotone
            .ok_or_else(|| missing("coupling modulus of (t, g)"))?;
        derive_constants_with(eta, beta, lambda, alpha, zeta, self.gamma, beta_term)
    }
}

/// Axis-aligned sampling region with a seed, used by the empirical
/// modulus estimators.
#[derive(Clone, Debug)]
pub struct SampleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub seed: u64,
}

impl SampleBox {
    pub fn centered(d: usize, half_width: f64, seed: u64) -> Self {
        SampleBox {
            lower: vec![-half_width; d],
            upper: vec![half_width; d],
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                actual: self.upper.len(),
            });
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid_parameter(
                    "sampler",
                    format!("bounds must be finite with lower <= upper, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..*hi)
                }
            })
            .collect()
    }
}

/// Empirical bounds on operator moduli from sampled pairs.
///
/// `lipschitz` is the max of `||Op(w) - Op(v)|| / ||w - v||` over sampled
/// pairs — a lower bound on the true Lipschitz modulus. `strong_monotone`
/// is the min of `<Op(w) - Op(v), w - v> / ||w - v||^2` — an upper bound on
/// the true strong-monotonicity modulus.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalModuli {
    pub lipschitz: f64,
    pub strong_monotone: f64,
    pub samples_used: usize,
}

fn sample_pairs<T>(
    sampler: &SampleBox,
    n_samples: usize,
    mut per_pair: impl FnMut(&[f64], &[f64], f64) -> Result<T>,
) -> Result<Vec<T>> {
    if n_samples < 2 {
        return Err(Error::invalid_parameter("n_samples", "must be >= 2"));
    }
    sampler.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let w = sampler.sample(&mut rng);
        let v = sampler.sample(&mut rng);
        let sep2 = linalg::dist(&w, &v).powi(2);
        if sep2 == 0.0 {
            continue; // duplicate pair carries no ratio information
        }
        out.push(per_pair(&w, &v, sep2)?);
    }
    if out.is_empty() {
        return Err(Error::EstimateFailed(
            "all sampled pairs were duplicates".to_string(),
        ));
    }
    Ok(out)
}

/// Estimates Lipschitz and strong-monotonicity moduli of one operator by
/// sampling pairs in `sampler`. Deterministic for a fixed seed.
pub fn estimate_moduli_empirical(
    op: &OperatorSpec,
    sampler: &SampleBox,
    n_samples: usize,
) -> Result<EmpiricalModuli> {
    let ratios = sample_pairs(sampler, n_samples, |w, v, sep2| {
        let ow = apply_operator(op, w)?;
        let ov = apply_operator(op, v)?;
        let diff = linalg::sub(&ow, &ov);
        Ok((
            linalg::norm(&diff) / sep2.sqrt(),
            linalg::dot(&diff, &linalg::sub(w, v)) / sep2,
        ))
    })?;
    let samples_used = ratios.len();
    let lipschitz = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let strong_monotone = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(EmpiricalModuli {
        lipschitz,
        strong_monotone,
        samples_used,
    })
}

/// Estimates the coupling modulus of a pair `(t, g)`: the min over sampled
/// pairs of `<T(w) - T(v), g(w) - g(v)> / ||w - v||^2`.
pub fn estimate_coupled_monotone(
    t: &OperatorSpec,
    g: &OperatorSpec,
    sampler: &SampleBox,
    n_samples: usize,
) -> Result<f64> {
    let ratios = sample_pairs(sampler, n_samples, |w, v, sep2| {
        let tw = apply_operator(t, w)?;
        let tv = apply_operator(t, v)?;
        let gw = apply_operator(g, w)?;
        let gv = apply_operator(g, v)?;
        Ok(linalg::dot(&linalg::sub(&tw, &tv), &linalg::sub(&gw, &gv)) / sep2)
    })?;
    Ok(ratios.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_linear_evaluates_coordinatewise() {
        let t = OperatorSpec::scalar_linear(0.75).unwrap();
        assert_eq!(apply_operator(&t, &[100.0]).unwrap(), vec![75.0]);
        let g = OperatorSpec::scalar_linear(0.5).unwrap();
        assert_eq!(apply_operator(&g, &[100.0]).unwrap(), vec![50.0]);
    }

    #[test]
    fn affine_identity_returns_input() {
        let id =
            OperatorSpec::affine(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let w = vec![3.0, -2.5];
        assert_eq!(apply_operator(&id, &w).unwrap(), w);
        assert!((id.lipschitz().unwrap() - 1.0).abs() < 1e-12);
        assert!((id.strong_monotone().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let t = OperatorSpec::affine(vec![vec![1.0]], vec![0.0]).unwrap();
        assert!(matches!(
            apply_operator(&t, &[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                actual: 2
            })
        ));
    }

    #[test]
    fn declared_moduli_must_match_coefficients() {
        let t = OperatorSpec::scalar_linear(0.75).unwrap();
        let bad = t.clone().with_declared_moduli(DeclaredModuli {
            lipschitz: Some(0.8),
            strong_monotone: Some(0.75),
        });
        assert!(matches!(bad, Err(Error::InconsistentModulus { .. })));
        let good = t.with_declared_moduli(DeclaredModuli {
            lipschitz: Some(0.75),
            strong_monotone: Some(0.75),
        });
        assert!(good.is_ok());
    }

    #[test]
    fn negative_slope_has_no_strong_monotonicity() {
        let t = OperatorSpec::scalar_linear(-2.0).unwrap();
        assert_eq!(t.lipschitz(), Some(2.0));
        assert_eq!(t.strong_monotone(), None);
        let declared = t.with_declared_moduli(DeclaredModuli {
            lipschitz: Some(2.0),
            strong_monotone: Some(0.0),
        });
        assert!(declared.is_err());
    }

    #[test]
    fn quadratic_requires_nonnegative_curvature() {
        assert!(ConvexFunctionSpec::separable_quadratic(vec![-0.1], vec![0.0], 0.0).is_err());
        let f = ConvexFunctionSpec::separable_quadratic(vec![1.0], vec![2.0], 1.0).unwrap();
        assert_eq!(f.evaluate(&[3.0]).unwrap(), 9.0 + 6.0 + 1.0);
    }

    #[test]
    fn box_bounds_validated() {
        assert!(FeasibleSetSpec::box_set(vec![1.0], vec![0.0]).is_err());
        let k = FeasibleSetSpec::box_set(vec![0.0], vec![f64::INFINITY]).unwrap();
        assert!(k.contains(&[5.0], 0.0));
        assert!(!k.contains(&[-1.0], 1e-9));
        assert_eq!(k.project(&[-3.0]), vec![0.0]);
    }

    #[test]
    fn problem_rejects_nonpositive_gamma() {
        let t = OperatorSpec::scalar_linear(1.0).unwrap();
        let g = OperatorSpec::scalar_linear(1.0).unwrap();
        let p = ProblemSpec::new(
            t,
            g,
            ConvexFunctionSpec::Zero,
            FeasibleSetSpec::whole_space(1),
            -1.0,
            1,
        );
        assert!(matches!(
            p,
            Err(Error::InvalidParameter { name: "gamma", .. })
        ));
    }

    #[test]
    fn coupling_modulus_derived_for_linear_pairs() {
        let t = OperatorSpec::scalar_linear(0.75).unwrap();
        let g = OperatorSpec::scalar_linear(0.5).unwrap();
        let p = ProblemSpec::new(
            t,
            g,
            ConvexFunctionSpec::Zero,
            FeasibleSetSpec::whole_space(1),
            1.0,
            1,
        )
        .unwrap();
        assert!((p.coupled_monotone.unwrap() - 0.375).abs() < 1e-12);
        assert!(p.with_coupled_monotone(0.5).is_err());
    }

    #[test]
    fn empirical_moduli_recover_linear_constants() {
        let t = OperatorSpec::scalar_linear(0.75).unwrap();
        let sampler = SampleBox::centered(1, 10.0, 7);
        let est = estimate_moduli_empirical(&t, &sampler, 200).unwrap();
        assert!((est.lipschitz - 0.75).abs() < 1e-13);
        assert!((est.strong_monotone - 0.75).abs() < 1e-13);
        assert_eq!(est.samples_used, 200);

        let id = OperatorSpec::scalar_linear(1.0).unwrap();
        let est = estimate_moduli_empirical(&id, &SampleBox::centered(3, 5.0, 1), 100).unwrap();
        assert!((est.lipschitz - 1.0).abs() < 1e-13);
    }

    #[test]
    fn empirical_coupling_recovers_product() {
        let t = OperatorSpec::scalar_linear(0.75).unwrap();
        let g = OperatorSpec::scalar_linear(0.5).unwrap();
        let alpha =
            estimate_coupled_monotone(&t, &g, &SampleBox::centered(1, 10.0, 3), 200).unwrap();
        assert!((alpha - 0.375).abs() < 1e-13);
    }

    #[test]
    fn degenerate_sampler_reports_all_duplicates() {
        let t = OperatorSpec::scalar_linear(1.0).unwrap();
        let point_box = SampleBox {
            lower: vec![1.0, 2.0],
            upper: vec![1.0, 2.0],
            seed: 0,
        };
        let err = estimate_moduli_empirical(&t, &point_box, 10);
        assert!(matches!(err, Err(Error::EstimateFailed(_))));
        assert!(estimate_moduli_empirical(&t, &SampleBox::centered(1, 1.0, 0), 1).is_err());
    }

    #[test]
    fn empirical_estimate_is_deterministic_per_seed() {
        let t = OperatorSpec::scalar_linear(2.0).unwrap();
        let a = estimate_moduli_empirical(&t, &SampleBox::centered(2, 1.0, 11), 50).unwrap();
        let b = estimate_moduli_empirical(&t, &SampleBox::centered(2, 1.0, 11), 50).unwrap();
        assert_eq!(a.lipschitz.to_bits(), b.lipschitz.to_bits());
        assert_eq!(a.strong_monotone.to_bits(), b.strong_monotone.to_bits());
    }
}
