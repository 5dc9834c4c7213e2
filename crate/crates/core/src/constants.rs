//! Derived analysis constants.
//!
//! From the operator moduli (eta, beta, lambda, alpha, zeta) and the scaling
//! gamma, the convergence analysis is governed by three derived quantities:
//!
//! * `a  = lambda + gamma*alpha - eta^2/2 - gamma^2*beta/2 - 1/2`
//! * `a1 = a / (2*eta + gamma*beta)^2`
//! * `tau = 2*eta + gamma*beta` (Lipschitz modulus of the residual map)
//!
//! The `gamma^2*beta/2` term is implemented verbatim; a Lipschitz argument
//! would normally square the modulus there, so the squared variant is
//! available behind [`BetaTerm::Squared`]. For `beta <= 1` the verbatim form
//! is the more conservative of the two (it yields the smaller `a`); for
//! `beta > 1` only the squared form is backed by the usual estimate.

use crate::error::{Error, Result};

/// Shared slack for strict inequalities: `x < y` is accepted as satisfied
/// when `y - x > STRICT_INEQUALITY_TOL`.
pub const STRICT_INEQUALITY_TOL: f64 = 1e-12;

/// Which power of the inner operator's Lipschitz modulus enters the
/// `gamma^2` term of `a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaTerm {
    /// `gamma^2 * beta / 2` — the formula as stated.
    #[default]
    Verbatim,
    /// `gamma^2 * beta^2 / 2` — the form a Lipschitz bound yields.
    Squared,
}

/// Moduli together with the derived constants.
///
/// `a <= 0` is flagged, not rejected: solvers still run, only the rate
/// guarantees are withdrawn. With `tau == 0` (both Lipschitz moduli zero)
/// `a1` follows IEEE division: infinite for `a != 0`, NaN for `a == 0`.
#[derive(Clone, Copy, Debug)]
pub struct ConstantsBundle {
    pub eta: f64,
    pub beta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub a: f64,
    pub a1: f64,
    pub tau: f64,
    pub a_positive: bool,
    pub beta_term: BetaTerm,
}

/// Derives the constants bundle with the verbatim beta term.
pub fn derive_constants(
    eta: f64,
    beta: f64,
    lambda: f64,
    alpha: f64,
    zeta: f64,
    gamma: f64,
) -> Result<ConstantsBundle> {
    derive_constants_with(eta, beta, lambda, alpha, zeta, gamma, BetaTerm::Verbatim)
}

pub fn derive_constants_with(
    eta: f64,
    beta: f64,
    lambda: f64,
    alpha: f64,
    zeta: f64,
    gamma: f64,
    beta_term: BetaTerm,
) -> Result<ConstantsBundle> {
    for (name, v) in [
        ("eta", eta),
        ("beta", beta),
        ("lambda", lambda),
        ("alpha", alpha),
        ("zeta", zeta),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid_parameter(
                name,
                format!("modulus must be finite and >= 0, got {v}"),
            ));
        }
    }
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::invalid_parameter(
            "gamma",
            format!("must be finite and > 0, got {gamma}"),
        ));
    }
    let beta_pow = match beta_term {
        BetaTerm::Verbatim => beta,
        BetaTerm::Squared => beta * beta,
    };
    let a = lambda + gamma * alpha - 0.5 * eta * eta - 0.5 * gamma * gamma * beta_pow - 0.5;
    let tau = 2.0 * eta + gamma * beta;
    let a1 = a / (tau * tau);
    Ok(ConstantsBundle {
        eta,
        beta,
        lambda,
        alpha,
        zeta,
        gamma,
        a,
        a1,
        tau,
        a_positive: a > 0.0,
        beta_term,
    })
}
