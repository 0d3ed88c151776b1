//! Half-integer-order modified Bessel functions and Kent normalizing
//! constants, all evaluated in the natural-log domain.
//!
//! Nothing in this module ever forms `exp(kappa)`: series terms are built
//! from log-domain recurrences and combined with log-sum-exp, so
//! concentrations up to at least 700 stay finite.

use crate::error::{KentError, Result};
use crate::numeric::log_sum_exp;

/// Natural log of a positive quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub value: f64,
}

/// Cap on the β-series of the exact normalizer. Convergence is geometric
/// with ratio below (2β/κ)² < 1, so this is a safety net, not a tuning knob.
pub const MAX_SERIES_TERMS: usize = 200;

/// Default relative truncation tolerance for the exact normalizer series.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

const BESSEL_MAX_TERMS: usize = 50_000;

/// ln(n!) by direct summation; exact enough for the orders used here.
fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ln Γ(m + 1/2) for integer m ≥ 0, via Γ(m + 1/2) = (2m)! √π / (4^m m!).
fn ln_gamma_half(m: u64) -> f64 {
    ln_factorial(2 * m) - (m as f64) * 4.0_f64.ln() - ln_factorial(m)
        + 0.5 * std::f64::consts::PI.ln()
}

/// log I_{n + 1/2}(κ) for any integer n ≥ 0 by the ascending power series
///
///   I_v(κ) = Σ_m (κ/2)^{v + 2m} / (m! Γ(v + m + 1)),
///
/// summed in log domain. All terms are positive, so there is no
/// cancellation at any (n, κ).
pub(crate) fn log_bessel_i_half_order(n: u64, kappa: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(KentError::Domain(format!(
            "bessel order {n}+1/2 requires finite kappa > 0, got {kappa}"
        )));
    }
    let v = n as f64 + 0.5;
    let log_half_kappa = (kappa / 2.0).ln();
    // t_0 = (κ/2)^v / Γ(v + 1), with Γ(v + 1) = Γ((n + 1) + 1/2).
    let mut log_term = v * log_half_kappa - ln_gamma_half(n + 1);
    let mut log_terms = vec![log_term];
    let mut log_max = log_term;
    let half_kappa_sq = 2.0 * log_half_kappa;
    for m in 0..BESSEL_MAX_TERMS {
        let m = m as f64;
        log_term += half_kappa_sq - (m + 1.0).ln() - (v + m + 1.0).ln();
        log_terms.push(log_term);
        if log_term > log_max {
            log_max = log_term;
        }
        let decreasing = (m + 1.0) * (v + m + 1.0) > (kappa / 2.0) * (kappa / 2.0);
        if decreasing && log_term < log_max - 50.0 {
            return Ok(log_sum_exp(&log_terms));
        }
    }
    Err(KentError::Convergence(format!(
        "bessel series for order {n}+1/2 at kappa={kappa} did not converge"
    )))
}

/// log I_{2i + 1/2}(κ), the orders appearing in the exact Kent normalizer.
pub fn log_bessel_i_half(i: u64, kappa: f64) -> Result<LogValue> {
    let value = log_bessel_i_half_order(2 * i, kappa)?;
    Ok(LogValue { value })
}

fn validate_shape_domain(beta: f64, kappa: f64) -> Result<()> {
    if !beta.is_finite() || !kappa.is_finite() {
        return Err(KentError::Domain(format!(
            "non-finite shape parameters beta={beta} kappa={kappa}"
        )));
    }
    if beta < 0.0 || kappa <= 0.0 || 2.0 * beta >= kappa {
        return Err(KentError::Domain(format!(
            "shape parameters must satisfy 0 <= 2*beta < kappa, got beta={beta} kappa={kappa}"
        )));
    }
    Ok(())
}

/// Exact Kent normalizer, in log domain:
///
///   C(β, κ) = 2π Σ_{i≥0} Γ(i+1/2)/Γ(i+1) · β^{2i} (κ/2)^{−2i−1/2} I_{2i+1/2}(κ).
///
/// The sum starts at i = 0 so that β = 0 recovers the von Mises-Fisher
/// normalizer 4π sinh(κ)/κ. Terms decrease geometrically under 2β < κ;
/// the series is truncated once a term's relative contribution drops below
/// `rel_tol`, and hitting [`MAX_SERIES_TERMS`] is a convergence error.
pub fn log_kent_normalizer_exact(beta: f64, kappa: f64, rel_tol: f64) -> Result<LogValue> {
    validate_shape_domain(beta, kappa)?;
    if !rel_tol.is_finite() || rel_tol <= 0.0 {
        return Err(KentError::Domain(format!(
            "rel_tol must be a positive finite real, got {rel_tol}"
        )));
    }
    let log_two_pi = (2.0 * std::f64::consts::PI).ln();
    let log_half_kappa = (kappa / 2.0).ln();
    let term = |i: u64| -> Result<f64> {
        let fi = i as f64;
        Ok(ln_gamma_half(i) - ln_factorial(i) + 2.0 * fi * beta.ln()
            - (2.0 * fi + 0.5) * log_half_kappa
            + log_bessel_i_half_order(2 * i, kappa)?)
    };
    // At β = 0 only the i = 0 term survives; 2i·ln β would be NaN at i = 0
    // otherwise (0·(−∞)).
    let mut log_sum = ln_gamma_half(0) - 0.5 * log_half_kappa + log_bessel_i_half_order(0, kappa)?;
    if beta > 0.0 {
        let log_rel_tol = rel_tol.ln();
        let mut converged = false;
        for i in 1..=MAX_SERIES_TERMS as u64 {
            let log_term = term(i)?;
            log_sum = crate::numeric::log_add_exp(log_sum, log_term);
            if log_term - log_sum < log_rel_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(KentError::Convergence(format!(
                "normalizer series at beta={beta} kappa={kappa} exceeded {MAX_SERIES_TERMS} terms"
            )));
        }
    }
    Ok(LogValue {
        value: log_two_pi + log_sum,
    })
}

/// Large-κ approximate normalizer, log C̃(β, κ) = log 2π + κ − ½ log(κ² − 4β²),
/// with the discriminant factored as (κ − 2β)(κ + 2β) for accuracy near the
/// constraint cone.
pub fn log_kent_normalizer_approx(beta: f64, kappa: f64) -> Result<LogValue> {
    validate_shape_domain(beta, kappa)?;
    let log_disc = (kappa - 2.0 * beta).ln() + (kappa + 2.0 * beta).ln();
    Ok(LogValue {
        value: (2.0 * std::f64::consts::PI).ln() + kappa - 0.5 * log_disc,
    })
}
