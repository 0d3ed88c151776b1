//! Exact solver for the per-component concave shape subproblem:
//! maximize a·log(κ² − 4β²) + b·κ + c·β over β ≥ B̄, κ − 2β ≥ K̄.
//!
//! The problem is two-dimensional and concave, so instead of a generic
//! constrained solver we enumerate the KKT cases: the closed-form interior
//! stationary point when it is feasible, otherwise the two one-dimensional
//! edge problems (β pinned at its floor; κ − 2β pinned at its floor), whose
//! first-order conditions are a quadratic and a linear equation.

use crate::error::{KentError, Result};

/// Coefficients (a, b, c) of one shape subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ShapeCoefficients {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || a <= 0.0 {
            return Err(KentError::Domain(format!(
                "shape coefficients need finite values with a > 0, got a={a} b={b} c={c}"
            )));
        }
        Ok(ShapeCoefficients { a, b, c })
    }
}

/// The maximizer of one shape subproblem with per-constraint activity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSolution {
    pub beta: f64,
    pub kappa: f64,
    pub objective: f64,
    /// β sits on the floor B̄.
    pub beta_on_floor: bool,
    /// κ − 2β sits on the floor K̄.
    pub kappa_gap_on_floor: bool,
}

/// Objective a·log(κ² − 4β²) + bκ + cβ, with the log argument factored as
/// (κ − 2β)(κ + 2β) to stay accurate near the constraint cone.
pub(crate) fn shape_objective(coef: &ShapeCoefficients, beta: f64, kappa: f64) -> f64 {
    coef.a * ((kappa - 2.0 * beta).ln() + (kappa + 2.0 * beta).ln()) + coef.b * kappa
        + coef.c * beta
}

#[derive(Clone, Copy)]
struct Candidate {
    beta: f64,
    kappa: f64,
    beta_on_floor: bool,
    kappa_gap_on_floor: bool,
}

/// Global maximizer of the concave objective over the closed feasible set.
///
/// Requires b < 0 and 2b + c < 0; otherwise the supremum is +∞ (along
/// growing κ, respectively along the cone κ = 2β + K̄) and the call fails
/// with an unbounded-objective error.
pub fn solve_shape(coef: &ShapeCoefficients, bbar: f64, kbar: f64) -> Result<ShapeSolution> {
    let (a, b, c) = (coef.a, coef.b, coef.c);
    if !(bbar > 0.0 && kbar > 0.0 && bbar.is_finite() && kbar.is_finite()) {
        return Err(KentError::Domain(format!(
            "floors must be positive finite, got bbar={bbar} kbar={kbar}"
        )));
    }
    if b >= 0.0 {
        return Err(KentError::UnboundedObjective(format!(
            "b = {b} >= 0: objective grows without bound in kappa"
        )));
    }
    if 2.0 * b + c >= 0.0 {
        return Err(KentError::UnboundedObjective(format!(
            "2b + c = {} >= 0: objective grows without bound along kappa = 2*beta",
            2.0 * b + c
        )));
    }

    let mut candidates: Vec<Candidate> = Vec::with_capacity(3);

    // Interior stationary point from the first-order conditions.
    let denom = 4.0 * b * b - c * c;
    if denom > 0.0 {
        let kappa = -8.0 * a * b / denom;
        let beta = 2.0 * a * c / denom;
        if beta > bbar && kappa - 2.0 * beta > kbar {
            candidates.push(Candidate {
                beta,
                kappa,
                beta_on_floor: false,
                kappa_gap_on_floor: false,
            });
        }
    }

    // Edge β = B̄: the FOC 2aκ/(κ² − 4B̄²) = −b is the quadratic
    // bκ² + 2aκ − 4bB̄² = 0 with a unique root above 2B̄.
    {
        let root = (a + (a * a + 4.0 * b * b * bbar * bbar).sqrt()) / (-b);
        let kappa = root.max(2.0 * bbar + kbar);
        candidates.push(Candidate {
            beta: bbar,
            kappa,
            beta_on_floor: true,
            kappa_gap_on_floor: kappa <= 2.0 * bbar + kbar,
        });
    }

    // Edge κ = 2β + K̄: substituting gives the concave 1-D problem
    // a·log(K̄(4β + K̄)) + (2b + c)β + bK̄ with linear FOC.
    {
        let s = 2.0 * b + c;
        let root = -a / s - kbar / 4.0;
        let beta = root.max(bbar);
        candidates.push(Candidate {
            beta,
            kappa: 2.0 * beta + kbar,
            beta_on_floor: beta <= bbar,
            kappa_gap_on_floor: true,
        });
    }

    // Best candidate; ties broken toward smaller κ.
    let mut best: Option<(Candidate, f64)> = None;
    for cand in candidates {
        let value = shape_objective(coef, cand.beta, cand.kappa);
        if !value.is_finite() {
            continue;
        }
        best = match best {
            None => Some((cand, value)),
            Some((bc, bv)) => {
                if value > bv || (value == bv && cand.kappa < bc.kappa) {
                    Some((cand, value))
                } else {
                    Some((bc, bv))
                }
            }
        };
    }
    let (cand, objective) = best.ok_or_else(|| {
        KentError::Domain("no feasible shape candidate; floors are inconsistent".into())
    })?;
    Ok(ShapeSolution {
        beta: cand.beta,
        kappa: cand.kappa,
        objective,
        beta_on_floor: cand.beta_on_floor,
        kappa_gap_on_floor: cand.kappa_gap_on_floor,
    })
}
