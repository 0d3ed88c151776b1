//! Monotone ascent for the frame subproblem on the Stiefel manifold V3(R³):
//! maximize κ·mᵀξ1 + β(ξ2ᵀSξ2 − ξ3ᵀSξ3) over orthonormal frames Ξ.
//!
//! The block update only needs a frame whose objective strictly improves on
//! the previous one, so projected-gradient ascent with a QR retraction and a
//! backtracking line search is enough; geodesic machinery is deliberately
//! avoided. The search never accepts a non-improving step, which gives the
//! generalized block-ascent increase condition for free.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{KentError, Result};
use crate::model::{Frame3, UnitVector3};

/// Sufficient statistics of the frame subproblem for one component:
/// m = Σ τ_i x_i and S = Σ τ_i x_i x_iᵀ, with the component's (κ, β).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObjective {
    kappa: f64,
    beta: f64,
    m: Vector3<f64>,
    s: Matrix3<f64>,
}

impl FrameObjective {
    pub fn new(kappa: f64, beta: f64, m: Vector3<f64>, s: Matrix3<f64>) -> Result<Self> {
        if !kappa.is_finite() || !beta.is_finite() || kappa < 0.0 || beta < 0.0 {
            return Err(KentError::Domain(format!(
                "frame objective needs finite kappa >= 0 and beta >= 0, got {kappa}, {beta}"
            )));
        }
        if m.iter().any(|e| !e.is_finite()) || s.iter().any(|e| !e.is_finite()) {
            return Err(KentError::Domain(
                "frame objective statistics must be finite".into(),
            ));
        }
        let asym = (s - s.transpose()).norm();
        if asym > 1e-12 * (1.0 + s.norm()) {
            return Err(KentError::Domain(format!(
                "scatter matrix is not symmetric: |S - Sᵀ| = {asym}"
            )));
        }
        Ok(FrameObjective {
            kappa,
            beta,
            m,
            s: (s + s.transpose()) * 0.5,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Line-search controls for [`ascend_frame`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    pub max_steps: usize,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub grad_tol: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            max_steps: 50,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            grad_tol: 1e-8,
        }
    }
}

const MAX_BACKTRACKS: usize = 30;
const ARMIJO_SLOPE: f64 = 1e-4;

/// κ·mᵀξ1 + β(ξ2ᵀSξ2 − ξ3ᵀSξ3).
pub fn frame_objective_value(frame: &Frame3, obj: &FrameObjective) -> f64 {
    let xi2 = frame.xi2();
    let xi3 = frame.xi3();
    obj.kappa * obj.m.dot(&frame.xi1()) + obj.beta * (xi2.dot(&(obj.s * xi2)) - xi3.dot(&(obj.s * xi3)))
}

/// Euclidean gradient G = [κm | 2βSξ2 | −2βSξ3] projected onto the tangent
/// space at Ξ: G − Ξ·sym(ΞᵀG).
pub fn riemannian_gradient(frame: &Frame3, obj: &FrameObjective) -> Matrix3<f64> {
    let g = Matrix3::from_columns(&[
        obj.kappa * obj.m,
        2.0 * obj.beta * (obj.s * frame.xi2()),
        -2.0 * obj.beta * (obj.s * frame.xi3()),
    ]);
    let xtg = frame.matrix().transpose() * g;
    let sym = (xtg + xtg.transpose()) * 0.5;
    g - frame.matrix() * sym
}

/// Thin-QR factorization with the diagonal of R forced positive by column
/// sign flips; rank deficiency is an error.
pub(crate) fn qr_positive(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    let scale = 1.0 + m.norm();
    for j in 0..3 {
        let d = r[(j, j)];
        if d.abs() < 1e-12 * scale {
            return Err(KentError::Retraction(format!(
                "rank-deficient target, |R[{j},{j}]| = {}",
                d.abs()
            )));
        }
        if d < 0.0 {
            for i in 0..3 {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}

/// QR retraction of Ξ + step back onto the manifold. A zero step returns
/// the input frame unchanged.
pub fn retract(frame: &Frame3, step: &Matrix3<f64>) -> Result<Frame3> {
    if step.iter().all(|e| *e == 0.0) {
        return Ok(*frame);
    }
    Frame3::new(qr_positive(&(frame.matrix() + step))?)
}

/// Backtracking projected-gradient ascent. The returned frame's objective
/// is never below the input's; it is strictly above whenever the tangent
/// gradient norm exceeds `grad_tol` and a backtracked step succeeds.
pub fn ascend_frame(frame: &Frame3, obj: &FrameObjective, cfg: &AscentConfig) -> Frame3 {
    let mut current = *frame;
    let mut value = frame_objective_value(&current, obj);
    for _ in 0..cfg.max_steps {
        let grad = riemannian_gradient(&current, obj);
        let gnorm = grad.norm();
        if gnorm <= cfg.grad_tol {
            break;
        }
        let direction = grad / gnorm;
        let mut t = cfg.initial_step;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            if let Ok(cand) = retract(&current, &(direction * t)) {
                let cand_value = frame_objective_value(&cand, obj);
                if cand_value > value + ARMIJO_SLOPE * t * gnorm {
                    current = cand;
                    value = cand_value;
                    accepted = true;
                    break;
                }
            }
            t *= cfg.backtrack_factor;
        }
        if !accepted {
            break;
        }
    }
    current
}

/// Deterministic pair of unit vectors completing `v` to an orthonormal
/// basis of R³.
pub(crate) fn orthonormal_complement(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let mut axis = 0;
    for j in 1..3 {
        if v[j].abs() < v[axis].abs() {
            axis = j;
        }
    }
    let mut e = Vector3::zeros();
    e[axis] = 1.0;
    let p = (e - v * v[axis]).normalize();
    let q = v.cross(&p);
    (p, q)
}

/// Moment-based frame: ξ1 along the weighted resultant, ξ2/ξ3 the major and
/// minor axes of the weighted scatter projected orthogonally to ξ1, with a
/// Gram-Schmidt cleanup.
pub fn moment_init_frame(data: &[UnitVector3], weights: &[f64]) -> Result<Frame3> {
    if data.len() != weights.len() || data.is_empty() {
        return Err(KentError::Domain(format!(
            "need matching nonempty data ({}) and weights ({})",
            data.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(KentError::Domain("weights must be finite and >= 0".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(KentError::DegenerateData("all weights are zero".into()));
    }
    let mut m = Vector3::zeros();
    let mut scatter = Matrix3::zeros();
    for (x, &w) in data.iter().zip(weights) {
        let v = x.as_vector();
        m += w * v;
        scatter += w * (v * v.transpose());
    }
    if m.norm() < 1e-12 {
        return Err(KentError::DegenerateData(
            "weighted resultant is zero; no mean direction".into(),
        ));
    }
    let xi1 = m.normalize();
    let proj = Matrix3::identity() - xi1 * xi1.transpose();
    let reduced = proj * scatter * proj;
    let eig = nalgebra::SymmetricEigen::new((reduced + reduced.transpose()) * 0.5);
    // Drop the eigenvector closest to ξ1 (its eigenvalue is ~0 by
    // construction), order the remaining two by descending eigenvalue.
    let mut idx: Vec<usize> = (0..3).collect();
    let align = |j: usize| eig.eigenvectors.column(j).dot(&xi1).abs();
    let drop = (0..3)
        .max_by(|&i, &j| align(i).partial_cmp(&align(j)).unwrap())
        .unwrap();
    idx.retain(|&j| j != drop);
    idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let mut xi2 = eig.eigenvectors.column(idx[0]).into_owned();
    let mut xi3 = eig.eigenvectors.column(idx[1]).into_owned();
    // Gram-Schmidt cleanup against ξ1.
    xi2 -= xi1 * xi1.dot(&xi2);
    if xi2.norm() < 1e-9 {
        let (p, q) = orthonormal_complement(&xi1);
        xi2 = p;
        xi3 = q;
    } else {
        xi2 = xi2.normalize();
        xi3 -= xi1 * xi1.dot(&xi3) + xi2 * xi2.dot(&xi3);
        if xi3.norm() < 1e-9 {
            xi3 = xi1.cross(&xi2);
        } else {
            xi3 = xi3.normalize();
        }
    }
    Frame3::new(Matrix3::from_columns(&[xi1, xi2, xi3]))
}

/// Uniform draw from V3(R³): QR of a 3×3 standard-normal matrix with the
/// positive-diagonal sign convention (Box-Muller normals).
pub(crate) fn uniform_random_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame3 {
    loop {
        let mut normals = [0.0_f64; 10];
        for pair in normals.chunks_mut(2) {
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            let angle = 2.0 * std::f64::consts::PI * u2;
            pair[0] = r * angle.cos();
            if pair.len() > 1 {
                pair[1] = r * angle.sin();
            }
        }
        let m = Matrix3::from_fn(|r, c| normals[3 * r + c]);
        if let Ok(q) = qr_positive(&m) {
            if let Ok(frame) = Frame3::new(q) {
                return frame;
            }
        }
    }
}
