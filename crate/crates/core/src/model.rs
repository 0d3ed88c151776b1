//! Domain types for data and parameters on S², plus density and likelihood
//! evaluation for single Kent components and g-component mixtures.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{KentError, Result};
use crate::numeric::{log_sum_exp, pairwise_sum};
use crate::special::{log_kent_normalizer_exact, DEFAULT_REL_TOL};

/// Tolerance for the unit-norm and orthonormality invariants.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Default floors B̄ and K̄ bounding β and κ − 2β away from zero.
pub const DEFAULT_BBAR: f64 = 1e-5;
pub const DEFAULT_KBAR: f64 = 1e-5;

/// A point on the unit sphere S².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    /// Accepts a vector already unit-norm within [`GEOMETRY_TOL`] and
    /// renormalizes away the residual.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > GEOMETRY_TOL {
            return Err(KentError::Domain(format!(
                "vector norm {norm} is not 1 within {GEOMETRY_TOL}"
            )));
        }
        Ok(UnitVector3(v / norm))
    }

    /// Normalizes an arbitrary vector onto S². Vectors with norm below
    /// 1e-12 have no direction and are rejected.
    pub fn from_unnormalized(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(KentError::Domain(format!(
                "cannot normalize vector with norm {norm}"
            )));
        }
        Ok(UnitVector3(v / norm))
    }

    pub fn from_coords(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector3::new(x, y, z))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &Vector3<f64>) -> f64 {
        self.0.dot(other)
    }
}

/// An orthonormal frame Ξ = [ξ1 ξ2 ξ3] on V3(R³): ξ1 the mean direction,
/// ξ2 the major axis, ξ3 the minor axis. Determinant may be ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame3 {
    matrix: Matrix3<f64>,
}

impl Frame3 {
    pub fn new(matrix: Matrix3<f64>) -> Result<Self> {
        if matrix.iter().any(|e| !e.is_finite()) {
            return Err(KentError::Domain("frame has non-finite entries".into()));
        }
        let gram = matrix.transpose() * matrix;
        let max_dev = (gram - Matrix3::identity())
            .iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()));
        if max_dev > GEOMETRY_TOL {
            return Err(KentError::Domain(format!(
                "frame is not orthonormal: max |ΞᵀΞ − I| = {max_dev}"
            )));
        }
        Ok(Frame3 { matrix })
    }

    pub fn from_columns(xi1: &UnitVector3, xi2: &UnitVector3, xi3: &UnitVector3) -> Result<Self> {
        Self::new(Matrix3::from_columns(&[
            *xi1.as_vector(),
            *xi2.as_vector(),
            *xi3.as_vector(),
        ]))
    }

    pub fn identity() -> Self {
        Frame3 {
            matrix: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn xi1(&self) -> Vector3<f64> {
        self.matrix.column(0).into_owned()
    }

    pub fn xi2(&self) -> Vector3<f64> {
        self.matrix.column(1).into_owned()
    }

    pub fn xi3(&self) -> Vector3<f64> {
        self.matrix.column(2).into_owned()
    }
}

/// Parameters (β, κ, Ξ) of one Kent component, 0 ≤ 2β < κ.
///
/// The constructor enforces the mathematical domain; the fitter additionally
/// keeps β ≥ B̄ and κ − 2β ≥ K̄ for its configured floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KentParams {
    beta: f64,
    kappa: f64,
    frame: Frame3,
}

impl KentParams {
    pub fn new(beta: f64, kappa: f64, frame: Frame3) -> Result<Self> {
        if !beta.is_finite() || !kappa.is_finite() || beta < 0.0 || kappa <= 0.0 {
            return Err(KentError::Domain(format!(
                "invalid shape parameters beta={beta} kappa={kappa}"
            )));
        }
        if 2.0 * beta >= kappa {
            return Err(KentError::Domain(format!(
                "constraint 2*beta < kappa violated: beta={beta} kappa={kappa}"
            )));
        }
        Ok(KentParams { beta, kappa, frame })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn frame(&self) -> &Frame3 {
        &self.frame
    }

    pub fn satisfies_floors(&self, bbar: f64, kbar: f64) -> bool {
        self.beta >= bbar && self.kappa - 2.0 * self.beta >= kbar
    }
}

/// A g-component mixture: weights π on the simplex plus per-component
/// Kent parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    weights: Vec<f64>,
    components: Vec<KentParams>,
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, components: Vec<KentParams>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(KentError::Domain(format!(
                "need g >= 1 with matching weights ({}) and components ({})",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(KentError::Domain("weights must be finite and >= 0".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(KentError::Domain(format!(
                "weights must sum to 1 within 1e-12, got {sum}"
            )));
        }
        Ok(MixtureModel {
            weights,
            components,
        })
    }

    pub fn g(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[KentParams] {
        &self.components
    }

    /// Canonical JSON: fixed field order, 17-significant-digit floats, no
    /// whitespace. Serialize → parse → serialize is byte-identical.
    pub fn to_canonical_json(&self) -> String {
        fn fmt(x: f64) -> String {
            format!("{x:.16e}")
        }
        let mut out = String::new();
        out.push_str(&format!("{{\"g\":{},\"weights\":[", self.g()));
        out.push_str(
            &self
                .weights
                .iter()
                .map(|w| fmt(*w))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str("],\"components\":[");
        let comps: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let m = c.frame.matrix();
                let rows: Vec<String> = (0..3)
                    .map(|r| {
                        format!(
                            "[{},{},{}]",
                            fmt(m[(r, 0)]),
                            fmt(m[(r, 1)]),
                            fmt(m[(r, 2)])
                        )
                    })
                    .collect();
                format!(
                    "{{\"beta\":{},\"kappa\":{},\"frame\":[{}]}}",
                    fmt(c.beta),
                    fmt(c.kappa),
                    rows.join(",")
                )
            })
            .collect();
        out.push_str(&comps.join(","));
        out.push_str("]}");
        out
    }

    /// Parses and validates the model JSON schema, rejecting any invariant
    /// violation (weight simplex, orthonormality, shape constraints).
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelJson = serde_json::from_str(text)
            .map_err(|e| KentError::Format(format!("model json: {e}")))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    beta: f64,
    kappa: f64,
    frame: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    g: usize,
    weights: Vec<f64>,
    components: Vec<ComponentJson>,
}

impl TryFrom<ModelJson> for MixtureModel {
    type Error = KentError;

    fn try_from(raw: ModelJson) -> Result<Self> {
        if raw.g != raw.weights.len() || raw.g != raw.components.len() {
            return Err(KentError::Format(format!(
                "g={} does not match weights ({}) and components ({})",
                raw.g,
                raw.weights.len(),
                raw.components.len()
            )));
        }
        let components = raw
            .components
            .into_iter()
            .map(|c| {
                let m = Matrix3::from_fn(|r, col| c.frame[r][col]);
                KentParams::new(c.beta, c.kappa, Frame3::new(m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureModel::new(raw.weights, components)
    }
}

/// Posterior component-membership probabilities, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    data: Vec<f64>,
    n: usize,
    g: usize,
}

impl Responsibilities {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.g..(i + 1) * self.g]
    }

    pub fn column_sum(&self, z: usize) -> f64 {
        (0..self.n).map(|i| self.row(i)[z]).sum()
    }
}

fn kernel_terms(x: &UnitVector3, p: &KentParams) -> (f64, f64, f64) {
    let u = x.dot(&p.frame().xi1());
    let v = x.dot(&p.frame().xi2());
    let w = x.dot(&p.frame().xi3());
    (u, v, w)
}

/// Exact log-density: κ(xᵀξ1) + β(xᵀξ2)² − β(xᵀξ3)² − log C(β, κ).
pub fn log_density_exact(x: &UnitVector3, p: &KentParams) -> Result<f64> {
    let (u, v, w) = kernel_terms(x, p);
    let log_c = log_kent_normalizer_exact(p.beta(), p.kappa(), DEFAULT_REL_TOL)?;
    Ok(p.kappa() * u + p.beta() * (v * v - w * w) - log_c.value)
}

/// Approximate log-density with C̃ in place of C, evaluated in the folded
/// form κ[(xᵀξ1) − 1] + β[(xᵀξ2)² − (xᵀξ3)²] + ½log(κ² − 4β²) − log 2π
/// so that e^κ is never formed. log(κ² − 4β²) is computed factored as
/// log(κ − 2β) + log(κ + 2β), which stays accurate when 2β is close to κ.
pub fn log_density_approx(x: &UnitVector3, p: &KentParams) -> f64 {
    let (u, v, w) = kernel_terms(x, p);
    let log_disc = (p.kappa() - 2.0 * p.beta()).ln() + (p.kappa() + 2.0 * p.beta()).ln();
    p.kappa() * (u - 1.0) + p.beta() * (v * v - w * w) + 0.5 * log_disc
        - (2.0 * std::f64::consts::PI).ln()
}

fn log_mixture_terms(x: &UnitVector3, m: &MixtureModel, buf: &mut Vec<f64>) {
    buf.clear();
    for (w, p) in m.weights().iter().zip(m.components()) {
        buf.push(w.ln() + log_density_approx(x, p));
    }
}

/// Approximate log-likelihood Σ_i log Σ_z π_z f̃_K(x_i; ψ_z). The inner sum
/// is a log-sum-exp; the outer sum uses a fixed pairwise reduction so the
/// result does not depend on evaluation chunking.
pub fn approx_log_likelihood(data: &[UnitVector3], m: &MixtureModel) -> Result<f64> {
    if data.is_empty() {
        return Err(KentError::Domain("likelihood of an empty dataset".into()));
    }
    let mut buf = Vec::with_capacity(m.g());
    let per_point: Vec<f64> = data
        .iter()
        .map(|x| {
            log_mixture_terms(x, m, &mut buf);
            log_sum_exp(&buf)
        })
        .collect();
    Ok(pairwise_sum(&per_point))
}

/// Row-stochastic responsibility matrix τ_iz, computed in log domain and
/// renormalized so that every row sums to 1 within 1e-12.
pub fn responsibilities(data: &[UnitVector3], m: &MixtureModel) -> Result<Responsibilities> {
    if data.is_empty() {
        return Err(KentError::Domain(
            "responsibilities of an empty dataset".into(),
        ));
    }
    let g = m.g();
    let mut out = Vec::with_capacity(data.len() * g);
    let mut buf = Vec::with_capacity(g);
    for x in data {
        log_mixture_terms(x, m, &mut buf);
        let lse = log_sum_exp(&buf);
        let start = out.len();
        out.extend(buf.iter().map(|&lw| (lw - lse).exp()));
        let row_sum: f64 = out[start..].iter().sum();
        for t in &mut out[start..] {
            *t /= row_sum;
        }
    }
    Ok(Responsibilities {
        data: out,
        n: data.len(),
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize) -> UnitVector3 {
        let mut v = Vector3::zeros();
        v[i] = 1.0;
        UnitVector3::new(v).unwrap()
    }

    fn rotated_frame() -> Frame3 {
        // ξ1 = e2, ξ2 = e3, ξ3 = e1
        Frame3::from_columns(&e(1), &e(2), &e(0)).unwrap()
    }

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector3::from_coords(1.0, 0.0, 0.0).is_ok());
        assert!(UnitVector3::from_coords(0.5, 0.5, 0.5).is_err());
        assert!(UnitVector3::from_coords(f64::NAN, 0.0, 0.0).is_err());
        let v = UnitVector3::from_unnormalized(Vector3::new(3.0, 4.0, 0.0)).unwrap();
        assert!((v.coords()[0] - 0.6).abs() < 1e-15);
        assert!((v.coords()[1] - 0.8).abs() < 1e-15);
        assert!(UnitVector3::from_unnormalized(Vector3::zeros()).is_err());
    }

    #[test]
    fn frame_validation() {
        assert!(Frame3::new(Matrix3::identity()).is_ok());
        assert!(Frame3::new(Matrix3::identity() * 1.1).is_err());
        // determinant −1 is allowed
        let m = Matrix3::from_columns(&[
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
        ]);
        assert!(Frame3::new(m).is_ok());
    }

    #[test]
    fn kent_params_domain() {
        assert!(KentParams::new(0.0, 2.0, Frame3::identity()).is_ok());
        assert!(KentParams::new(1.0, 2.0, Frame3::identity()).is_err());
        assert!(KentParams::new(-0.1, 2.0, Frame3::identity()).is_err());
        assert!(KentParams::new(0.0, 0.0, Frame3::identity()).is_err());
    }

    #[test]
    fn mixture_weights_must_be_a_simplex() {
        let p = KentParams::new(0.0, 2.0, Frame3::identity()).unwrap();
        assert!(MixtureModel::new(vec![0.5, 0.5], vec![p, p]).is_ok());
        assert!(MixtureModel::new(vec![0.6, 0.5], vec![p, p]).is_err());
        assert!(MixtureModel::new(vec![], vec![]).is_err());
        assert!(MixtureModel::new(vec![1.0], vec![p, p]).is_err());
        // a zero weight is a degenerate but valid mixture
        assert!(MixtureModel::new(vec![1.0, 0.0], vec![p, p]).is_ok());
    }

    #[test]
    fn exact_density_frozen_values() {
        // x = ξ1, β = 0, κ = 2: κ − log C(0, 2)
        let p = KentParams::new(0.0, 2.0, Frame3::identity()).unwrap();
        let got = log_density_exact(&e(0), &p).unwrap();
        assert!((got - (-1.1262444390235136)).abs() < 1e-12);
        // x = ξ2 ⟂ ξ1 at β = 0: exponent vanishes
        let got = log_density_exact(&e(1), &p).unwrap();
        let log_c = log_kent_normalizer_exact(0.0, 2.0, 1e-12).unwrap().value;
        assert!((got + log_c).abs() < 1e-14);
    }

    #[test]
    fn approx_density_frozen_values() {
        let p = KentParams::new(0.0, 10.0, Frame3::identity()).unwrap();
        let got = log_density_approx(&e(0), &p);
        assert!((got - 0.4647080265847002).abs() < 1e-13);

        let p = KentParams::new(1.0, 10.0, Frame3::identity()).unwrap();
        let got = log_density_approx(&e(1), &p);
        assert!((got - (-8.555702970675428)).abs() < 1e-12);
    }

    #[test]
    fn approx_density_invariant_to_negating_minor_axes() {
        let p = KentParams::new(1.5, 7.0, rotated_frame()).unwrap();
        let flipped = Frame3::new(Matrix3::from_columns(&[
            p.frame().xi1(),
            -p.frame().xi2(),
            -p.frame().xi3(),
        ]))
        .unwrap();
        let q = KentParams::new(1.5, 7.0, flipped).unwrap();
        let x = UnitVector3::from_unnormalized(Vector3::new(0.3, -0.2, 0.9)).unwrap();
        assert_eq!(log_density_approx(&x, &p), log_density_approx(&x, &q));
    }

    #[test]
    fn likelihood_single_component_is_density_sum() {
        let p = KentParams::new(0.5, 5.0, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![1.0], vec![p]).unwrap();
        let data = vec![e(0), e(1), e(2)];
        let expected: f64 = data.iter().map(|x| log_density_approx(x, &p)).sum();
        let got = approx_log_likelihood(&data, &m).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn likelihood_doubles_on_duplicated_data() {
        let p1 = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let p2 = KentParams::new(1.0, 6.0, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![0.4, 0.6], vec![p1, p2]).unwrap();
        let data = vec![
            e(0),
            UnitVector3::from_coords(0.6, 0.8, 0.0).unwrap(),
            UnitVector3::from_unnormalized(Vector3::new(1.0, 1.0, 1.0)).unwrap(),
        ];
        let single = approx_log_likelihood(&data, &m).unwrap();
        let doubled: Vec<_> = data.iter().chain(data.iter()).cloned().collect();
        let got = approx_log_likelihood(&doubled, &m).unwrap();
        assert_eq!(got, 2.0 * single);
    }

    #[test]
    fn likelihood_matches_extended_precision_oracle() {
        // three-point, two-component value frozen from a 40-digit evaluation
        let p1 = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let p2 = KentParams::new(1.0, 6.0, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![0.4, 0.6], vec![p1, p2]).unwrap();
        let data = vec![
            e(0),
            UnitVector3::from_coords(0.6, 0.8, 0.0).unwrap(),
            UnitVector3::from_unnormalized(Vector3::new(1.0, 1.0, 1.0)).unwrap(),
        ];
        let got = approx_log_likelihood(&data, &m).unwrap();
        assert!((got - (-5.529154130244968)).abs() < 1e-12);
    }

    #[test]
    fn likelihood_invariant_under_component_permutation() {
        let p1 = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let p2 = KentParams::new(1.0, 6.0, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![0.4, 0.6], vec![p1, p2]).unwrap();
        let perm = MixtureModel::new(vec![0.6, 0.4], vec![p2, p1]).unwrap();
        let data = vec![
            e(0),
            e(2),
            UnitVector3::from_unnormalized(Vector3::new(-1.0, 2.0, 0.5)).unwrap(),
        ];
        let a = approx_log_likelihood(&data, &m).unwrap();
        let b = approx_log_likelihood(&data, &perm).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn likelihood_rejects_empty_data() {
        let p = KentParams::new(0.0, 2.0, Frame3::identity()).unwrap();
        let m = MixtureModel::new(vec![1.0], vec![p]).unwrap();
        assert!(approx_log_likelihood(&[], &m).is_err());
        assert!(responsibilities(&[], &m).is_err());
    }

    #[test]
    fn responsibilities_of_identical_components_are_uniform() {
        let p = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let m = MixtureModel::new(vec![0.25; 4], vec![p; 4]).unwrap();
        let resp = responsibilities(&[e(0), e(2)], &m).unwrap();
        for i in 0..2 {
            for &t in resp.row(i) {
                assert!((t - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn responsibilities_with_degenerate_weight() {
        let p = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let q = KentParams::new(1.0, 9.0, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![1.0, 0.0], vec![p, q]).unwrap();
        let resp = responsibilities(&[e(0), e(1), e(2)], &m).unwrap();
        for i in 0..3 {
            assert_eq!(resp.row(i), &[1.0, 0.0]);
        }
    }

    #[test]
    fn responsibilities_reduce_to_weights_at_equal_density() {
        let p = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let m = MixtureModel::new(vec![0.3, 0.7], vec![p, p]).unwrap();
        let resp = responsibilities(&[e(2)], &m).unwrap();
        assert!((resp.row(0)[0] - 0.3).abs() < 1e-15);
        assert!((resp.row(0)[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn model_json_round_trip_is_byte_identical() {
        let p1 = KentParams::new(0.5, 4.0, Frame3::identity()).unwrap();
        let p2 = KentParams::new(1.0 / 3.0, 6.7, rotated_frame()).unwrap();
        // shape values seen to fall between rounding boundaries of fast
        // float parsers
        let p3 = KentParams::new(5.510026914329155, 38.621493435440236, rotated_frame()).unwrap();
        let m = MixtureModel::new(vec![0.4, 0.35, 0.25], vec![p1, p2, p3]).unwrap();
        let json = m.to_canonical_json();
        let parsed = MixtureModel::from_json(&json).unwrap();
        assert_eq!(parsed.to_canonical_json(), json);
        assert_eq!(parsed, m);
    }

    #[test]
    fn model_json_rejects_invariant_violations() {
        // weights off the simplex
        let bad = r#"{"g":1,"weights":[0.9],"components":[{"beta":0.0,"kappa":2.0,"frame":[[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        assert!(MixtureModel::from_json(bad).is_err());
        // non-orthonormal frame
        let bad = r#"{"g":1,"weights":[1.0],"components":[{"beta":0.0,"kappa":2.0,"frame":[[1,0,0],[0,1,0],[0,1,1]]}]}"#;
        assert!(MixtureModel::from_json(bad).is_err());
        // 2β ≥ κ
        let bad = r#"{"g":1,"weights":[1.0],"components":[{"beta":1.0,"kappa":2.0,"frame":[[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        assert!(MixtureModel::from_json(bad).is_err());
        // g mismatch
        let bad = r#"{"g":2,"weights":[1.0],"components":[{"beta":0.0,"kappa":2.0,"frame":[[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        assert!(MixtureModel::from_json(bad).is_err());
        // not json at all
        assert!(MixtureModel::from_json("{").is_err());
    }

    proptest! {
        #[test]
        fn responsibility_rows_sum_to_one(
            seedv in prop::array::uniform32(0u8..=255),
            g in 1usize..4,
            n in 1usize..6,
        ) {
            use rand::SeedableRng;
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha8Rng::from_seed(seedv);
            let mut comps = Vec::new();
            let mut weights = Vec::new();
            for _ in 0..g {
                let kappa = 0.5 + 49.5 * rng.random::<f64>();
                let beta = 0.49 * kappa * rng.random::<f64>();
                let raw = Matrix3::from_fn(|_, _| rng.random::<f64>() * 2.0 - 1.0);
                let q = crate::stiefel::qr_positive(&raw).unwrap();
                comps.push(KentParams::new(beta, kappa, Frame3::new(q).unwrap()).unwrap());
                weights.push(rng.random::<f64>() + 1e-3);
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights { *w /= total; }
            let residual: f64 = 1.0 - weights.iter().sum::<f64>();
            weights[0] += residual;
            let m = MixtureModel::new(weights, comps).unwrap();
            let data: Vec<UnitVector3> = (0..n)
                .map(|_| {
                    let v = Vector3::new(
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                    );
                    UnitVector3::from_unnormalized(v + Vector3::new(0.0, 0.0, 1e-6)).unwrap()
                })
                .collect();
            let resp = responsibilities(&data, &m).unwrap();
            for i in 0..n {
                let s: f64 = resp.row(i).iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
                prop_assert!(resp.row(i).iter().all(|&t| (0.0..=1.0).contains(&t)));
            }
        }
    }
}
