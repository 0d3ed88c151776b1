//! Seeded sampling on S² and V3(R³), and runners for the four simulation
//! studies with their MSE / selection-count / ARI metrics.
//!
//! Study layouts (all generative components are von Mises-Fisher, β = 0):
//!   s1: g = 3, κ = 10, π = 1/3, mean directions e1, e2, e3
//!   s2: g = 6, κ = 20, π = 1/6, mean directions ±e1, ±e2, ±e3
//!   s3: g = 5, κ = 10, π = 1/5, frames drawn uniformly per repetition;
//!       each dataset is fitted for g in 2..=10 and the criterion argmin
//!       is recorded
//!   s4: data as in s1 with latent labels kept; the fitted model's MAP
//!       labels are scored with the adjusted Rand index

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KentError, Result};
use crate::fitter::{fit, FitConfig};
use crate::model::{Frame3, KentParams, MixtureModel, UnitVector3, DEFAULT_BBAR};
use crate::numeric::splitmix64;
use crate::selection::{adjusted_rand_index, map_classify, select_g, Labeling};
use crate::stiefel::{orthonormal_complement, uniform_random_frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    S1,
    S2,
    S3,
    S4,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::S1 => "s1",
            Study::S2 => "s2",
            Study::S3 => "s3",
            Study::S4 => "s4",
        }
    }
}

impl FromStr for Study {
    type Err = KentError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Study::S1),
            "s2" => Ok(Study::S2),
            "s3" => Ok(Study::S3),
            "s4" => Ok(Study::S4),
            other => Err(KentError::Domain(format!(
                "unknown study {other:?}; expected one of s1, s2, s3, s4"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StudySpec {
    pub study: Study,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Raw per-repetition metrics, retained in the serialized result for audit.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RepRecord {
    pub rep: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_loglik: Option<f64>,
    /// Squared weight errors per generative component after matching.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sq_err_pi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sq_err_kappa: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sq_err_xi: Option<Vec<f64>>,
    /// Smallest matched |ξ̂1ᵀξ1| across components (1 = perfect alignment).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_matched_dot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion_by_g: Option<BTreeMap<usize, f64>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StudyResult {
    pub study: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub failed_reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_kappa: Option<f64>,
    /// Per-component MSE of the mean direction, in generative order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bic_selection_counts: Option<BTreeMap<usize, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_criterion_by_g: Option<BTreeMap<usize, f64>>,
    pub per_rep: Vec<RepRecord>,
}

impl StudyResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study result serializes")
    }
}

/// n draws from vMF(μ, κ) on S² by the exact inverse CDF of the cosine of
/// the colatitude, W = 1 + κ⁻¹ log(u + (1−u)e^{−2κ}), plus a uniform
/// longitude in the plane orthogonal to μ.
pub fn sample_vmf<R: Rng + ?Sized>(
    mu: &UnitVector3,
    kappa: f64,
    n: usize,
    rng: &mut R,
) -> Vec<UnitVector3> {
    assert!(kappa > 0.0, "sample_vmf requires kappa > 0");
    let (p, q) = orthonormal_complement(mu.as_vector());
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let w = (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0);
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let r = (1.0 - w * w).max(0.0).sqrt();
        let v = r * (phi.cos() * p + phi.sin() * q) + w * mu.as_vector();
        out.push(UnitVector3::from_unnormalized(v).expect("vMF draw is a unit vector"));
    }
    out
}

/// Uniform draw from the Stiefel manifold V3(R³): sign-corrected QR of a
/// standard-normal 3×3 matrix.
pub fn sample_uniform_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame3 {
    uniform_random_frame(rng)
}

/// Samples n observations and their latent labels from a mixture whose
/// components are all at the vMF floor (β ≤ B̄); exact Kent sampling for
/// β above the floor is unsupported.
pub fn generate_mixture_sample<R: Rng + ?Sized>(
    model: &MixtureModel,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<UnitVector3>, Labeling)> {
    for (z, comp) in model.components().iter().enumerate() {
        if comp.beta() > DEFAULT_BBAR {
            return Err(KentError::UnsupportedSampling(format!(
                "component {z} has beta {} above the floor {DEFAULT_BBAR}",
                comp.beta()
            )));
        }
    }
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut z = model.g() - 1;
        for (j, w) in model.weights().iter().enumerate() {
            acc += w;
            if u < acc {
                z = j;
                break;
            }
        }
        let comp = &model.components()[z];
        let mu = UnitVector3::new(comp.frame().xi1())?;
        points.extend(sample_vmf(&mu, comp.kappa(), 1, rng));
        labels.push(z + 1);
    }
    Ok((points, Labeling::new(labels)?))
}

fn axis_component(direction: Vector3<f64>, kappa: f64) -> KentParams {
    let (p, q) = orthonormal_complement(&direction);
    let frame = Frame3::new(Matrix3::from_columns(&[direction, p, q])).expect("axis frame");
    KentParams::new(0.0, kappa, frame).expect("vMF component")
}

fn study_s1_model() -> MixtureModel {
    let comps = vec![
        axis_component(Vector3::x(), 10.0),
        axis_component(Vector3::y(), 10.0),
        axis_component(Vector3::z(), 10.0),
    ];
    MixtureModel::new(vec![1.0 / 3.0; 3], comps).expect("s1 model")
}

fn study_s2_model() -> MixtureModel {
    let comps = vec![
        axis_component(-Vector3::x(), 20.0),
        axis_component(-Vector3::y(), 20.0),
        axis_component(-Vector3::z(), 20.0),
        axis_component(Vector3::x(), 20.0),
        axis_component(Vector3::y(), 20.0),
        axis_component(Vector3::z(), 20.0),
    ];
    MixtureModel::new(vec![1.0 / 6.0; 6], comps).expect("s2 model")
}

fn study_s3_model<R: Rng + ?Sized>(rng: &mut R) -> MixtureModel {
    let comps: Vec<KentParams> = (0..5)
        .map(|_| {
            KentParams::new(0.0, 10.0, uniform_random_frame(rng)).expect("s3 component")
        })
        .collect();
    MixtureModel::new(vec![0.2; 5], comps).expect("s3 model")
}

/// Greedy angular matching: repeatedly pair the (truth, fitted) components
/// with the largest |ξ̂1ᵀξ1|. Returns the fitted index for each truth index.
pub fn greedy_match_components(truth: &[Vector3<f64>], fitted: &[Vector3<f64>]) -> Vec<usize> {
    let g = truth.len();
    assert_eq!(g, fitted.len());
    let mut assignment = vec![usize::MAX; g];
    let mut truth_used = vec![false; g];
    let mut fitted_used = vec![false; g];
    for _ in 0..g {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for t in 0..g {
            if truth_used[t] {
                continue;
            }
            for f in 0..g {
                if fitted_used[f] {
                    continue;
                }
                let score = truth[t].dot(&fitted[f]).abs();
                if score > best.2 {
                    best = (t, f, score);
                }
            }
        }
        assignment[best.0] = best.1;
        truth_used[best.0] = true;
        fitted_used[best.1] = true;
    }
    assignment
}

struct MatchedErrors {
    sq_err_pi: Vec<f64>,
    sq_err_kappa: Vec<f64>,
    sq_err_xi: Vec<f64>,
    min_matched_dot: f64,
}

fn matched_errors(truth: &MixtureModel, fitted: &MixtureModel) -> MatchedErrors {
    let truth_xi: Vec<Vector3<f64>> = truth.components().iter().map(|c| c.frame().xi1()).collect();
    let fitted_xi: Vec<Vector3<f64>> = fitted.components().iter().map(|c| c.frame().xi1()).collect();
    let assignment = greedy_match_components(&truth_xi, &fitted_xi);
    let g = truth.g();
    let mut out = MatchedErrors {
        sq_err_pi: Vec::with_capacity(g),
        sq_err_kappa: Vec::with_capacity(g),
        sq_err_xi: Vec::with_capacity(g),
        min_matched_dot: f64::INFINITY,
    };
    for (t, &f) in assignment.iter().enumerate() {
        let dpi = fitted.weights()[f] - truth.weights()[t];
        let dkappa = fitted.components()[f].kappa() - truth.components()[t].kappa();
        let dot = truth_xi[t].dot(&fitted_xi[f]);
        // sign-align the fitted direction before the Euclidean error
        let aligned = fitted_xi[f] * dot.signum();
        let dxi = (aligned - truth_xi[t]).norm_squared();
        out.sq_err_pi.push(dpi * dpi);
        out.sq_err_kappa.push(dkappa * dkappa);
        out.sq_err_xi.push(dxi);
        out.min_matched_dot = out.min_matched_dot.min(dot.abs());
    }
    out
}

fn rep_fit_config(cfg: &FitConfig, rep: usize) -> FitConfig {
    let mut c = cfg.clone();
    c.seed = splitmix64(cfg.seed ^ splitmix64(rep as u64));
    c
}

/// Runs one study protocol: per repetition, generate a dataset with a
/// rep-specific generator stream, fit (or select over g), and aggregate the
/// study's metrics. Failed repetitions are excluded and counted.
pub fn run_study(spec: &StudySpec, cfg: &FitConfig) -> Result<StudyResult> {
    if spec.n < 1 || spec.reps < 1 {
        return Err(KentError::Domain(
            "study needs n >= 1 and reps >= 1".into(),
        ));
    }
    let mut per_rep: Vec<RepRecord> = Vec::with_capacity(spec.reps);
    for rep in 0..spec.reps {
        let mut data_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        data_rng.set_stream(rep as u64);
        let truth = match spec.study {
            Study::S1 | Study::S4 => study_s1_model(),
            Study::S2 => study_s2_model(),
            Study::S3 => study_s3_model(&mut data_rng),
        };
        let (points, labels) = generate_mixture_sample(&truth, spec.n, &mut data_rng)?;
        let fit_cfg = rep_fit_config(cfg, rep);
        let mut record = RepRecord {
            rep,
            failure: None,
            final_loglik: None,
            sq_err_pi: None,
            sq_err_kappa: None,
            sq_err_xi: None,
            min_matched_dot: None,
            ari: None,
            selected_g: None,
            criterion_by_g: None,
        };
        match spec.study {
            Study::S1 | Study::S2 => {
                let mut c = fit_cfg;
                c.g = truth.g();
                match fit(&points, &c) {
                    Ok(report) => {
                        let errs = matched_errors(&truth, &report.model);
                        record.final_loglik = report.loglik_trace.last().copied();
                        record.sq_err_pi = Some(errs.sq_err_pi);
                        record.sq_err_kappa = Some(errs.sq_err_kappa);
                        record.sq_err_xi = Some(errs.sq_err_xi);
                        record.min_matched_dot = Some(errs.min_matched_dot);
                    }
                    Err(e) => record.failure = Some(e.to_string()),
                }
            }
            Study::S4 => {
                let mut c = fit_cfg;
                c.g = truth.g();
                match fit(&points, &c) {
                    Ok(report) => {
                        let predicted = map_classify(&points, &report.model);
                        record.final_loglik = report.loglik_trace.last().copied();
                        record.ari = Some(adjusted_rand_index(&labels, &predicted)?);
                    }
                    Err(e) => record.failure = Some(e.to_string()),
                }
            }
            Study::S3 => match select_g(&points, 2, 10, &fit_cfg) {
                Ok(table) => {
                    record.selected_g = Some(table.selected_g);
                    record.criterion_by_g = Some(
                        table
                            .rows
                            .iter()
                            .map(|row| (row.g, row.criterion))
                            .collect(),
                    );
                }
                Err(e) => record.failure = Some(e.to_string()),
            },
        }
        per_rep.push(record);
    }

    let failed_reps = per_rep.iter().filter(|r| r.failure.is_some()).count();
    let successes: Vec<&RepRecord> = per_rep.iter().filter(|r| r.failure.is_none()).collect();
    let g = match spec.study {
        Study::S1 | Study::S4 => 3,
        Study::S2 => 6,
        Study::S3 => 5,
    };
    let mut result = StudyResult {
        study: spec.study.name().to_string(),
        n: spec.n,
        reps: spec.reps,
        seed: spec.seed,
        failed_reps,
        mse_pi: None,
        mse_kappa: None,
        mse_xi: None,
        ari_mean: None,
        bic_selection_counts: None,
        mean_criterion_by_g: None,
        per_rep: Vec::new(),
    };
    match spec.study {
        Study::S1 | Study::S2 => {
            if !successes.is_empty() {
                let r = successes.len() as f64;
                let mean_over = |f: &dyn Fn(&RepRecord) -> f64| -> f64 {
                    successes.iter().map(|rec| f(rec)).sum::<f64>() / r
                };
                result.mse_pi = Some(mean_over(&|rec: &RepRecord| {
                    rec.sq_err_pi.as_ref().unwrap().iter().sum::<f64>() / g as f64
                }));
                result.mse_kappa = Some(mean_over(&|rec: &RepRecord| {
                    rec.sq_err_kappa.as_ref().unwrap().iter().sum::<f64>() / g as f64
                }));
                let mut xi = vec![0.0; g];
                for rec in &successes {
                    for (z, e) in rec.sq_err_xi.as_ref().unwrap().iter().enumerate() {
                        xi[z] += e / r;
                    }
                }
                result.mse_xi = Some(xi);
            }
        }
        Study::S4 => {
            if !successes.is_empty() {
                result.ari_mean = Some(
                    successes.iter().filter_map(|rec| rec.ari).sum::<f64>()
                        / successes.len() as f64,
                );
            }
        }
        Study::S3 => {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            let mut curve_sum: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for rec in &successes {
                if let Some(sel) = rec.selected_g {
                    *counts.entry(sel).or_insert(0) += 1;
                }
                if let Some(curve) = &rec.criterion_by_g {
                    for (&gg, &crit) in curve {
                        let e = curve_sum.entry(gg).or_insert((0.0, 0));
                        e.0 += crit;
                        e.1 += 1;
                    }
                }
            }
            result.bic_selection_counts = Some(counts);
            result.mean_criterion_by_g = Some(
                curve_sum
                    .into_iter()
                    .map(|(gg, (sum, cnt))| (gg, sum / cnt as f64))
                    .collect(),
            );
        }
    }
    result.per_rep = per_rep;
    Ok(result)
}
