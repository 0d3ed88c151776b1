//! The BSLM loop: alternate a weights-and-shapes block with a frames block,
//! each maximizing (or strictly increasing) its blockwise minorizer of the
//! approximate log-likelihood, so the likelihood trace never decreases.

use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KentError, Result};
use crate::model::{
    approx_log_likelihood, responsibilities, KentParams, MixtureModel, Responsibilities,
    UnitVector3, DEFAULT_BBAR, DEFAULT_KBAR,
};
use crate::shape::{solve_shape, ShapeCoefficients};
use crate::stiefel::{
    ascend_frame, moment_init_frame, uniform_random_frame, AscentConfig, FrameObjective,
};

/// Hard cap on the concentration of a component whose shape subproblem is
/// unbounded (all responsibility mass exactly at ξ1).
pub const KAPPA_CAP: f64 = 700.0;

/// Floor applied to the kappa moment estimate during initialization.
const KAPPA_INIT_MIN_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    SphericalKmeans,
    RandomFrames,
}

impl FromStr for InitMethod {
    type Err = KentError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spherical_kmeans" => Ok(InitMethod::SphericalKmeans),
            "random_frames" => Ok(InitMethod::RandomFrames),
            other => Err(KentError::Domain(format!(
                "unknown init method {other:?}; expected spherical_kmeans or random_frames"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub g: usize,
    pub max_iterations: usize,
    /// Relative trace-change threshold for early stopping over a window of
    /// three consecutive iterations; 0 disables early stopping.
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub bbar: f64,
    pub kbar: f64,
    pub init_method: InitMethod,
}

impl FitConfig {
    pub fn new(g: usize) -> Self {
        FitConfig {
            g,
            max_iterations: 100,
            rel_tol: 1e-8,
            restarts: 10,
            seed: 0,
            bbar: DEFAULT_BBAR,
            kbar: DEFAULT_KBAR,
            init_method: InitMethod::SphericalKmeans,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.g < 1 || self.max_iterations < 1 || self.restarts < 1 {
            return Err(KentError::Domain(
                "g, max_iterations and restarts must all be >= 1".into(),
            ));
        }
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.bbar) || !pos(self.kbar) || self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(KentError::Domain(
                "floors must be positive and rel_tol nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: MixtureModel,
    /// Approximate log-likelihood after each completed iteration of the
    /// best restart.
    pub loglik_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Trace decreases beyond slack across all restarts; must stay 0.
    pub monotonicity_violations: usize,
    pub restart_index_of_best: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Shapes,
    Frames,
}

/// Per-component sums defining the shape subproblem at the current
/// responsibilities: a = ½Στ, b = Στ(xᵀξ1 − 1), c = Στ[(xᵀξ2)² − (xᵀξ3)²].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// The component received no responsibility mass at all.
    pub degenerate: bool,
}

pub fn compute_block_coefficients(
    data: &[UnitVector3],
    resp: &Responsibilities,
    model: &MixtureModel,
) -> Vec<BlockCoefficients> {
    let g = model.g();
    let mut out = Vec::with_capacity(g);
    for (z, comp) in model.components().iter().enumerate() {
        let xi1 = comp.frame().xi1();
        let xi2 = comp.frame().xi2();
        let xi3 = comp.frame().xi3();
        let (mut tau_sum, mut b, mut c) = (0.0, 0.0, 0.0);
        for (i, x) in data.iter().enumerate() {
            let tau = resp.row(i)[z];
            let u = x.dot(&xi1);
            let v = x.dot(&xi2);
            let w = x.dot(&xi3);
            tau_sum += tau;
            b += tau * (u - 1.0);
            c += tau * (v * v - w * w);
        }
        out.push(BlockCoefficients {
            a: 0.5 * tau_sum,
            b,
            c,
            degenerate: tau_sum <= 0.0,
        });
    }
    out
}

/// Closed-form weight update π*_z = n⁻¹ Στ_z, renormalized onto the simplex.
pub fn update_weights(resp: &Responsibilities) -> Vec<f64> {
    let n = resp.n() as f64;
    let mut weights: Vec<f64> = (0..resp.g()).map(|z| resp.column_sum(z) / n).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Shape update with the concentration cap: the maximizer of the minorizer
/// over the feasible set intersected with κ ≤ κ_cap. Falls back to KKT
/// enumeration of the capped region whenever the free solution is unbounded
/// or overshoots the cap; the previous point stays among the candidates, so
/// the minorizer (hence the likelihood) never decreases.
fn solve_shape_capped(
    bc: &BlockCoefficients,
    old: &KentParams,
    bbar: f64,
    kbar: f64,
) -> Result<(f64, f64, bool)> {
    let coef = ShapeCoefficients::new(bc.a, bc.b, bc.c)?;
    if bc.b < 0.0 && 2.0 * bc.b + bc.c < 0.0 {
        let sol = solve_shape(&coef, bbar, kbar)?;
        if sol.kappa <= KAPPA_CAP {
            return Ok((sol.beta, sol.kappa, false));
        }
    }
    let kappa_cap = KAPPA_CAP.max(old.kappa());
    let beta_cap_max = (kappa_cap - kbar) / 2.0;
    // κ = κ_cap face: FOC in β is 4cβ² + 8aβ − cκ² = 0 for c > 0
    let beta_at_cap = if bc.c <= 0.0 {
        bbar
    } else {
        let root =
            (-2.0 * bc.a + (4.0 * bc.a * bc.a + bc.c * bc.c * kappa_cap * kappa_cap).sqrt())
                / (2.0 * bc.c);
        root.clamp(bbar, beta_cap_max)
    };
    // β = B̄ edge restricted to κ ≤ κ_cap
    let kappa_edge = if bc.b < 0.0 {
        ((bc.a + (bc.a * bc.a + 4.0 * bc.b * bc.b * bbar * bbar).sqrt()) / (-bc.b))
            .clamp(2.0 * bbar + kbar, kappa_cap)
    } else {
        kappa_cap
    };
    // κ = 2β + K̄ edge restricted to κ ≤ κ_cap
    let beta_cone = if 2.0 * bc.b + bc.c < 0.0 {
        (-bc.a / (2.0 * bc.b + bc.c) - kbar / 4.0).clamp(bbar, beta_cap_max)
    } else {
        beta_cap_max.max(bbar)
    };
    let candidates = [
        (old.beta(), old.kappa()),
        (beta_at_cap, kappa_cap),
        (bbar, kappa_edge),
        (beta_cone, 2.0 * beta_cone + kbar),
    ];
    let (beta, kappa) = candidates
        .into_iter()
        .max_by(|&(b1, k1), &(b2, k2)| {
            let v1 = crate::shape::shape_objective(&coef, b1, k1);
            let v2 = crate::shape::shape_objective(&coef, b2, k2);
            v1.partial_cmp(&v2).unwrap()
        })
        .unwrap();
    Ok((beta, kappa, true))
}

/// One block update per scheme (7): recompute responsibilities at the
/// current model and refresh either the weights-and-shapes block or the
/// frames block, leaving the other block untouched.
pub fn bslm_step(
    data: &[UnitVector3],
    model: &MixtureModel,
    block: Block,
    cfg: &FitConfig,
) -> Result<(MixtureModel, Vec<String>)> {
    let resp = responsibilities(data, model)?;
    let mut warnings = Vec::new();
    let updated = match block {
        Block::Shapes => {
            let weights = update_weights(&resp);
            let coefs = compute_block_coefficients(data, &resp, model);
            let mut comps = Vec::with_capacity(model.g());
            for (z, (bc, old)) in coefs.iter().zip(model.components()).enumerate() {
                if bc.degenerate {
                    warnings.push(format!(
                        "component {z}: no responsibility mass; parameters held fixed"
                    ));
                    comps.push(*old);
                    continue;
                }
                let (beta, kappa, capped) = solve_shape_capped(bc, old, cfg.bbar, cfg.kbar)?;
                if capped {
                    warnings.push(format!(
                        "component {z}: shape update capped at kappa = {kappa}"
                    ));
                }
                comps.push(KentParams::new(beta, kappa, *old.frame())?);
            }
            MixtureModel::new(weights, comps)?
        }
        Block::Frames => {
            let ascent = AscentConfig::default();
            let mut comps = Vec::with_capacity(model.g());
            for (z, old) in model.components().iter().enumerate() {
                let mut m = Vector3::zeros();
                let mut s = Matrix3::zeros();
                let mut tau_sum = 0.0;
                for (i, x) in data.iter().enumerate() {
                    let tau = resp.row(i)[z];
                    let v = x.as_vector();
                    tau_sum += tau;
                    m += tau * v;
                    s += tau * (v * v.transpose());
                }
                if tau_sum <= 0.0 {
                    warnings.push(format!(
                        "component {z}: no responsibility mass; frame held fixed"
                    ));
                    comps.push(*old);
                    continue;
                }
                let obj = FrameObjective::new(old.kappa(), old.beta(), m, (s + s.transpose()) * 0.5)?;
                let frame = ascend_frame(old.frame(), &obj, &ascent);
                comps.push(KentParams::new(old.beta(), old.kappa(), frame)?);
            }
            MixtureModel::new(model.weights().to_vec(), comps)?
        }
    };
    Ok((updated, warnings))
}

fn restart_rng(seed: u64, restart_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart_index as u64);
    rng
}

/// Spherical k-means with k-means++-style seeding under cosine
/// dissimilarity; returns final hard assignments.
fn spherical_kmeans(
    data: &[UnitVector3],
    g: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vector3<f64>>, Vec<usize>) {
    let n = data.len();
    let mut centers: Vec<Vector3<f64>> = Vec::with_capacity(g);
    centers.push(*data[rng.random_range(0..n)].as_vector());
    let mut min_dist = vec![0.0_f64; n];
    while centers.len() < g {
        let mut total = 0.0;
        for (i, x) in data.iter().enumerate() {
            let d = centers
                .iter()
                .map(|c| 1.0 - x.dot(c))
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            min_dist[i] = d * d;
            total += d * d;
        }
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d2) in min_dist.iter().enumerate() {
                acc += d2;
                if acc >= target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(*data[next].as_vector());
    }

    let assign = |centers: &[Vector3<f64>]| -> Vec<usize> {
        data.iter()
            .map(|x| {
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (z, c) in centers.iter().enumerate() {
                    let d = x.dot(c);
                    if d > best_dot {
                        best_dot = d;
                        best = z;
                    }
                }
                best
            })
            .collect()
    };

    let mut labels = assign(&centers);
    for _ in 0..10 {
        let mut sums = vec![Vector3::zeros(); g];
        let mut counts = vec![0usize; g];
        for (x, &z) in data.iter().zip(&labels) {
            sums[z] += x.as_vector();
            counts[z] += 1;
        }
        for z in 0..g {
            if counts[z] == 0 || sums[z].norm() < 1e-12 {
                // reseed an empty cluster at the point farthest from all centers
                let far = data
                    .iter()
                    .enumerate()
                    .max_by(|(_, x), (_, y)| {
                        let dx = centers
                            .iter()
                            .map(|c| 1.0 - x.dot(c))
                            .fold(f64::INFINITY, f64::min);
                        let dy = centers
                            .iter()
                            .map(|c| 1.0 - y.dot(c))
                            .fold(f64::INFINITY, f64::min);
                        dx.partial_cmp(&dy).unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                centers[z] = *data[far].as_vector();
            } else {
                centers[z] = sums[z].normalize();
            }
        }
        labels = assign(&centers);
    }
    // guard against clusters emptied by the final assignment; reseeding at
    // the farthest point cannot help once every distinct location already
    // hosts a center, so after g attempts steal points deterministically
    for _ in 0..g {
        let mut counts = vec![0usize; g];
        for &z in &labels {
            counts[z] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let far = data
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                let dx = centers
                    .iter()
                    .map(|c| 1.0 - x.dot(c))
                    .fold(f64::INFINITY, f64::min);
                let dy = centers
                    .iter()
                    .map(|c| 1.0 - y.dot(c))
                    .fold(f64::INFINITY, f64::min);
                dx.partial_cmp(&dy).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        centers[empty] = *data[far].as_vector();
        labels = assign(&centers);
    }
    loop {
        let mut counts = vec![0usize; g];
        for &z in &labels {
            counts[z] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let largest = (0..g).max_by_key(|&z| counts[z]).unwrap();
        let victim = labels
            .iter()
            .position(|&z| z == largest)
            .expect("largest cluster is nonempty");
        labels[victim] = empty;
    }
    (centers, labels)
}

/// Banerjee-style moment estimate κ̂ = R̄(3 − R̄²)/(1 − R̄²), clamped.
fn kappa_from_resultant(rbar: f64, bbar: f64, kbar: f64) -> f64 {
    let lo = kbar + 2.0 * bbar + KAPPA_INIT_MIN_MARGIN;
    if rbar >= 1.0 - 1e-12 {
        return KAPPA_CAP;
    }
    let est = rbar * (3.0 - rbar * rbar) / (1.0 - rbar * rbar);
    est.clamp(lo, KAPPA_CAP)
}

/// Deterministic starting model for one restart.
pub fn initialize(data: &[UnitVector3], cfg: &FitConfig, restart_index: usize) -> Result<MixtureModel> {
    cfg.validate()?;
    if data.len() < cfg.g {
        return Err(KentError::Domain(format!(
            "need at least g={} observations, got {}",
            cfg.g,
            data.len()
        )));
    }
    let mut rng = restart_rng(cfg.seed, restart_index);
    match cfg.init_method {
        InitMethod::SphericalKmeans => {
            let g = cfg.g;
            let (_, labels) = spherical_kmeans(data, g, &mut rng);
            let mut weights = Vec::with_capacity(g);
            let mut comps = Vec::with_capacity(g);
            for z in 0..g {
                let members: Vec<UnitVector3> = data
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == z)
                    .map(|(x, _)| *x)
                    .collect();
                let ones = vec![1.0; members.len()];
                let frame = match moment_init_frame(&members, &ones) {
                    Ok(f) => f,
                    Err(KentError::DegenerateData(_)) => uniform_random_frame(&mut rng),
                    Err(e) => return Err(e),
                };
                let resultant: Vector3<f64> =
                    members.iter().fold(Vector3::zeros(), |acc, x| acc + x.as_vector());
                let rbar = resultant.norm() / members.len() as f64;
                let mut kappa = kappa_from_resultant(rbar, cfg.bbar, cfg.kbar);
                let beta = (kappa / 4.0).min(1.0).max(cfg.bbar);
                if kappa - 2.0 * beta < cfg.kbar {
                    kappa = 2.0 * beta + cfg.kbar;
                }
                weights.push(members.len() as f64 / data.len() as f64);
                comps.push(KentParams::new(beta, kappa, frame)?);
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            MixtureModel::new(weights, comps)
        }
        InitMethod::RandomFrames => {
            let g = cfg.g;
            let mut comps = Vec::with_capacity(g);
            for _ in 0..g {
                let frame = uniform_random_frame(&mut rng);
                comps.push(KentParams::new(1.0, 10.0, frame)?);
            }
            MixtureModel::new(vec![1.0 / g as f64; g], comps)
        }
    }
}

struct RestartOutcome {
    model: MixtureModel,
    trace: Vec<f64>,
    converged: bool,
    violations: usize,
    warnings: Vec<String>,
}

fn run_restart(data: &[UnitVector3], cfg: &FitConfig, restart_index: usize) -> Result<RestartOutcome> {
    let mut model = initialize(data, cfg, restart_index)?;
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.max_iterations);
    let mut warnings: Vec<String> = Vec::new();
    let mut violations = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let (m1, w1) = bslm_step(data, &model, Block::Shapes, cfg)?;
        let (m2, w2) = bslm_step(data, &m1, Block::Frames, cfg)?;
        model = m2;
        // the same degeneracy tends to recur every iteration; keep one copy
        for w in w1.into_iter().chain(w2) {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let ll = approx_log_likelihood(data, &model)?;
        if !ll.is_finite() {
            return Err(KentError::FitFailed(format!(
                "non-finite likelihood in restart {restart_index}"
            )));
        }
        if let Some(&prev) = trace.last() {
            if ll < prev - 1e-8 * (1.0 + prev.abs()) {
                violations += 1;
            }
        }
        trace.push(ll);
        if cfg.rel_tol > 0.0 && trace.len() >= 4 {
            let k = trace.len();
            let settled = (1..=3).all(|j| {
                let cur = trace[k - j];
                let prev = trace[k - j - 1];
                (cur - prev).abs() <= cfg.rel_tol * (1.0 + cur.abs())
            });
            if settled {
                converged = true;
                break;
            }
        }
    }
    Ok(RestartOutcome {
        model,
        trace,
        converged,
        violations,
        warnings,
    })
}

/// Full fit: multiple seeded restarts of the alternating block scheme,
/// returning the restart with the highest final likelihood.
pub fn fit(data: &[UnitVector3], cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    if data.len() < cfg.g {
        return Err(KentError::Domain(format!(
            "need at least g={} observations, got {}",
            cfg.g,
            data.len()
        )));
    }
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut total_violations = 0;
    let mut warnings = Vec::new();
    for r in 0..cfg.restarts {
        match run_restart(data, cfg, r) {
            Ok(out) => {
                total_violations += out.violations;
                warnings.extend(out.warnings.iter().map(|w| format!("restart {r}: {w}")));
                let better = match &best {
                    None => true,
                    Some((_, cur)) => {
                        out.trace.last().copied().unwrap_or(f64::NEG_INFINITY)
                            > cur.trace.last().copied().unwrap_or(f64::NEG_INFINITY)
                    }
                };
                if better {
                    best = Some((r, out));
                }
            }
            Err(e) => warnings.push(format!("restart {r} failed: {e}")),
        }
    }
    let Some((restart_index_of_best, out)) = best else {
        return Err(KentError::FitFailed(format!(
            "all {} restarts failed: {}",
            cfg.restarts,
            warnings.join("; ")
        )));
    };
    Ok(FitReport {
        model: out.model,
        iterations_run: out.trace.len(),
        loglik_trace: out.trace,
        converged: out.converged,
        monotonicity_violations: total_violations,
        restart_index_of_best,
        warnings,
    })
}
