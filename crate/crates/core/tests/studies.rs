//! Slower cross-module properties: iterate drift at stationarity, mean
//! recovery in the six-component study, order selection on homogeneous
//! data, and density normalization against quadrature.

mod common;

use kentmix::fitter::{bslm_step, initialize, Block};
use kentmix::simulate::generate_mixture_sample;
use kentmix::{run_study, sample_vmf, select_g, FitConfig, MixtureModel, Study, StudySpec, UnitVector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model_distance(a: &MixtureModel, b: &MixtureModel) -> f64 {
    let mut sq = 0.0;
    for (wa, wb) in a.weights().iter().zip(b.weights()) {
        sq += (wa - wb) * (wa - wb);
    }
    for (ca, cb) in a.components().iter().zip(b.components()) {
        sq += (ca.beta() - cb.beta()).powi(2);
        sq += (ca.kappa() - cb.kappa()).powi(2);
        sq += (ca.frame().matrix() - cb.frame().matrix()).norm_squared();
    }
    sq.sqrt()
}

#[test]
fn iterate_drift_vanishes_on_s1_data() {
    // On vMF data the fitted β stays near its floor, so the major/minor
    // axes are weakly identified and their rotation is the slowest mode;
    // 150 iterations put the trailing drift safely inside the band.
    let iterations = 150;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (data, _) = generate_mixture_sample(&common::s1_truth(), 1000, &mut rng).unwrap();
    let mut cfg = FitConfig::new(3);
    cfg.rel_tol = 0.0;
    let mut model = initialize(&data, &cfg, 0).unwrap();
    let mut drifts = Vec::new();
    for _ in 0..iterations {
        let (m1, _) = bslm_step(&data, &model, Block::Shapes, &cfg).unwrap();
        let (m2, _) = bslm_step(&data, &m1, Block::Frames, &cfg).unwrap();
        drifts.push(model_distance(&model, &m2));
        model = m2;
    }
    for (i, d) in drifts.iter().enumerate().skip(iterations - 10) {
        assert!(*d < 1e-3, "drift {d} at iteration {i}");
    }
}

#[test]
fn s2_recovers_all_six_axis_means() {
    let spec = StudySpec {
        study: Study::S2,
        n: 1000,
        reps: 20,
        seed: 606,
    };
    let cfg = FitConfig::new(6);
    let result = run_study(&spec, &cfg).unwrap();
    assert_eq!(result.failed_reps, 0);
    let threshold = 10.0f64.to_radians().cos();
    let good = result
        .per_rep
        .iter()
        .filter(|r| r.min_matched_dot.unwrap_or(0.0) >= threshold)
        .count();
    assert!(
        good >= 18,
        "only {good}/20 repetitions matched all six means within 10 degrees"
    );
}

#[test]
fn selection_prefers_single_component_for_homogeneous_data() {
    let mu = UnitVector3::from_coords(0.0, 0.0, 1.0).unwrap();
    let mut hits = 0;
    for rep in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        rng.set_stream(rep);
        let data = sample_vmf(&mu, 50.0, 1000, &mut rng);
        let mut cfg = FitConfig::new(1);
        cfg.restarts = 3;
        cfg.seed = rep;
        let table = select_g(&data, 1, 3, &cfg).unwrap();
        if table.selected_g == 1 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "selected g=1 in only {hits}/20 repetitions");
}

#[test]
fn singleton_selection_range_returns_that_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (data, _) = generate_mixture_sample(&common::s1_truth(), 60, &mut rng).unwrap();
    let mut cfg = FitConfig::new(2);
    cfg.restarts = 1;
    cfg.max_iterations = 8;
    let table = select_g(&data, 2, 2, &cfg).unwrap();
    assert_eq!(table.selected_g, 2);
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!(row.penalty, kentmix::selection::bic_penalty(2, data.len()));
    assert_eq!(row.criterion, -row.loglik + row.penalty);
    assert!(select_g(&data, 3, 2, &cfg).is_err());
    assert!(select_g(&data, 0, 2, &cfg).is_err());
}

#[test]
fn exact_density_integrates_to_one() {
    for &(beta, kappa) in &[(0.0, 1.0), (1.0, 5.0), (4.0, 10.0), (10.0, 30.0)] {
        let integral = common::density_integral(beta, kappa);
        assert!(
            (integral - 1.0).abs() < 1e-5,
            "(beta, kappa) = ({beta}, {kappa}): integral {integral}"
        );
    }
}
