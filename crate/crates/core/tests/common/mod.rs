//! Shared oracles for integration tests: product quadrature on S² and a
//! dense-grid maximizer for the shape subproblem. These deliberately avoid
//! the library's own series/KKT code paths.

// each test binary uses a different subset of these helpers
#![allow(dead_code)]

use kentmix::{Frame3, KentParams, MixtureModel, UnitVector3};
use nalgebra::{Matrix3, Vector3};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut p1;
        let mut dp;
        loop {
            let mut p_prev = 1.0;
            p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p_prev) / k as f64;
                p_prev = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p_prev) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// log of the Kent normalizer by direct product quadrature of the kernel
/// exp(κt + β(1 − t²)cos 2φ) over S² (Gauss-Legendre in t = cos θ,
/// trapezoid in the periodic longitude φ).
pub fn log_kent_normalizer_quadrature(beta: f64, kappa: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(240);
    let n_phi = 512;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let a = beta * (1.0 - t * t);
        let mut inner = 0.0;
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            inner += (kappa * t + a * (2.0 * phi).cos()).exp();
        }
        total += w * inner * dphi;
    }
    total.ln()
}

/// ∫ exp(log_density) dΩ over S² for a component aligned so that
/// ξ1 = e3, ξ2 = e1, ξ3 = e2; should be 1 for the exact density.
pub fn density_integral(beta: f64, kappa: f64) -> f64 {
    let frame = Frame3::new(Matrix3::from_columns(&[
        Vector3::z(),
        Vector3::x(),
        Vector3::y(),
    ]))
    .unwrap();
    let p = KentParams::new(beta, kappa, frame).unwrap();
    let (nodes, weights) = gauss_legendre(200);
    let n_phi = 256;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        let mut inner = 0.0;
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            let x = UnitVector3::from_unnormalized(Vector3::new(
                s * phi.cos(),
                s * phi.sin(),
                *t,
            ))
            .unwrap();
            inner += kentmix::log_density_exact(&x, &p).unwrap().exp();
        }
        total += w * inner * dphi;
    }
    total
}

/// Feasible-grid maximizer of a·log(κ² − 4β²) + bκ + cβ with iterative
/// local refinement; the grid is parametrized as (β, t), κ = 2β + K̄ + t.
/// The search box is sized from the coarse scales of all stationary
/// candidates (interior point, β-floor edge, constraint-cone edge); a box
/// that misses the maximum makes the comparison fail, never pass.
pub fn shape_grid_oracle(a: f64, b: f64, c: f64, bbar: f64, kbar: f64, nb: usize, nt: usize) -> f64 {
    let objective = |beta: f64, kappa: f64| {
        a * ((kappa - 2.0 * beta).ln() + (kappa + 2.0 * beta).ln()) + b * kappa + c * beta
    };
    let mut kappa_hi = (3.0 * a / b.abs()).max(50.0);
    let denom = 4.0 * b * b - c * c;
    if denom > 0.0 {
        kappa_hi = kappa_hi.max(16.0 * a * b.abs() / denom);
    }
    let s = 2.0 * b + c;
    if s < 0.0 {
        kappa_hi = kappa_hi.max(-4.0 * a / s);
    }
    let (mut b_lo, mut b_hi) = (bbar, (kappa_hi / 2.0).max(25.0));
    let (mut t_lo, mut t_hi) = (0.0_f64, kappa_hi);
    let mut best = f64::NEG_INFINITY;
    for round in 0..8 {
        // full-size first sweep, cheaper refinement rounds
        let (rb, rt) = if round == 0 { (nb, nt) } else { (160, 160) };
        let (mut bb, mut bt) = (b_lo, t_lo);
        for i in 0..rb {
            let beta = b_lo + (b_hi - b_lo) * i as f64 / (rb - 1) as f64;
            for j in 0..rt {
                let t = t_lo + (t_hi - t_lo) * j as f64 / (rt - 1) as f64;
                let kappa = 2.0 * beta + kbar + t;
                let v = objective(beta, kappa);
                if v > best {
                    best = v;
                    bb = beta;
                    bt = t;
                }
            }
        }
        let bw = 3.0 * (b_hi - b_lo) / (rb - 1) as f64;
        let tw = 3.0 * (t_hi - t_lo) / (rt - 1) as f64;
        b_lo = (bb - bw).max(bbar);
        b_hi = bb + bw;
        t_lo = (bt - tw).max(0.0);
        t_hi = bt + tw;
    }
    best
}

/// The generative model of study s1/s4: three vMF components with κ = 10
/// at the coordinate axes.
pub fn s1_truth() -> MixtureModel {
    let frame = |c1: Vector3<f64>, c2: Vector3<f64>, c3: Vector3<f64>| {
        Frame3::new(Matrix3::from_columns(&[c1, c2, c3])).unwrap()
    };
    let comps = vec![
        KentParams::new(0.0, 10.0, frame(Vector3::x(), Vector3::y(), Vector3::z())).unwrap(),
        KentParams::new(0.0, 10.0, frame(Vector3::y(), Vector3::z(), Vector3::x())).unwrap(),
        KentParams::new(0.0, 10.0, frame(Vector3::z(), Vector3::x(), Vector3::y())).unwrap(),
    ];
    MixtureModel::new(vec![1.0 / 3.0; 3], comps).unwrap()
}
