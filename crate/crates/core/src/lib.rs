//! Mixtures of Kent distributions on the unit sphere S².
//!
//! This crate fits finite mixtures of Kent (Fisher-Bingham on S²)
//! distributions by maximizing an approximate log-likelihood with a block
//! successive lower-bound maximization (BSLM) scheme: a closed-form weight
//! update, an exact solver for the concave per-component (β, κ) subproblem,
//! and monotone projected-gradient ascent on the Stiefel manifold for the
//! orientation frames. On top of the fitter sit a BIC-like rule for choosing
//! the number of components, a plug-in MAP clustering rule, seeded simulation
//! protocols, and a CLI for CSV data and PPM image segmentation.

pub mod cli;
pub mod error;
pub mod fitter;
pub mod io;
pub mod model;
pub(crate) mod numeric;
pub mod selection;
pub mod shape;
pub mod simulate;
pub mod special;
pub mod stiefel;

pub use error::{KentError, Result};
pub use fitter::{fit, FitConfig, FitReport, InitMethod};
pub use model::{
    approx_log_likelihood, log_density_approx, log_density_exact, responsibilities, Frame3,
    KentParams, MixtureModel, Responsibilities, UnitVector3,
};
pub use selection::{adjusted_rand_index, bic_criterion, map_classify, select_g, Labeling};
pub use shape::{solve_shape, ShapeCoefficients, ShapeSolution};
pub use simulate::{run_study, sample_uniform_frame, sample_vmf, Study, StudyResult, StudySpec};
pub use special::{log_bessel_i_half, log_kent_normalizer_approx, log_kent_normalizer_exact, LogValue};
