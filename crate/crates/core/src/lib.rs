//! Robust sparse adaptive filtering with a Gaussian-kernel error weighting.
//!
//! The crate provides:
//!
//! - [`filters`]: stochastic-gradient tap updates whose step is scaled by
//!   a Gaussian kernel of the prediction error, making single outliers
//!   bounded in their effect; plain, gain-weighted, and
//!   proportionate-integrated variants plus a quadratic baseline.
//! - [`gains`]: proportionate per-tap step-size assignments that
//!   redistribute adaptation effort toward large taps.
//! - [`signals`]: seedable generators for excitation, impulsive noise
//!   mixtures, and sparse target systems, plus a sparsity measure.
//! - [`theory`]: steady-state excess mean-square error predictions and
//!   an empirical estimator to validate them.
//!
//! All randomness flows through explicit `u64` seeds; every operation is
//! deterministic for fixed inputs within one build.

pub mod error;
pub mod filters;
pub mod gains;
pub mod signals;
pub mod tap;
pub mod theory;

pub use error::{Error, Result};
pub use filters::{FilterParams, FilterState};
pub use gains::{ipnlms_gains, iplms_gains, GainVector};
pub use signals::{
    ar1_colored, derive_seed, gen_clustered_system, gen_sparse_system, impulsive_noise,
    sparseness_measure, white_gaussian, InputModel, NoiseModel, SparseSystem, AR1_BURN_IN,
};
pub use tap::TapVector;
pub use theory::{
    emse_gaussian, emse_impulsive, empirical_emse, kernel_noise_moments, trace_s_white,
    EmseEstimate, KernelNoiseMoments, SteadyStateProblem,
};
