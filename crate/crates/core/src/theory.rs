//! Steady-state excess mean-square error (EMSE) predictions and their
//! empirical counterpart.
//!
//! The predicted steady state solves a scalar fixed-point relation
//!
//! ```text
//! xi = (mu / 2) * Tr(S) * (xi + sv2) * (xi + sv2 + s2)^(3/2)
//!                       / (2*xi + 2*sv2 + s2)^(3/2)
//! ```
//!
//! where `sv2` is the measurement-noise variance, `s2 = sigma^2` the
//! kernel width squared, and `Tr(S)` the trace of the gain-weighted input
//! covariance. Under impulsive noise the implicit relation is replaced by
//! a ratio of two Gaussian-mixture expectations evaluated in closed form.
//!
//! The prediction depends on the gain assignment only through `Tr(S)`;
//! for white input that trace is the filter length times the input power
//! regardless of how the gains distribute it, which is why proportionate
//! and plain kernel filters share one predicted steady state.

use crate::error::{Error, Result};
use crate::signals::NoiseModel;
use crate::tap::TapVector;

const MAX_FIXED_POINT_ITERS: usize = 10_000;
const CONVERGENCE_REL_TOL: f64 = 1e-12;
const RESIDUAL_REL_TOL: f64 = 1e-10;

/// Inputs to a steady-state prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateProblem {
    mu: f64,
    trace_s: f64,
    sigma_v_sq: f64,
    sigma: f64,
}

impl SteadyStateProblem {
    /// Builds a validated problem from step size, input-covariance trace,
    /// noise variance, and kernel width.
    pub fn new(mu: f64, trace_s: f64, sigma_v_sq: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be finite and > 0, got {mu}"),
            });
        }
        if !trace_s.is_finite() || trace_s <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "trace_s",
                reason: format!("must be finite and > 0, got {trace_s}"),
            });
        }
        if !sigma_v_sq.is_finite() || sigma_v_sq < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma_v_sq",
                reason: format!("must be finite and >= 0, got {sigma_v_sq}"),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be finite and > 0, got {sigma}"),
            });
        }
        Ok(SteadyStateProblem {
            mu,
            trace_s,
            sigma_v_sq,
            sigma,
        })
    }

    /// Step size.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Trace of the gain-weighted input covariance.
    pub fn trace_s(&self) -> f64 {
        self.trace_s
    }

    /// Measurement-noise variance.
    pub fn sigma_v_sq(&self) -> f64 {
        self.sigma_v_sq
    }

    /// Kernel width.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// An EMSE value with solver or estimator bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmseEstimate {
    /// EMSE in signal-power units.
    pub xi: f64,
    /// `10 * log10(xi)`; negative infinity when `xi` is zero.
    pub xi_db: f64,
    /// Fixed-point iterations or averaged samples, depending on origin.
    pub samples_used: usize,
    /// Whether the producing procedure met its convergence criterion.
    pub converged: bool,
}

impl EmseEstimate {
    fn new(xi: f64, samples_used: usize, converged: bool) -> Self {
        EmseEstimate {
            xi,
            xi_db: 10.0 * xi.log10(),
            samples_used,
            converged,
        }
    }
}

/// Trace of the gain-weighted input covariance for white input of power
/// `sigma_u_sq`: the per-tap gains always sum to the filter length, so
/// the trace is `L * sigma_u_sq` independent of the gain assignment.
pub fn trace_s_white(len: usize, sigma_u_sq: f64) -> Result<f64> {
    if len == 0 {
        return Err(Error::InvalidParameter {
            name: "len",
            reason: "filter length must be at least 1".to_string(),
        });
    }
    if !sigma_u_sq.is_finite() || sigma_u_sq <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma_u_sq",
            reason: format!("must be finite and > 0, got {sigma_u_sq}"),
        });
    }
    Ok(len as f64 * sigma_u_sq)
}

/// Closed-form expectations of the kernel-weighted noise statistics that
/// form the impulsive-noise steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelNoiseMoments {
    /// `E[exp(-v^2 / sigma^2) * v^2]` over the noise mixture.
    pub weighted_error_power: f64,
    /// `E[exp(-v^2 / (2 sigma^2)) * (1 - v^2 / sigma^2)]` over the mixture.
    pub stability_margin: f64,
}

fn component_weighted_power(variance: f64, sigma_sq: f64) -> f64 {
    variance * (1.0 + 2.0 * variance / sigma_sq).powf(-1.5)
}

fn component_stability_margin(variance: f64, sigma_sq: f64) -> f64 {
    let rho = variance / sigma_sq;
    (1.0 + rho).powf(-0.5) - rho * (1.0 + rho).powf(-1.5)
}

/// Evaluates both mixture expectations for a zero-mean Gaussian background
/// plus Bernoulli-gated Gaussian impulses: a draw has variance `sigma_s^2`
/// with probability `1 - p` and `sigma_s^2 + sigma_I^2` with probability
/// `p`. Each component expectation has a closed form in the variance
/// ratio, mixed with weights `(1 - p, p)`.
pub fn kernel_noise_moments(noise: &NoiseModel, sigma: f64) -> Result<KernelNoiseMoments> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be finite and > 0, got {sigma}"),
        });
    }
    let s2 = sigma * sigma;
    let p = noise.prob_impulse();
    let quiet = noise.sigma_s_sq();
    let loud = noise.sigma_s_sq() + noise.sigma_i_sq();
    let weighted_error_power = (1.0 - p) * component_weighted_power(quiet, s2)
        + p * component_weighted_power(loud, s2);
    let stability_margin = (1.0 - p) * component_stability_margin(quiet, s2)
        + p * component_stability_margin(loud, s2);
    Ok(KernelNoiseMoments {
        weighted_error_power,
        stability_margin,
    })
}

/// Solves the Gaussian-noise steady-state relation for its smallest
/// non-negative fixed point.
///
/// Runs a damped fixed-point iteration (damping 0.5) from zero, stopping
/// when successive iterates agree to `1e-12` relative to the larger of
/// the iterate and the noise variance. A bisection fallback covers
/// slowly-contracting cases; iterates that grow without bound mean no
/// fixed point exists for this step size and surface as an error.
pub fn emse_gaussian(problem: &SteadyStateProblem) -> Result<EmseEstimate> {
    let a = problem.sigma_v_sq;
    let s2 = problem.sigma * problem.sigma;
    let c = 0.5 * problem.mu * problem.trace_s;
    let rhs = |x: f64| c * (x + a) * ((x + a + s2) / (2.0 * (x + a) + s2)).powf(1.5);

    let escape = 1e12 * (a + s2 + 1.0);
    let mut x = 0.0;
    for iteration in 1..=MAX_FIXED_POINT_ITERS {
        let r = rhs(x);
        if !r.is_finite() || r > escape {
            return Err(Error::NoFixedPoint { last_iterate: x });
        }
        let next = x + 0.5 * (r - x);
        if (next - x).abs() <= CONVERGENCE_REL_TOL * x.max(a) {
            return Ok(EmseEstimate::new(next, iteration, true));
        }
        x = next;
    }

    bisect_fixed_point(a, rhs, x)
}

fn bisect_fixed_point(a: f64, rhs: impl Fn(f64) -> f64, last: f64) -> Result<EmseEstimate> {
    let mut hi = if a > 0.0 { a } else { 1.0 };
    let mut expansions = 0;
    while rhs(hi) > hi {
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::NoFixedPoint { last_iterate: last });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = 0.5 * (lo + hi);
    let converged = (xi - rhs(xi)).abs() <= RESIDUAL_REL_TOL * xi.max(a);
    Ok(EmseEstimate::new(xi, MAX_FIXED_POINT_ITERS, converged))
}

/// Evaluates the impulsive-noise steady state: the step size and trace
/// scale a ratio of the two mixture expectations. The problem's own
/// noise-variance field is ignored here; the mixture supplies it.
///
/// A non-positive denominator expectation means the kernel width is too
/// small for this noise mixture and no stable operating point exists.
pub fn emse_impulsive(problem: &SteadyStateProblem, noise: &NoiseModel) -> Result<EmseEstimate> {
    let moments = kernel_noise_moments(noise, problem.sigma)?;
    if moments.stability_margin <= 0.0 {
        return Err(Error::UnstableOperatingPoint {
            denominator: moments.stability_margin,
        });
    }
    let xi =
        0.5 * problem.mu * problem.trace_s * moments.weighted_error_power
            / moments.stability_margin;
    Ok(EmseEstimate::new(xi, 1, true))
}

/// Estimates the EMSE from a weight trajectory: the mean of the squared
/// a-priori error `((w_opt - w(n))' u(n))^2` over the last `window`
/// entries. The trajectory must be strictly longer than the window so at
/// least the initial entry predates the averaged region.
pub fn empirical_emse(
    w_opt: &TapVector,
    trajectory: &[(TapVector, TapVector)],
    window: usize,
) -> Result<EmseEstimate> {
    if window == 0 {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: "averaging window must be at least 1".to_string(),
        });
    }
    if window >= trajectory.len() {
        return Err(Error::WindowTooLarge {
            window,
            available: trajectory.len(),
        });
    }
    let start = trajectory.len() - window;
    let mut acc = 0.0;
    for (w, u) in &trajectory[start..] {
        if w.len() != w_opt.len() {
            return Err(Error::LengthMismatch {
                context: "empirical_emse weights",
                expected: w_opt.len(),
                actual: w.len(),
            });
        }
        if u.len() != w_opt.len() {
            return Err(Error::LengthMismatch {
                context: "empirical_emse regressor",
                expected: w_opt.len(),
                actual: u.len(),
            });
        }
        let mut e_a = 0.0;
        for i in 0..w_opt.len() {
            e_a += (w_opt[i] - w[i]) * u[i];
        }
        acc += e_a * e_a;
    }
    Ok(EmseEstimate::new(acc / window as f64, window, true))
}
