//! Adaptive FIR filters with a Gaussian-kernel error weighting.
//!
//! All variants share one update skeleton on a length-`L` weight vector
//! `w` and regressor `u` (newest sample first):
//!
//! ```text
//! y(n) = w(n)' u(n)
//! e(n) = d(n) - y(n)
//! w(n+1) = w(n) + mu * exp(-e(n)^2 / (2 sigma^2)) * e(n) * (g(n) .* u(n))
//! ```
//!
//! With unit gains this is the plain kernel-weighted stochastic update;
//! with proportionate gains each tap receives its own share of the step.
//! The kernel factor caps the influence of any single sample: since
//! `|e| exp(-e^2 / (2 sigma^2)) <= sigma exp(-1/2)` for all `e`, one
//! update can never move the weights by more than
//! `mu * sigma * exp(-1/2) * ||u||`, which is what rejects impulsive
//! disturbances. Sending `sigma -> inf` removes the weighting and
//! recovers the plain LMS update.
//!
//! Underflow of the kernel factor for enormous errors (|e|/sigma beyond
//! ~40) flushes the update to zero; that is the correct limiting
//! behaviour and is left untouched.

use crate::error::{Error, Result};
use crate::gains::{iplms_gains, GainVector};
use crate::tap::TapVector;

/// Step size, kernel bandwidth, and proportionate-rule parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    mu: f64,
    sigma: f64,
    alpha: f64,
    epsilon_p: f64,
    /// Cached `-1 / (2 sigma^2)` so the per-iteration kernel evaluation
    /// costs two multiplies and one exponential, with no division.
    kernel_scale: f64,
}

impl FilterParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64, epsilon_p: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("step size must be positive, got {mu}"),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("kernel width must be positive, got {sigma}"),
            });
        }
        if !alpha.is_finite() || !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("mixing parameter must lie in [-1, 1], got {alpha}"),
            });
        }
        if !epsilon_p.is_finite() || epsilon_p <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "epsilon_p",
                reason: format!("regularizer must be positive, got {epsilon_p}"),
            });
        }
        Ok(Self {
            mu,
            sigma,
            alpha,
            epsilon_p,
            kernel_scale: -1.0 / (2.0 * sigma * sigma),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon_p(&self) -> f64 {
        self.epsilon_p
    }

    /// The Gaussian kernel factor `exp(-e^2 / (2 sigma^2))`.
    pub fn kernel(&self, error: f64) -> f64 {
        (error * error * self.kernel_scale).exp()
    }
}

/// Weights, input history, and iteration count of one adaptive filter.
///
/// The regressor stores the most recent input at index 0 and is zero
/// padded until `len` samples have been pushed. Weights start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    w: TapVector,
    regressor: TapVector,
    iteration: u64,
}

impl FilterState {
    pub fn new(len: usize) -> Result<Self> {
        Ok(Self {
            w: TapVector::zeros(len)?,
            regressor: TapVector::zeros(len)?,
            iteration: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &TapVector {
        &self.w
    }

    pub fn regressor(&self) -> &TapVector {
        &self.regressor
    }

    /// Number of weight updates applied so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Shifts the input history and installs the newest sample at index 0.
    pub fn push_input(&mut self, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            return Err(Error::NonFinite {
                context: "input sample",
            });
        }
        self.regressor.shift_in(sample);
        Ok(())
    }

    /// Filter output for the current regressor and the error against
    /// `desired`. Does not mutate the state.
    pub fn predict_and_error(&self, desired: f64) -> Result<(f64, f64)> {
        if !desired.is_finite() {
            return Err(Error::NonFinite {
                context: "desired sample",
            });
        }
        let output = self.w.dot(&self.regressor);
        if !output.is_finite() {
            return Err(Error::NonFinite {
                context: "filter output",
            });
        }
        Ok((output, desired - output))
    }

    fn check_error(error: f64) -> Result<()> {
        if !error.is_finite() {
            return Err(Error::NonFinite {
                context: "error sample",
            });
        }
        Ok(())
    }

    fn finish_update(&mut self) -> Result<()> {
        if !self.w.as_slice().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "updated weights",
            });
        }
        self.iteration += 1;
        Ok(())
    }

    /// Kernel-weighted update with uniform unit gains.
    ///
    /// On overflow of the weights the state is left unusable and an error
    /// is returned; callers should discard it.
    pub fn mcc_step(&mut self, error: f64, params: &FilterParams) -> Result<()> {
        Self::check_error(error)?;
        let kernel = params.kernel(error);
        let scale = params.mu * kernel * error;
        let w = self.w.as_mut_slice();
        for (wi, ui) in w.iter_mut().zip(self.regressor.as_slice()) {
            *wi += scale * ui;
        }
        self.finish_update()
    }

    /// Kernel-weighted update with an explicit per-tap gain vector.
    pub fn pmcc_step(
        &mut self,
        error: f64,
        params: &FilterParams,
        gains: &GainVector,
    ) -> Result<()> {
        Self::check_error(error)?;
        if gains.len() != self.w.len() {
            return Err(Error::LengthMismatch {
                context: "gain vector",
                expected: self.w.len(),
                actual: gains.len(),
            });
        }
        let kernel = params.kernel(error);
        let scale = params.mu * kernel * error;
        let w = self.w.as_mut_slice();
        for ((wi, gi), ui) in w
            .iter_mut()
            .zip(gains.as_slice())
            .zip(self.regressor.as_slice())
        {
            *wi += scale * gi * ui;
        }
        self.finish_update()
    }

    /// Proportionate kernel-weighted update: derives the per-tap gains
    /// from the *current* weights, then applies the gated update.
    pub fn ipmcc_step(&mut self, error: f64, params: &FilterParams) -> Result<()> {
        let gains = iplms_gains(&self.w, params.alpha, params.epsilon_p)?;
        self.pmcc_step(error, params, &gains)
    }

    /// Plain LMS update, the `sigma -> inf` limit of `mcc_step`.
    pub fn lms_step(&mut self, error: f64, mu: f64) -> Result<()> {
        Self::check_error(error)?;
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("step size must be positive, got {mu}"),
            });
        }
        let scale = mu * error;
        let w = self.w.as_mut_slice();
        for (wi, ui) in w.iter_mut().zip(self.regressor.as_slice()) {
            *wi += scale * ui;
        }
        self.finish_update()
    }
}
