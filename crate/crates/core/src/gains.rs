//! Proportionate gain rules.
//!
//! Both rules split the adaptation budget between a uniform floor and a
//! share proportional to the magnitude of each current weight:
//!
//! ```text
//! per-unit form:   g_i = (1 - a)/(2L) + (1 + a) |w_i| / (2 ||w||_1 + e_p)
//! per-tap form:    g_i = (1 - a)/2    + (1 + a) L |w_i| / (2 ||w||_1 + e_p)
//! ```
//!
//! The per-tap form is the per-unit form scaled by the filter length `L`;
//! its gains average to one across the taps, so the step-size keeps its
//! usual meaning when the gains multiply the update. The mixing parameter
//! `a` in `[-1, 1]` moves the rule from fully uniform (`a = -1`, every
//! gain is one in the per-tap form) to fully proportional (`a = 1`). The
//! regularizer `e_p > 0` keeps the denominator positive when the weights
//! are all zero.
//!
//! The `l1` norm is recomputed from scratch on every call; no running
//! value is cached across iterations and weight magnitudes are never
//! floored.

use crate::error::{Error, Result};
use crate::tap::TapVector;

/// Per-tap adaptation gains produced by a proportionate rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector {
    values: Vec<f64>,
}

impl GainVector {
    /// Builds a gain vector from raw values, rejecting NaN and infinities.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "gain vector length must be positive".to_string(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "gain vector entries",
            });
        }
        Ok(Self { values })
    }

    /// A vector of unit gains, which makes a proportionate update
    /// coincide with its unweighted counterpart.
    pub fn ones(len: usize) -> Result<Self> {
        Self::from_values(vec![1.0; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v;
        }
        acc
    }
}

impl std::ops::Index<usize> for GainVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn validate_gain_params(alpha: f64, epsilon_p: f64) -> Result<()> {
    if !alpha.is_finite() || !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("must lie in [-1, 1], got {alpha}"),
        });
    }
    if !epsilon_p.is_finite() || epsilon_p <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "epsilon_p",
            reason: format!("must be positive, got {epsilon_p}"),
        });
    }
    Ok(())
}

/// Per-unit proportionate gains; the gains of a length-`L` weight vector
/// sum to at most one.
pub fn ipnlms_gains(w: &TapVector, alpha: f64, epsilon_p: f64) -> Result<GainVector> {
    validate_gain_params(alpha, epsilon_p)?;
    let len = w.len() as f64;
    let denom = 2.0 * w.l1_norm() + epsilon_p;
    let base = (1.0 - alpha) * 0.5 / len;
    let factor = (1.0 + alpha) / denom;
    let values = w
        .as_slice()
        .iter()
        .map(|wi| base + factor * wi.abs())
        .collect();
    Ok(GainVector { values })
}

/// Per-tap proportionate gains: the per-unit rule scaled by the filter
/// length, so the gains average to one. This is the form applied inside
/// the proportionate filter update.
pub fn iplms_gains(w: &TapVector, alpha: f64, epsilon_p: f64) -> Result<GainVector> {
    validate_gain_params(alpha, epsilon_p)?;
    let len = w.len() as f64;
    let denom = 2.0 * w.l1_norm() + epsilon_p;
    let base = (1.0 - alpha) * 0.5;
    let factor = (1.0 + alpha) * len / denom;
    let values = w
        .as_slice()
        .iter()
        .map(|wi| base + factor * wi.abs())
        .collect();
    Ok(GainVector { values })
}
