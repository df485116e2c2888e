//! Dense real-valued tap vectors shared by filters, gain rules, and
//! signal models.

use crate::error::{Error, Result};

/// A fixed-length vector of finite filter taps.
///
/// Used both for weight vectors and for regressor (input history) vectors.
/// Every constructor and mutation path preserves two invariants: the length
/// is at least one and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TapVector {
    values: Vec<f64>,
}

impl TapVector {
    /// An all-zero vector of length `len`.
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter {
                name: "len",
                reason: "tap vector length must be positive".to_string(),
            });
        }
        Ok(Self {
            values: vec![0.0; len],
        })
    }

    /// Builds a vector from raw values, rejecting NaN and infinities.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "tap vector length must be positive".to_string(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "tap vector entries",
            });
        }
        Ok(Self { values })
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

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Inner product with another vector of the same length.
    ///
    /// Panics if the lengths differ; calls between mismatched vectors are a
    /// programming error, not a runtime condition.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "dot of mismatched tap vectors");
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b;
        }
        acc
    }

    /// Sum of absolute entries.
    pub fn l1_norm(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v.abs();
        }
        acc
    }

    /// Sum of squared entries.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v * v;
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Squared Euclidean distance to `other`; this is the misalignment
    /// `‖a − b‖²` used for deviation curves.
    pub fn deviation_sq(&self, other: &Self) -> f64 {
        assert_eq!(
            self.len(),
            other.len(),
            "deviation of mismatched tap vectors"
        );
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = a - b;
            acc += d * d;
        }
        acc
    }

    /// Shifts the history one step and installs `sample` at index 0
    /// (newest-first ordering).
    pub(crate) fn shift_in(&mut self, sample: f64) {
        self.values.rotate_right(1);
        self.values[0] = sample;
    }

    /// Number of exactly-zero entries.
    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|v| **v == 0.0).count()
    }
}

impl std::ops::Index<usize> for TapVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
