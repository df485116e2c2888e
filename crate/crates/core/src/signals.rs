//! Seedable signal generators and sparse target systems.
//!
//! Everything here is a pure function of its parameters and a `u64` seed:
//! the same inputs always reproduce the same sequence within one build.
//! Distinct logical streams (per-run inputs, per-run noise, system draws)
//! should use seeds derived through [`derive_seed`], which never aliases
//! two different stream indices onto the same generator state.
//!
//! The colored-input generator starts from `x(-1) = 0`, so its first
//! samples are not yet stationary. [`InputModel::generate`] discards a
//! fixed [`AR1_BURN_IN`] prefix before returning samples; the raw
//! [`ar1_colored`] primitive leaves the transient in place.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tap::TapVector;

/// Samples discarded from the start of a colored-input stream before use.
pub const AR1_BURN_IN: usize = 1000;

const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SEED_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a stream index.
///
/// The construction hashes the stream index and mixes it into the base
/// through a bijective finalizer, so for a fixed base no two stream
/// indices collide and neighbouring indices share no low-bit structure.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generates `count` i.i.d. zero-mean Gaussian samples of the given variance.
pub fn white_gaussian(count: usize, variance: f64, seed: u64) -> Result<Vec<f64>> {
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::InvalidParameter {
            name: "variance",
            reason: format!("must be finite and >= 0, got {variance}"),
        });
    }
    if variance == 0.0 {
        return Ok(vec![0.0; count]);
    }
    let normal = Normal::new(0.0, variance.sqrt()).expect("validated std dev");
    let mut rng = rng_for(seed);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

/// Generates a first-order autoregressive sequence with unit stationary
/// variance: `x(n) = theta * x(n-1) + sqrt(1 - theta^2) * v(n)` with `v`
/// white unit Gaussian and `x(-1) = 0`.
///
/// The returned sequence includes the start-up transient; see
/// [`InputModel::generate`] for the burned-in form.
pub fn ar1_colored(count: usize, theta: f64, seed: u64) -> Result<Vec<f64>> {
    if !theta.is_finite() || theta.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must satisfy |theta| < 1 for stability, got {theta}"),
        });
    }
    let scale = (1.0 - theta * theta).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit std dev");
    let mut rng = rng_for(seed);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v: f64 = normal.sample(&mut rng);
        let x = theta * prev + scale * v;
        out.push(x);
        prev = x;
    }
    Ok(out)
}

/// Excitation model for an identification run. All variants produce
/// unit-variance stationary sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputModel {
    /// White unit-variance Gaussian input.
    White,
    /// First-order autoregressive input with pole `theta`.
    Ar1 { theta: f64 },
}

impl InputModel {
    /// Checks the model parameters without generating anything.
    pub fn validate(&self) -> Result<()> {
        match *self {
            InputModel::White => Ok(()),
            InputModel::Ar1 { theta } => {
                if !theta.is_finite() || theta.abs() >= 1.0 {
                    Err(Error::InvalidParameter {
                        name: "theta",
                        reason: format!("must satisfy |theta| < 1 for stability, got {theta}"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Generates `count` stationary samples. Colored inputs are produced
    /// with an extra [`AR1_BURN_IN`]-sample prefix that is discarded, so
    /// the returned window is past the start-up transient.
    pub fn generate(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        match *self {
            InputModel::White => white_gaussian(count, 1.0, seed),
            InputModel::Ar1 { theta } => {
                let mut raw = ar1_colored(count + AR1_BURN_IN, theta, seed)?;
                Ok(raw.split_off(AR1_BURN_IN))
            }
        }
    }
}

/// Two-component measurement-noise model: a Gaussian background plus
/// Bernoulli-gated Gaussian impulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_s_sq: f64,
    prob_impulse: f64,
    sigma_i_sq: f64,
}

impl NoiseModel {
    /// Builds a validated model from the background variance, impulse
    /// probability, and impulse variance.
    pub fn new(sigma_s_sq: f64, prob_impulse: f64, sigma_i_sq: f64) -> Result<Self> {
        if !sigma_s_sq.is_finite() || sigma_s_sq < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma_s_sq",
                reason: format!("must be finite and >= 0, got {sigma_s_sq}"),
            });
        }
        if !prob_impulse.is_finite() || !(0.0..=1.0).contains(&prob_impulse) {
            return Err(Error::InvalidParameter {
                name: "prob_impulse",
                reason: format!("must lie in [0, 1], got {prob_impulse}"),
            });
        }
        if !sigma_i_sq.is_finite() || sigma_i_sq < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma_i_sq",
                reason: format!("must be finite and >= 0, got {sigma_i_sq}"),
            });
        }
        Ok(NoiseModel {
            sigma_s_sq,
            prob_impulse,
            sigma_i_sq,
        })
    }

    /// Variance of the Gaussian background component.
    pub fn sigma_s_sq(&self) -> f64 {
        self.sigma_s_sq
    }

    /// Probability that a sample carries an impulse.
    pub fn prob_impulse(&self) -> f64 {
        self.prob_impulse
    }

    /// Variance of the impulse amplitude when one fires.
    pub fn sigma_i_sq(&self) -> f64 {
        self.sigma_i_sq
    }

    /// Total noise variance: background plus `p` times impulse variance.
    pub fn total_variance(&self) -> f64 {
        self.sigma_s_sq + self.prob_impulse * self.sigma_i_sq
    }
}

/// Generates `count` noise samples: each is a background Gaussian draw
/// plus, with probability `p`, an independent impulse draw.
///
/// Every step consumes exactly one background draw, one uniform, and one
/// impulse draw regardless of whether the impulse fires, so sequences that
/// differ only in `p` share the same underlying Gaussian streams.
pub fn impulsive_noise(count: usize, model: &NoiseModel, seed: u64) -> Vec<f64> {
    let background = Normal::new(0.0, model.sigma_s_sq.sqrt()).expect("validated std dev");
    let impulse = Normal::new(0.0, model.sigma_i_sq.sqrt()).expect("validated std dev");
    let mut rng = rng_for(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let s: f64 = background.sample(&mut rng);
        let fired = rng.gen::<f64>() < model.prob_impulse;
        let i: f64 = impulse.sample(&mut rng);
        out.push(if fired { s + i } else { s });
    }
    out
}

/// Degree of sparsity of a nonzero tap vector, scaled so that a vector
/// with a single nonzero tap measures 1 and a vector of equal-magnitude
/// taps measures 0.
///
/// Computed as `(sqrt(L) - r) / (sqrt(L) - 1)` with `r = l1/l2`, which
/// keeps both endpoints exact in floating point; the result is clamped
/// to `[0, 1]` against rounding at the dense end.
pub fn sparseness_measure(w: &TapVector) -> Result<f64> {
    if w.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "len",
            reason: format!("sparseness needs at least 2 taps, got {}", w.len()),
        });
    }
    let l2 = w.l2_norm();
    if l2 == 0.0 {
        return Err(Error::ZeroVector {
            context: "sparseness_measure",
        });
    }
    let root_len = (w.len() as f64).sqrt();
    let ratio = w.l1_norm() / l2;
    let measure = (root_len - ratio) / (root_len - 1.0);
    Ok(measure.clamp(0.0, 1.0))
}

/// A target system with a known set of active taps.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    w_opt: TapVector,
    active_count: usize,
    sparseness: f64,
}

impl SparseSystem {
    /// Wraps an explicit tap vector, deriving the active count and
    /// sparseness. The vector needs at least two taps and one nonzero.
    pub fn new(w_opt: TapVector) -> Result<Self> {
        let sparseness = sparseness_measure(&w_opt)?;
        let active_count = w_opt.len() - w_opt.zero_count();
        Ok(SparseSystem {
            w_opt,
            active_count,
            sparseness,
        })
    }

    /// The system impulse response.
    pub fn w_opt(&self) -> &TapVector {
        &self.w_opt
    }

    /// Number of taps.
    pub fn len(&self) -> usize {
        self.w_opt.len()
    }

    /// Number of nonzero taps.
    pub fn active_count(&self) -> usize {
        self.active_count
    }

    /// Sparseness of the response, in `[0, 1]`.
    pub fn sparseness(&self) -> f64 {
        self.sparseness
    }

    /// Serializes the system as text: a `L K` header line followed by one
    /// `index value` line per active tap, values in shortest
    /// round-trippable decimal form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.active_count);
        for (idx, val) in self.w_opt.as_slice().iter().enumerate() {
            if *val != 0.0 {
                out.push_str(&format!("{idx} {val}\n"));
            }
        }
        out
    }

    /// Parses the text form produced by [`SparseSystem::to_text`].
    /// Restores tap values bit-exactly.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::MalformedSystemFile {
            line: 1,
            reason: "empty file".to_string(),
        })?;
        let mut parts = header.split_whitespace();
        let len = parse_field::<usize>(parts.next(), 1, "tap count")?;
        let active = parse_field::<usize>(parts.next(), 1, "active count")?;
        if parts.next().is_some() {
            return Err(Error::MalformedSystemFile {
                line: 1,
                reason: "header must be exactly `L K`".to_string(),
            });
        }
        if len < 2 {
            return Err(Error::MalformedSystemFile {
                line: 1,
                reason: format!("tap count must be at least 2, got {len}"),
            });
        }
        if active == 0 || active > len {
            return Err(Error::MalformedSystemFile {
                line: 1,
                reason: format!("active count must lie in 1..={len}, got {active}"),
            });
        }

        let mut values = vec![0.0; len];
        let mut seen = 0usize;
        for (zero_based, line) in lines {
            let lineno = zero_based + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let idx = parse_field::<usize>(parts.next(), lineno, "tap index")?;
            let val = parse_field::<f64>(parts.next(), lineno, "tap value")?;
            if parts.next().is_some() {
                return Err(Error::MalformedSystemFile {
                    line: lineno,
                    reason: "tap line must be exactly `index value`".to_string(),
                });
            }
            if idx >= len {
                return Err(Error::MalformedSystemFile {
                    line: lineno,
                    reason: format!("tap index {idx} out of range for {len} taps"),
                });
            }
            if !val.is_finite() || val == 0.0 {
                return Err(Error::MalformedSystemFile {
                    line: lineno,
                    reason: format!("active tap value must be finite and nonzero, got {val}"),
                });
            }
            if values[idx] != 0.0 {
                return Err(Error::MalformedSystemFile {
                    line: lineno,
                    reason: format!("duplicate tap index {idx}"),
                });
            }
            values[idx] = val;
            seen += 1;
        }
        if seen != active {
            return Err(Error::MalformedSystemFile {
                line: 1,
                reason: format!("header promises {active} active taps, found {seen}"),
            });
        }
        SparseSystem::new(TapVector::from_values(values)?)
    }

    /// Writes the text form to a file.
    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Reads a system previously written with [`SparseSystem::write_to_path`].
    pub fn read_from_path(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

fn parse_field<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let token = token.ok_or_else(|| Error::MalformedSystemFile {
        line,
        reason: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::MalformedSystemFile {
        line,
        reason: format!("cannot parse {what} from {token:?}"),
    })
}

fn validate_system_shape(len: usize, active: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::InvalidParameter {
            name: "len",
            reason: format!("system needs at least 2 taps, got {len}"),
        });
    }
    if active == 0 || active > len {
        return Err(Error::InvalidParameter {
            name: "active",
            reason: format!("active count must lie in 1..={len}, got {active}"),
        });
    }
    Ok(())
}

fn build_system(len: usize, indices: &[usize], rng: &mut ChaCha8Rng) -> Result<SparseSystem> {
    let normal = Normal::new(0.0, 1.0).expect("unit std dev");
    let amplitudes: Vec<f64> = indices
        .iter()
        .map(|_| loop {
            let a: f64 = normal.sample(rng);
            if a != 0.0 {
                break a;
            }
        })
        .collect();
    let l2 = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut values = vec![0.0; len];
    for (idx, a) in indices.iter().zip(&amplitudes) {
        values[*idx] = a / l2;
    }
    SparseSystem::new(TapVector::from_values(values)?)
}

/// Draws a random system of `len` taps with `active` nonzero positions
/// chosen uniformly without replacement, unit-Gaussian amplitudes, and
/// the whole vector normalized to unit l2 norm.
pub fn gen_sparse_system(len: usize, active: usize, seed: u64) -> Result<SparseSystem> {
    validate_system_shape(len, active)?;
    let mut rng = rng_for(seed);
    let mut indices = rand::seq::index::sample(&mut rng, len, active).into_vec();
    indices.sort_unstable();
    build_system(len, &indices, &mut rng)
}

/// Draws a random system whose `active` nonzero taps form one contiguous
/// block at a uniformly chosen offset; amplitudes and normalization as in
/// [`gen_sparse_system`]. Useful as a semi-sparse tracking target.
pub fn gen_clustered_system(len: usize, active: usize, seed: u64) -> Result<SparseSystem> {
    validate_system_shape(len, active)?;
    let mut rng = rng_for(seed);
    let start = rng.gen_range(0..=len - active);
    let indices: Vec<usize> = (start..start + active).collect();
    build_system(len, &indices, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn sample_variance(xs: &[f64]) -> f64 {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    }

    fn lag1_autocorr(xs: &[f64]) -> f64 {
        let num: f64 = xs.windows(2).map(|w| w[0] * w[1]).sum();
        let den: f64 = xs.iter().map(|x| x * x).sum();
        num / den
    }

    #[test]
    fn derive_seed_separates_streams() {
        let base = 12345;
        let mut seen = std::collections::HashSet::new();
        for stream in 0..1000u64 {
            assert!(seen.insert(derive_seed(base, stream)));
        }
        assert_ne!(derive_seed(base, 0), base);
        assert_ne!(derive_seed(base, 0), derive_seed(base + 1, 0));
    }

    #[test]
    fn white_zero_variance_is_all_zeros() {
        let xs = white_gaussian(100, 0.0, 7).unwrap();
        assert_eq!(xs, vec![0.0; 100]);
    }

    #[test]
    fn white_rejects_bad_variance() {
        assert!(white_gaussian(1, -1.0, 0).is_err());
        assert!(white_gaussian(1, f64::NAN, 0).is_err());
    }

    #[test]
    fn white_is_deterministic() {
        let a = white_gaussian(500, 1.0, 99).unwrap();
        let b = white_gaussian(500, 1.0, 99).unwrap();
        let c = white_gaussian(500, 1.0, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn white_unit_moments_match() {
        for seed in [1, 2, 3] {
            let xs = white_gaussian(1_000_000, 1.0, seed).unwrap();
            let m = mean(&xs);
            let v = sample_variance(&xs);
            assert!(m.abs() <= 0.005, "seed {seed}: mean {m}");
            assert!((0.993..=1.007).contains(&v), "seed {seed}: variance {v}");
        }
    }

    #[test]
    fn ar1_rejects_unstable_pole() {
        assert!(ar1_colored(10, 1.0, 0).is_err());
        assert!(ar1_colored(10, -1.0, 0).is_err());
        assert!(ar1_colored(10, f64::INFINITY, 0).is_err());
    }

    #[test]
    fn ar1_zero_pole_is_white() {
        let a = ar1_colored(10_000, 0.0, 5).unwrap();
        let b = white_gaussian(10_000, 1.0, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ar1_autocorrelation_matches_pole() {
        let xs = ar1_colored(1_000_000, 0.9, 11).unwrap();
        let r1 = lag1_autocorr(&xs);
        assert!((0.897..=0.903).contains(&r1), "lag-1 autocorr {r1}");
    }

    #[test]
    fn ar1_burned_in_variance_is_unit() {
        let model = InputModel::Ar1 { theta: 0.9 };
        let xs = model.generate(1_000_000, 13).unwrap();
        let v = sample_variance(&xs);
        assert!((0.97..=1.03).contains(&v), "variance {v}");
    }

    #[test]
    fn input_model_burn_in_drops_prefix() {
        let raw = ar1_colored(AR1_BURN_IN + 50, 0.5, 21).unwrap();
        let burned = InputModel::Ar1 { theta: 0.5 }.generate(50, 21).unwrap();
        assert_eq!(burned.as_slice(), &raw[AR1_BURN_IN..]);
    }

    #[test]
    fn input_model_validation() {
        assert!(InputModel::White.validate().is_ok());
        assert!(InputModel::Ar1 { theta: 0.9 }.validate().is_ok());
        assert!(InputModel::Ar1 { theta: 1.0 }.validate().is_err());
    }

    #[test]
    fn noise_model_validates_fields() {
        assert!(NoiseModel::new(0.01, 0.001, 1000.0).is_ok());
        assert!(NoiseModel::new(-0.01, 0.0, 1.0).is_err());
        assert!(NoiseModel::new(0.01, 1.5, 1.0).is_err());
        assert!(NoiseModel::new(0.01, -0.1, 1.0).is_err());
        assert!(NoiseModel::new(0.01, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn noise_total_variance_combines_components() {
        let model = NoiseModel::new(0.01, 0.05, 1000.0).unwrap();
        assert!((model.total_variance() - 50.01).abs() < 1e-12);
    }

    #[test]
    fn impulsive_without_impulses_is_background_gaussian() {
        let model = NoiseModel::new(0.01, 0.0, 1000.0).unwrap();
        let xs = impulsive_noise(1_000_000, &model, 3);
        let v = sample_variance(&xs);
        assert!((v / 0.01 - 1.0).abs() < 0.01, "variance {v}");
        let worst = xs.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        assert!(worst < 0.1 * 6.0, "no impulse should fire, max |x| = {worst}");
    }

    #[test]
    fn impulsive_always_firing_has_impulse_variance() {
        let model = NoiseModel::new(0.0, 1.0, 4.0).unwrap();
        let xs = impulsive_noise(1_000_000, &model, 17);
        let v = sample_variance(&xs);
        assert!((v / 4.0 - 1.0).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn impulsive_mixture_variance_matches_model() {
        let model = NoiseModel::new(0.01, 0.05, 1000.0).unwrap();
        let xs = impulsive_noise(1_000_000, &model, 23);
        let v = sample_variance(&xs);
        assert!(
            (v / 50.01 - 1.0).abs() <= 0.05,
            "variance {v} not within 5% of 50.01"
        );
    }

    #[test]
    fn impulsive_is_deterministic() {
        let model = NoiseModel::new(0.01, 0.001, 1000.0).unwrap();
        assert_eq!(
            impulsive_noise(1000, &model, 9),
            impulsive_noise(1000, &model, 9)
        );
    }

    #[test]
    fn impulse_probability_only_gates_the_stream() {
        // Same seed, different p: samples agree wherever neither sequence
        // fired an impulse, because the draw pattern per step is fixed.
        let quiet = NoiseModel::new(0.01, 0.0, 1000.0).unwrap();
        let rare = NoiseModel::new(0.01, 0.001, 1000.0).unwrap();
        let a = impulsive_noise(10_000, &quiet, 31);
        let b = impulsive_noise(10_000, &rare, 31);
        let agreeing = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert!(agreeing >= 9_900, "only {agreeing} samples agree");
        assert_ne!(a, b);
    }

    #[test]
    fn sparseness_single_tap_is_exactly_one() {
        for len in [2, 3, 5, 64, 513] {
            for amp in [0.3, -0.1, 1.0 / 3.0, 12.345, -2.0] {
                let mut values = vec![0.0; len];
                values[len / 2] = amp;
                let w = TapVector::from_values(values).unwrap();
                assert_eq!(sparseness_measure(&w).unwrap(), 1.0, "len {len} amp {amp}");
            }
        }
    }

    #[test]
    fn sparseness_equal_magnitudes_is_exactly_zero() {
        // Perfect-square lengths with power-of-two amplitudes keep every
        // intermediate value exact, so the dense endpoint lands on 0.0.
        for (len, amp) in [(9, 2.0), (64, 1.0), (256, 0.25)] {
            let values: Vec<f64> = (0..len)
                .map(|i| if i % 2 == 0 { amp } else { -amp })
                .collect();
            let w = TapVector::from_values(values).unwrap();
            assert_eq!(sparseness_measure(&w).unwrap(), 0.0, "len {len} amp {amp}");
        }
    }

    #[test]
    fn sparseness_equal_magnitudes_near_zero_generally() {
        let w = TapVector::from_values(vec![0.1; 37]).unwrap();
        let s = sparseness_measure(&w).unwrap();
        assert!(s <= 1e-12, "got {s}");
    }

    #[test]
    fn sparseness_rejects_degenerate_inputs() {
        let single = TapVector::from_values(vec![1.0]).unwrap();
        assert!(matches!(
            sparseness_measure(&single),
            Err(Error::InvalidParameter { .. })
        ));
        let zeros = TapVector::zeros(8).unwrap();
        assert!(matches!(
            sparseness_measure(&zeros),
            Err(Error::ZeroVector { .. })
        ));
    }

    #[test]
    fn sparseness_scale_invariant_bitwise_for_dyadic_scales() {
        let w = TapVector::from_values(vec![0.7, -0.3, 0.0, 2.1, 0.001, 0.0, -9.5, 0.25]).unwrap();
        let base = sparseness_measure(&w).unwrap();
        for scale in [0.5, 2.0, -4.0, 1024.0, 0.0078125] {
            let scaled =
                TapVector::from_values(w.as_slice().iter().map(|x| x * scale).collect()).unwrap();
            assert_eq!(sparseness_measure(&scaled).unwrap(), base, "scale {scale}");
        }
    }

    #[test]
    fn gen_sparse_has_exact_active_structure() {
        let sys = gen_sparse_system(512, 32, 42).unwrap();
        assert_eq!(sys.len(), 512);
        assert_eq!(sys.active_count(), 32);
        let nonzero = sys.w_opt().as_slice().iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzero, 32);
        assert!((sys.w_opt().l2_norm() - 1.0).abs() < 1e-12);
        assert_eq!(sys, gen_sparse_system(512, 32, 42).unwrap());
        assert_ne!(sys, gen_sparse_system(512, 32, 43).unwrap());
    }

    #[test]
    fn gen_sparse_rejects_bad_shapes() {
        assert!(gen_sparse_system(8, 0, 0).is_err());
        assert!(gen_sparse_system(8, 9, 0).is_err());
        assert!(gen_sparse_system(1, 1, 0).is_err());
    }

    #[test]
    fn gen_sparse_single_tap_measures_exactly_one() {
        for seed in 0..20 {
            let sys = gen_sparse_system(64, 1, seed).unwrap();
            assert_eq!(sys.sparseness(), 1.0, "seed {seed}");
        }
    }

    #[test]
    fn gen_sparse_dense_limit_sits_at_the_low_end() {
        // Gaussian amplitudes keep a dense draw near, not at, zero: the
        // l1/l2 ratio of an i.i.d. normal vector concentrates around
        // sqrt(2/pi) * sqrt(L), leaving a measure around 0.21.
        for seed in 0..5 {
            let sys = gen_sparse_system(512, 512, seed).unwrap();
            let s = sys.sparseness();
            assert!((0.1..=0.3).contains(&s), "seed {seed}: measure {s}");
        }
    }

    #[test]
    fn gen_sparse_32_of_512_measure_distribution() {
        let mut measures: Vec<f64> = (0..1000)
            .map(|seed| gen_sparse_system(512, 32, seed).unwrap().sparseness())
            .collect();
        measures.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let avg = mean(&measures);
        let inside = measures
            .iter()
            .filter(|s| (0.80..=0.90).contains(*s))
            .count();
        assert!(
            (0.80..=0.88).contains(&avg),
            "ensemble mean {avg} outside [0.80, 0.88]"
        );
        assert!(inside >= 800, "only {inside}/1000 draws in [0.80, 0.90]");
        assert!(measures[0] >= 0.70 && measures[999] <= 0.95);
    }

    #[test]
    fn gen_clustered_places_one_contiguous_block() {
        let sys = gen_clustered_system(512, 128, 7).unwrap();
        assert_eq!(sys.active_count(), 128);
        let active: Vec<usize> = sys
            .w_opt()
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect();
        let start = active[0];
        let expected: Vec<usize> = (start..start + 128).collect();
        assert_eq!(active, expected);
        assert!((sys.w_opt().l2_norm() - 1.0).abs() < 1e-12);
        assert_eq!(sys, gen_clustered_system(512, 128, 7).unwrap());
    }

    #[test]
    fn gen_clustered_quarter_active_is_semi_sparse() {
        for seed in 0..20 {
            let s = gen_clustered_system(512, 128, seed).unwrap().sparseness();
            assert!((0.5..=0.75).contains(&s), "seed {seed}: measure {s}");
        }
    }

    #[test]
    fn system_text_round_trip_is_exact() {
        for seed in 0..10 {
            let sys = gen_sparse_system(96, 12, seed).unwrap();
            let back = SparseSystem::from_text(&sys.to_text()).unwrap();
            assert_eq!(back, sys, "seed {seed}");
        }
    }

    #[test]
    fn system_text_format_is_stable() {
        let w = TapVector::from_values(vec![0.5, 0.0, 0.0, -0.25]).unwrap();
        let sys = SparseSystem::new(w).unwrap();
        assert_eq!(sys.to_text(), "4 2\n0 0.5\n3 -0.25\n");
    }

    #[test]
    fn system_file_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("system.txt");
        let sys = gen_sparse_system(512, 32, 77).unwrap();
        sys.write_to_path(&path).unwrap();
        let back = SparseSystem::read_from_path(&path).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn system_parse_reports_malformed_lines() {
        let cases = [
            ("", 1),
            ("4\n", 1),
            ("4 2 9\n", 1),
            ("1 1\n0 0.5\n", 1),
            ("4 0\n", 1),
            ("4 5\n", 1),
            ("4 2\n0 0.5\n", 1),
            ("4 1\n0 0.5\n3 -0.25\n", 1),
            ("4 2\n0 0.5\n9 -0.25\n", 3),
            ("4 2\n0 0.5\n0 -0.25\n", 3),
            ("4 2\n0 0.5\n3 0\n", 3),
            ("4 2\n0 0.5\n3 abc\n", 3),
            ("4 2\n0 0.5 1\n3 -0.25\n", 2),
        ];
        for (text, want_line) in cases {
            match SparseSystem::from_text(text) {
                Err(Error::MalformedSystemFile { line, .. }) => {
                    assert_eq!(line, want_line, "text {text:?}")
                }
                other => panic!("text {text:?}: expected malformed error, got {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn sparseness_stays_in_unit_interval(
            values in proptest::collection::vec(-100.0f64..100.0, 2..64)
        ) {
            prop_assume!(values.iter().any(|x| *x != 0.0));
            let w = TapVector::from_values(values).unwrap();
            let s = sparseness_measure(&w).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn sparseness_scale_invariant(
            values in proptest::collection::vec(-100.0f64..100.0, 2..64),
            scale in prop_oneof![0.001f64..1000.0, -1000.0f64..-0.001]
        ) {
            prop_assume!(values.iter().any(|x| x.abs() > 1e-6));
            let w = TapVector::from_values(values.clone()).unwrap();
            let scaled = TapVector::from_values(
                values.iter().map(|x| x * scale).collect()
            ).unwrap();
            let a = sparseness_measure(&w).unwrap();
            let b = sparseness_measure(&scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }

        #[test]
        fn sparseness_permutation_invariant(
            values in proptest::collection::vec(-100.0f64..100.0, 2..64)
        ) {
            prop_assume!(values.iter().any(|x| x.abs() > 1e-6));
            let mut reversed = values.clone();
            reversed.reverse();
            let a = sparseness_measure(&TapVector::from_values(values).unwrap()).unwrap();
            let b = sparseness_measure(&TapVector::from_values(reversed).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}
