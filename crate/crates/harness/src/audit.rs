//! Floating-point operation accounting for the adaptive update path.
//!
//! A counting tape wraps every float operation of a mirrored filter
//! implementation. The mirror repeats the library's arithmetic expression
//! for expression, in the same order, so its weight trajectory is
//! bit-identical to the real filter; a test locks that equivalence, which
//! is what makes the counts trustworthy. Absolute value and the history
//! shift are treated as free.
//!
//! Counted ops cover one full adaptation step: prediction, error,
//! gain computation where the variant has one, and the weight update.
//! Deviation measurement and setup work (parameter validation, the cached
//! kernel scale) are not part of the per-step cost.

use crate::config::FilterVariant;
use crate::error::{Error, Result};

/// Tally of floating-point operations. Subtractions count as adds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub adds: u64,
    pub mults: u64,
    pub divs: u64,
    pub exps: u64,
    pub sqrts: u64,
}

/// Per-step operation counts for one variant at one filter length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCountReport {
    pub variant: FilterVariant,
    pub len: usize,
    pub adds: u64,
    pub mults: u64,
    pub divs: u64,
    pub exps: u64,
    pub sqrts: u64,
}

#[derive(Default)]
struct Tape {
    counts: OpCounts,
}

impl Tape {
    fn add(&mut self, a: f64, b: f64) -> f64 {
        self.counts.adds += 1;
        a + b
    }

    fn sub(&mut self, a: f64, b: f64) -> f64 {
        self.counts.adds += 1;
        a - b
    }

    fn mul(&mut self, a: f64, b: f64) -> f64 {
        self.counts.mults += 1;
        a * b
    }

    fn div(&mut self, a: f64, b: f64) -> f64 {
        self.counts.divs += 1;
        a / b
    }

    fn exp(&mut self, a: f64) -> f64 {
        self.counts.exps += 1;
        a.exp()
    }

    fn take(&mut self) -> OpCounts {
        std::mem::take(&mut self.counts)
    }
}

/// Weight and regressor state of the counted mirror.
struct CountedFilter {
    w: Vec<f64>,
    u: Vec<f64>,
    mu: f64,
    kernel_scale: f64,
    alpha: f64,
    epsilon_p: f64,
}

impl CountedFilter {
    fn new(len: usize, mu: f64, sigma: f64, alpha: f64, epsilon_p: f64) -> Self {
        CountedFilter {
            w: vec![0.0; len],
            u: vec![0.0; len],
            mu,
            kernel_scale: -1.0 / (2.0 * sigma * sigma),
            alpha,
            epsilon_p,
        }
    }

    fn push_input(&mut self, sample: f64) {
        self.u.rotate_right(1);
        self.u[0] = sample;
    }

    fn predict_error(&self, tape: &mut Tape, desired: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.w.iter().zip(&self.u) {
            let prod = tape.mul(*a, *b);
            acc = tape.add(acc, prod);
        }
        tape.sub(desired, acc)
    }

    fn l1_norm(&self, tape: &mut Tape) -> f64 {
        let mut acc = 0.0;
        for v in &self.w {
            acc = tape.add(acc, v.abs());
        }
        acc
    }

    fn per_unit_gains(&self, tape: &mut Tape) -> Vec<f64> {
        let len = self.w.len() as f64;
        let l1 = self.l1_norm(tape);
        let twice = tape.mul(2.0, l1);
        let denom = tape.add(twice, self.epsilon_p);
        let floor = tape.sub(1.0, self.alpha);
        let halved = tape.mul(floor, 0.5);
        let base = tape.div(halved, len);
        let mix = tape.add(1.0, self.alpha);
        let factor = tape.div(mix, denom);
        self.w
            .iter()
            .map(|wi| {
                let share = tape.mul(factor, wi.abs());
                tape.add(base, share)
            })
            .collect()
    }

    fn per_tap_gains(&self, tape: &mut Tape) -> Vec<f64> {
        let len = self.w.len() as f64;
        let l1 = self.l1_norm(tape);
        let twice = tape.mul(2.0, l1);
        let denom = tape.add(twice, self.epsilon_p);
        let floor = tape.sub(1.0, self.alpha);
        let base = tape.mul(floor, 0.5);
        let mix = tape.add(1.0, self.alpha);
        let scaled = tape.mul(mix, len);
        let factor = tape.div(scaled, denom);
        self.w
            .iter()
            .map(|wi| {
                let share = tape.mul(factor, wi.abs());
                tape.add(base, share)
            })
            .collect()
    }

    fn kernel_scale_of(&self, tape: &mut Tape, error: f64) -> f64 {
        let sq = tape.mul(error, error);
        let exponent = tape.mul(sq, self.kernel_scale);
        let kernel = tape.exp(exponent);
        let damped = tape.mul(self.mu, kernel);
        tape.mul(damped, error)
    }

    fn plain_update(&mut self, tape: &mut Tape, scale: f64) {
        for (wi, ui) in self.w.iter_mut().zip(&self.u) {
            let delta = tape.mul(scale, *ui);
            *wi = tape.add(*wi, delta);
        }
    }

    fn gated_update(&mut self, tape: &mut Tape, scale: f64, gains: &[f64]) {
        for ((wi, gi), ui) in self.w.iter_mut().zip(gains).zip(&self.u) {
            let gated = tape.mul(scale, *gi);
            let delta = tape.mul(gated, *ui);
            *wi = tape.add(*wi, delta);
        }
    }

    /// One full adaptation step; returns the counted ops.
    fn step(&mut self, tape: &mut Tape, variant: FilterVariant, sample: f64, desired: f64) {
        self.push_input(sample);
        let error = self.predict_error(tape, desired);
        match variant {
            FilterVariant::Lms => {
                let scale = tape.mul(self.mu, error);
                self.plain_update(tape, scale);
            }
            FilterVariant::Mcc => {
                let scale = self.kernel_scale_of(tape, error);
                self.plain_update(tape, scale);
            }
            FilterVariant::Pmcc => {
                let gains = self.per_unit_gains(tape);
                let scale = self.kernel_scale_of(tape, error);
                self.gated_update(tape, scale, &gains);
            }
            FilterVariant::Ipmcc => {
                let gains = self.per_tap_gains(tape);
                let scale = self.kernel_scale_of(tape, error);
                self.gated_update(tape, scale, &gains);
            }
        }
    }
}

const PROBE_STEPS: usize = 4;

/// Counts the floating-point operations of one adaptation step.
///
/// Drives the counted mirror for a few steps on a fixed probe signal and
/// checks the tally is the same on every step (the update path has no
/// data-dependent branches) before reporting it.
pub fn audit_op_counts(variant: FilterVariant, len: usize) -> Result<OpCountReport> {
    if len == 0 {
        return Err(Error::Config(
            "audit length must be at least 1".to_string(),
        ));
    }
    let mut filter = CountedFilter::new(len, 0.01, 1.25, 0.0, 0.01);
    let mut tape = Tape::default();
    let mut per_step: Option<OpCounts> = None;
    for n in 0..PROBE_STEPS {
        let sample = ((n as f64) * 0.7 + 0.3).sin();
        let desired = ((n as f64) * 0.4 - 0.2).cos();
        filter.step(&mut tape, variant, sample, desired);
        let counts = tape.take();
        if let Some(previous) = per_step {
            if previous != counts {
                return Err(Error::Config(format!(
                    "op counts varied between steps: {previous:?} vs {counts:?}"
                )));
            }
        }
        per_step = Some(counts);
    }
    let counts = per_step.expect("probe ran");
    Ok(OpCountReport {
        variant,
        len,
        adds: counts.adds,
        mults: counts.mults,
        divs: counts.divs,
        exps: counts.exps,
        sqrts: counts.sqrts,
    })
}

/// Reports for all four variants at one length.
pub fn audit_all(len: usize) -> Result<Vec<OpCountReport>> {
    [
        FilterVariant::Lms,
        FilterVariant::Mcc,
        FilterVariant::Pmcc,
        FilterVariant::Ipmcc,
    ]
    .iter()
    .map(|v| audit_op_counts(*v, len))
    .collect()
}
