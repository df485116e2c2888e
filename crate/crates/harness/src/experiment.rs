//! Monte-Carlo ensemble driver.
//!
//! Every run draws its own input and noise realizations from seeds
//! derived off the config's base seed, and all configured filters see the
//! *same* realizations within a run so variant comparisons are paired.
//! Ensembles average mean-square deviation in the linear domain across
//! runs, then convert to dB. Runs whose deviation passes the divergence
//! threshold are excluded from the averages per variant and counted.
//!
//! Results are bit-reproducible for a given config: runs are simulated
//! independently (in parallel) and folded into the accumulators in run
//! order, so thread count cannot change the output.

use rayon::prelude::*;

use ipmcc_core::{
    derive_seed, impulsive_noise, iplms_gains, ipnlms_gains, EmseEstimate, FilterState,
    SparseSystem, TapVector,
};

use crate::config::{
    ExperimentConfig, FilterSpec, FilterVariant, STREAM_RUN_BASE, STREAM_SWITCH_SYSTEM,
    STREAM_SYSTEM,
};
use crate::error::{Error, Result};

/// Squared-deviation level treated as divergence (+100 dB).
pub const DIVERGENCE_MSD_LINEAR: f64 = 1e10;

/// Ensemble learning curve and steady-state summaries for one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    /// Ensemble-mean squared deviation per iteration, in dB. Means are
    /// taken in the linear domain over included runs, floored at the
    /// smallest positive double before the dB conversion. Empty when
    /// every run diverged.
    pub msd_db: Vec<f64>,
    /// Mean of `msd_db` over the final `msd_window` iterations; infinite
    /// when every run diverged.
    pub steady_state_msd_db: f64,
    /// A-priori error power averaged over the steady-state window of all
    /// included runs.
    pub steady_state_emse: EmseEstimate,
    /// Gain-weighted input power averaged over the same window, the
    /// empirical counterpart of the steady-state theory's trace input.
    pub trace_s_hat: f64,
    pub included_runs: usize,
    pub excluded_runs: usize,
}

/// One configured filter together with its ensemble results.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantReport {
    pub spec: FilterSpec,
    pub curve: LearningCurve,
}

/// Full ensemble output in config order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub iterations: usize,
    pub msd_window: usize,
    pub configured_runs: usize,
    pub variants: Vec<VariantReport>,
}

/// Runs a stationary system-identification ensemble. The config must not
/// declare a switch; use [`run_tracking`] for mid-run system changes.
pub fn run_identification(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.switch.is_some() {
        return Err(Error::Config(
            "config declares [switch]; use the tracking entry point".to_string(),
        ));
    }
    run_ensemble(config)
}

/// Runs a tracking ensemble: the target system is replaced at the
/// configured switch iteration, and deviations are measured against
/// whichever system is active.
pub fn run_tracking(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.switch.is_none() {
        return Err(Error::Config(
            "tracking requires a [switch] section".to_string(),
        ));
    }
    run_ensemble(config)
}

fn run_ensemble(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let first = config
        .system
        .realize(config.length, config.base_seed, STREAM_SYSTEM)?;
    let second = match &config.switch {
        Some(switch) => Some(switch.system.realize(
            config.length,
            config.base_seed,
            STREAM_SWITCH_SYSTEM,
        )?),
        None => None,
    };

    let mut accumulators: Vec<Accumulator> = config
        .filters
        .iter()
        .map(|_| Accumulator::new(config.iterations))
        .collect();

    // Chunked so peak memory stays at a few runs' worth of curves while
    // the fold still happens in run order.
    let chunk = (rayon::current_num_threads().max(1) * 2).min(config.runs);
    let mut start = 0usize;
    while start < config.runs {
        let end = (start + chunk).min(config.runs);
        let outcomes: Vec<Vec<RunOutcome>> = (start..end)
            .into_par_iter()
            .map(|run| simulate_run(config, &first, second.as_ref(), run))
            .collect::<Result<_>>()?;
        for per_run in outcomes {
            for (acc, outcome) in accumulators.iter_mut().zip(per_run) {
                acc.fold(outcome);
            }
        }
        start = end;
    }

    let variants = config
        .filters
        .iter()
        .zip(accumulators)
        .map(|(spec, acc)| VariantReport {
            spec: *spec,
            curve: acc.finish(config.msd_window),
        })
        .collect();
    Ok(ExperimentReport {
        iterations: config.iterations,
        msd_window: config.msd_window,
        configured_runs: config.runs,
        variants,
    })
}

enum RunOutcome {
    Completed {
        msd: Vec<f64>,
        error_power_sum: f64,
        trace_sum: f64,
    },
    Diverged,
}

struct Accumulator {
    sum_msd: Vec<f64>,
    error_power_sum: f64,
    trace_sum: f64,
    included: usize,
    excluded: usize,
}

impl Accumulator {
    fn new(iterations: usize) -> Self {
        Accumulator {
            sum_msd: vec![0.0; iterations],
            error_power_sum: 0.0,
            trace_sum: 0.0,
            included: 0,
            excluded: 0,
        }
    }

    fn fold(&mut self, outcome: RunOutcome) {
        match outcome {
            RunOutcome::Completed {
                msd,
                error_power_sum,
                trace_sum,
            } => {
                for (acc, value) in self.sum_msd.iter_mut().zip(&msd) {
                    *acc += value;
                }
                self.error_power_sum += error_power_sum;
                self.trace_sum += trace_sum;
                self.included += 1;
            }
            RunOutcome::Diverged => self.excluded += 1,
        }
    }

    fn finish(self, msd_window: usize) -> LearningCurve {
        if self.included == 0 {
            return LearningCurve {
                msd_db: Vec::new(),
                steady_state_msd_db: f64::INFINITY,
                steady_state_emse: EmseEstimate {
                    xi: f64::INFINITY,
                    xi_db: f64::INFINITY,
                    samples_used: 0,
                    converged: false,
                },
                trace_s_hat: f64::NAN,
                included_runs: 0,
                excluded_runs: self.excluded,
            };
        }
        let runs = self.included as f64;
        let msd_db: Vec<f64> = self
            .sum_msd
            .iter()
            .map(|sum| 10.0 * (sum / runs).max(f64::MIN_POSITIVE).log10())
            .collect();
        let tail = &msd_db[msd_db.len() - msd_window..];
        let steady_state_msd_db = tail.iter().sum::<f64>() / msd_window as f64;
        let samples = self.included * msd_window;
        let xi = self.error_power_sum / samples as f64;
        LearningCurve {
            msd_db,
            steady_state_msd_db,
            steady_state_emse: EmseEstimate {
                xi,
                xi_db: 10.0 * xi.log10(),
                samples_used: samples,
                converged: true,
            },
            trace_s_hat: self.trace_sum / samples as f64,
            included_runs: self.included,
            excluded_runs: self.excluded,
        }
    }
}

/// Simulates every configured filter over one shared pair of input and
/// noise realizations.
fn simulate_run(
    config: &ExperimentConfig,
    first: &SparseSystem,
    second: Option<&SparseSystem>,
    run: usize,
) -> Result<Vec<RunOutcome>> {
    let run_seed = derive_seed(config.base_seed, STREAM_RUN_BASE + run as u64);
    let inputs = config
        .input
        .generate(config.iterations, derive_seed(run_seed, 0))?;
    let noise = impulsive_noise(config.iterations, &config.noise, derive_seed(run_seed, 1));
    let switch_at = config.switch.as_ref().map(|s| s.iteration);
    config
        .filters
        .iter()
        .map(|spec| simulate_variant(spec, config, &inputs, &noise, first, second, switch_at))
        .collect()
}

fn simulate_variant(
    spec: &FilterSpec,
    config: &ExperimentConfig,
    inputs: &[f64],
    noise: &[f64],
    first: &SparseSystem,
    second: Option<&SparseSystem>,
    switch_at: Option<usize>,
) -> Result<RunOutcome> {
    let params = spec.params()?;
    let mut state = FilterState::new(config.length)?;
    let window_start = config.iterations - config.msd_window;
    let mut msd = Vec::with_capacity(config.iterations);
    let mut error_power_sum = 0.0;
    let mut trace_sum = 0.0;

    for n in 0..config.iterations {
        state.push_input(inputs[n])?;
        let w_opt = match (switch_at, second) {
            (Some(at), Some(second)) if n >= at => second.w_opt(),
            _ => first.w_opt(),
        };
        let clean = w_opt.dot(state.regressor());
        let desired = clean + noise[n];
        let (output, error) = match state.predict_and_error(desired) {
            Ok(pair) => pair,
            Err(ipmcc_core::Error::NonFinite { .. }) => return Ok(RunOutcome::Diverged),
            Err(e) => return Err(e.into()),
        };
        let in_window = n >= window_start;
        if in_window {
            let e_a = clean - output;
            error_power_sum += e_a * e_a;
        }

        let step = match spec.variant {
            FilterVariant::Lms => {
                if in_window {
                    trace_sum += state.regressor().l2_norm_sq();
                }
                state.lms_step(error, spec.mu)
            }
            FilterVariant::Mcc => {
                if in_window {
                    trace_sum += state.regressor().l2_norm_sq();
                }
                state.mcc_step(error, &params)
            }
            FilterVariant::Pmcc => {
                let gains = ipnlms_gains(state.weights(), spec.alpha, spec.epsilon_p)?;
                if in_window {
                    trace_sum += weighted_input_power(gains.as_slice(), state.regressor());
                }
                state.pmcc_step(error, &params, &gains)
            }
            FilterVariant::Ipmcc => {
                let gains = iplms_gains(state.weights(), spec.alpha, spec.epsilon_p)?;
                if in_window {
                    trace_sum += weighted_input_power(gains.as_slice(), state.regressor());
                }
                state.pmcc_step(error, &params, &gains)
            }
        };
        match step {
            Ok(()) => {}
            Err(ipmcc_core::Error::NonFinite { .. }) => return Ok(RunOutcome::Diverged),
            Err(e) => return Err(e.into()),
        }

        let dev = state.weights().deviation_sq(w_opt);
        if !dev.is_finite() || dev > DIVERGENCE_MSD_LINEAR {
            return Ok(RunOutcome::Diverged);
        }
        msd.push(dev);
    }

    Ok(RunOutcome::Completed {
        msd,
        error_power_sum,
        trace_sum,
    })
}

fn weighted_input_power(gains: &[f64], u: &TapVector) -> f64 {
    gains
        .iter()
        .zip(u.as_slice())
        .fold(0.0, |acc, (g, ui)| acc + g * ui * ui)
}
