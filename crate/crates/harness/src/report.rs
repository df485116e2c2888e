//! CSV emitters for ensemble reports.
//!
//! Two files per experiment: a per-iteration learning-curve table and a
//! one-row-per-variant summary. Floats are written with Rust's shortest
//! round-trip formatting, so reading the CSV back recovers the exact
//! values; infinities print as `inf`. Cells that do not apply (theory for
//! a variant without a kernel prediction, curves where every run
//! diverged) are left empty.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ipmcc_core::{emse_gaussian, emse_impulsive, EmseEstimate, NoiseModel, SteadyStateProblem};

use crate::config::{FilterSpec, FilterVariant};
use crate::error::Result;
use crate::experiment::ExperimentReport;

/// Steady-state prediction matching a variant's operating point, fed with
/// the ensemble's measured gain-weighted input power. Returns `None` for
/// variants without a kernel (no prediction applies) and when the
/// measured trace is unusable because every run diverged.
pub fn theory_emse_for(
    spec: &FilterSpec,
    trace_s_hat: f64,
    noise: &NoiseModel,
) -> Option<EmseEstimate> {
    if spec.variant == FilterVariant::Lms {
        return None;
    }
    if !trace_s_hat.is_finite() || trace_s_hat <= 0.0 {
        return None;
    }
    let problem =
        SteadyStateProblem::new(spec.mu, trace_s_hat, noise.total_variance(), spec.sigma).ok()?;
    if noise.prob_impulse() == 0.0 {
        emse_gaussian(&problem).ok()
    } else {
        emse_impulsive(&problem, noise).ok()
    }
}

/// Learning-curve table: `iteration,<variant>_msd_db,...` in config order.
pub fn curves_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("iteration");
    for variant in &report.variants {
        let _ = write!(out, ",{}_msd_db", variant.spec.label());
    }
    out.push('\n');
    for i in 0..report.iterations {
        let _ = write!(out, "{i}");
        for variant in &report.variants {
            match variant.curve.msd_db.get(i) {
                Some(value) => {
                    let _ = write!(out, ",{value}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// One-row-per-variant summary table.
pub fn summary_csv(report: &ExperimentReport, noise: &NoiseModel) -> String {
    let mut out = String::from("variant,steady_msd_db,steady_emse_db,theory_emse_db,excluded_runs\n");
    for variant in &report.variants {
        let curve = &variant.curve;
        let _ = write!(
            out,
            "{},{},{}",
            variant.spec.label(),
            curve.steady_state_msd_db,
            curve.steady_state_emse.xi_db
        );
        match theory_emse_for(&variant.spec, curve.trace_s_hat, noise) {
            Some(estimate) => {
                let _ = write!(out, ",{}", estimate.xi_db);
            }
            None => out.push(','),
        }
        let _ = writeln!(out, ",{}", curve.excluded_runs);
    }
    out
}

/// Sibling path for the summary file: `curves.csv` -> `curves_summary.csv`.
pub fn summary_path(curves_path: &Path) -> PathBuf {
    let stem = curves_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    curves_path.with_file_name(format!("{stem}_summary.csv"))
}

/// Writes the curve table to `curves_path` and the summary next to it.
pub fn write_report(
    report: &ExperimentReport,
    noise: &NoiseModel,
    curves_path: &Path,
) -> Result<PathBuf> {
    fs::write(curves_path, curves_csv(report))?;
    let summary = summary_path(curves_path);
    fs::write(&summary, summary_csv(report, noise))?;
    Ok(summary)
}
