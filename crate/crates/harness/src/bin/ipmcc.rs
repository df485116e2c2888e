use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ipmcc_core::{
    emse_gaussian, emse_impulsive, gen_clustered_system, gen_sparse_system, trace_s_white,
    NoiseModel, SteadyStateProblem,
};
use ipmcc_harness::{
    audit_all, parse_config, run_identification, run_tracking, theory_emse_for, write_report,
    Error, ExperimentConfig, ExperimentReport, Result, THEORY_MIN_LENGTH,
};

#[derive(Parser)]
#[command(
    name = "ipmcc",
    version,
    about = "Proportionate kernel-weighted adaptive filter experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a stationary system-identification ensemble from a config.
    Run(RunArgs),
    /// Run a tracking ensemble; the config must declare a [switch].
    Track(RunArgs),
    /// Print steady-state error predictions for one operating point.
    Theory(TheoryArgs),
    /// Print per-step floating-point operation counts per variant.
    Audit(AuditArgs),
    /// Generate a sparse system file.
    GenSystem(GenSystemArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Learning-curve CSV path; the summary CSV lands next to it.
    /// Defaults to the config name with a .csv extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides base_seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides runs from the config.
    #[arg(long)]
    runs: Option<usize>,
    /// Suppress notes and the per-variant summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct TheoryArgs {
    /// Step size.
    #[arg(long)]
    mu: f64,
    /// Kernel width.
    #[arg(long, default_value_t = 1.25)]
    sigma: f64,
    /// Filter length; the input-power trace is length * sigma_u_sq.
    #[arg(long, conflicts_with = "trace_s")]
    length: Option<usize>,
    /// Input power per tap when --length is used.
    #[arg(long, default_value_t = 1.0)]
    sigma_u_sq: f64,
    /// Gain-weighted input-power trace, given directly.
    #[arg(long)]
    trace_s: Option<f64>,
    /// Background noise variance.
    #[arg(long, default_value_t = 0.01)]
    sigma_s_sq: f64,
    /// Impulse probability.
    #[arg(long, default_value_t = 0.001)]
    prob_impulse: f64,
    /// Impulse variance.
    #[arg(long, default_value_t = 1000.0)]
    sigma_i_sq: f64,
}

#[derive(Args)]
struct AuditArgs {
    /// Filter length to audit.
    #[arg(long, default_value_t = 512)]
    length: usize,
}

#[derive(Args)]
struct GenSystemArgs {
    /// Number of taps.
    #[arg(long)]
    length: usize,
    /// Number of nonzero taps.
    #[arg(long)]
    active: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Place the active taps in one contiguous block.
    #[arg(long)]
    clustered: bool,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Err(e) = dispatch() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run_experiment(args, false),
        Command::Track(args) => run_experiment(args, true),
        Command::Theory(args) => theory(args),
        Command::Audit(args) => audit(args),
        Command::GenSystem(args) => gen_system(args),
    }
}

fn short_length_note(length: usize) {
    eprintln!(
        "note: length {length} is below {THEORY_MIN_LENGTH}; the steady-state \
         predictions assume long filters and lose accuracy here"
    );
}

fn run_experiment(args: RunArgs, tracking: bool) -> Result<()> {
    let mut config = parse_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    config.validate()?;
    let report = if tracking {
        run_tracking(&config)?
    } else {
        run_identification(&config)?
    };
    if !args.quiet && config.length < THEORY_MIN_LENGTH {
        short_length_note(config.length);
    }
    let curves_path = args.out.unwrap_or_else(|| {
        let stem = args
            .config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".to_string());
        PathBuf::from(format!("{stem}.csv"))
    });
    let summary = write_report(&report, &config.noise, &curves_path)?;
    if !args.quiet {
        print_summary(&config, &report);
        println!(
            "wrote {} and {}",
            curves_path.display(),
            summary.display()
        );
    }
    Ok(())
}

fn print_summary(config: &ExperimentConfig, report: &ExperimentReport) {
    for variant in &report.variants {
        let curve = &variant.curve;
        let theory = theory_emse_for(&variant.spec, curve.trace_s_hat, &config.noise)
            .map(|t| format!("{:.2} dB", t.xi_db))
            .unwrap_or_else(|| "n/a".to_string());
        println!(
            "{:>5}: steady msd {:.2} dB, emse {:.2} dB, theory {}, excluded {}/{}",
            variant.spec.label(),
            curve.steady_state_msd_db,
            curve.steady_state_emse.xi_db,
            theory,
            curve.excluded_runs,
            report.configured_runs
        );
    }
}

fn theory(args: TheoryArgs) -> Result<()> {
    let trace_s = match (args.length, args.trace_s) {
        (Some(length), None) => {
            let trace = trace_s_white(length, args.sigma_u_sq)?;
            if length < THEORY_MIN_LENGTH {
                short_length_note(length);
            }
            trace
        }
        (None, Some(trace)) => trace,
        (None, None) => {
            return Err(Error::Config(
                "pass either --length or --trace-s".to_string(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
    };
    let noise = NoiseModel::new(args.sigma_s_sq, args.prob_impulse, args.sigma_i_sq)?;
    let problem = SteadyStateProblem::new(args.mu, trace_s, noise.total_variance(), args.sigma)?;
    println!("trace_s {trace_s}");
    println!("noise variance {}", noise.total_variance());
    let gaussian = emse_gaussian(&problem)?;
    println!(
        "gaussian-noise emse {:e} ({:.3} dB, converged {})",
        gaussian.xi, gaussian.xi_db, gaussian.converged
    );
    if noise.prob_impulse() > 0.0 {
        let impulsive = emse_impulsive(&problem, &noise)?;
        println!(
            "impulsive-mixture emse {:e} ({:.3} dB)",
            impulsive.xi, impulsive.xi_db
        );
    }
    Ok(())
}

fn audit(args: AuditArgs) -> Result<()> {
    println!("variant,len,adds,mults,divs,exps,sqrts");
    for report in audit_all(args.length)? {
        println!(
            "{},{},{},{},{},{},{}",
            report.variant.label(),
            report.len,
            report.adds,
            report.mults,
            report.divs,
            report.exps,
            report.sqrts
        );
    }
    Ok(())
}

fn gen_system(args: GenSystemArgs) -> Result<()> {
    let system = if args.clustered {
        gen_clustered_system(args.length, args.active, args.seed)?
    } else {
        gen_sparse_system(args.length, args.active, args.seed)?
    };
    system.write_to_path(&args.out)?;
    println!(
        "wrote {} ({} taps, {} active, sparseness {:.4})",
        args.out.display(),
        system.len(),
        system.active_count(),
        system.sparseness()
    );
    Ok(())
}
