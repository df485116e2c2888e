//! End-to-end checks of the library surface and the CLI binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use ipmcc_core::SparseSystem;
use ipmcc_harness::{parse_config, parse_config_str, run_identification, SystemSource};

const BIN: &str = env!("CARGO_BIN_EXE_ipmcc");

const SMALL_CONFIG: &str = r#"
length = 16
iterations = 2000
runs = 5
base_seed = 77
msd_window = 200

[system]
kind = "generated"
active = 4
seed = 2

[[filter]]
variant = "mcc"
mu = 0.02

[[filter]]
variant = "ipmcc"
mu = 0.02
"#;

fn repo_config(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{name}"))
}

#[test]
fn paired_variants_share_realizations() {
    // With fully uniform mixing the proportionate update collapses onto
    // the plain kernel update, so on *shared* input and noise the two
    // variants must produce identical curves bit for bit. Any pairing
    // leak between variants would break the equality.
    let config = parse_config_str(
        r#"
length = 16
iterations = 3000
runs = 4
base_seed = 5
msd_window = 300

[system]
kind = "generated"
active = 4
seed = 9

[[filter]]
variant = "mcc"
mu = 0.02

[[filter]]
variant = "ipmcc"
mu = 0.02
alpha = -1.0
"#,
    )
    .unwrap();
    let report = run_identification(&config).unwrap();
    let mcc = &report.variants[0].curve;
    let prop = &report.variants[1].curve;
    assert_eq!(mcc.msd_db, prop.msd_db);
    assert_eq!(mcc.steady_state_emse.xi, prop.steady_state_emse.xi);
    assert_eq!(mcc.excluded_runs, prop.excluded_runs);
}

#[test]
fn shipped_configs_parse_and_validate() {
    let experiment1 = parse_config(&repo_config("experiment1.toml")).unwrap();
    assert_eq!(experiment1.length, 256);
    assert_eq!(experiment1.runs, 100);
    assert_eq!(experiment1.filters.len(), 2);
    assert!(experiment1.switch.is_none());

    let sparse = parse_config(&repo_config("sparse512.toml")).unwrap();
    assert_eq!(sparse.length, 512);
    assert_eq!(sparse.filters[1].mu, 0.00097);

    let tracking = parse_config(&repo_config("tracking64.toml")).unwrap();
    let switch = tracking.switch.as_ref().expect("tracking config switches");
    assert_eq!(switch.iteration, 20000);
    assert!(matches!(
        switch.system,
        SystemSource::Clustered { active: 16, .. }
    ));
}

#[test]
fn cli_audit_reports_update_costs() {
    let output = Command::new(BIN)
        .args(["audit", "--length", "512"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("variant,len,adds,mults,divs,exps,sqrts"));
    assert!(stdout.contains("\nipmcc,512,2052,2055,1,1,0"), "{stdout}");
    assert!(stdout.contains("\nmcc,512,1025,1028,0,1,0"), "{stdout}");
    assert!(stdout.contains("\nlms,512,1025,1025,0,0,0"), "{stdout}");
}

#[test]
fn cli_gen_system_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.txt");
    let output = Command::new(BIN)
        .args([
            "gen-system",
            "--length",
            "64",
            "--active",
            "8",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let system = SparseSystem::read_from_path(&path).unwrap();
    assert_eq!(system.len(), 64);
    assert_eq!(system.active_count(), 8);

    let config_path = dir.path().join("file.toml");
    fs::write(
        &config_path,
        format!(
            r#"
length = 64
iterations = 500
runs = 2
msd_window = 50

[system]
kind = "file"
path = "{}"

[[filter]]
variant = "ipmcc"
mu = 0.02
"#,
            path.display()
        ),
    )
    .unwrap();
    let curves = dir.path().join("file.csv");
    let output = Command::new(BIN)
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&curves)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(curves.exists());
}

#[test]
fn cli_run_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("small.toml");
    fs::write(&config_path, SMALL_CONFIG).unwrap();
    let run = |out: &Path, seed: Option<&str>| {
        let mut cmd = Command::new(BIN);
        cmd.arg("run")
            .arg("--config")
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .arg("--quiet");
        if let Some(seed) = seed {
            cmd.args(["--seed", seed]);
        }
        let output = cmd.output().unwrap();
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    run(&a, None);
    run(&b, None);
    run(&c, Some("99"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a_summary.csv")).unwrap(),
        fs::read(dir.path().join("b_summary.csv")).unwrap()
    );
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn cli_track_rejects_a_config_without_switch() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("small.toml");
    fs::write(&config_path, SMALL_CONFIG).unwrap();
    let output = Command::new(BIN)
        .arg("track")
        .arg("--config")
        .arg(&config_path)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
}

#[test]
fn cli_missing_config_is_a_one_line_error() {
    let output = Command::new(BIN)
        .args(["run", "--config", "/nonexistent/nope.toml"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
}

#[test]
fn cli_theory_prints_both_predictions() {
    let output = Command::new(BIN)
        .args([
            "theory",
            "--mu",
            "0.00097",
            "--length",
            "512",
            "--prob-impulse",
            "0.001",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("trace_s 512"), "{stdout}");
    assert!(stdout.contains("gaussian-noise emse"), "{stdout}");
    let impulsive = stdout
        .lines()
        .find(|l| l.starts_with("impulsive-mixture emse"))
        .expect("impulsive line");
    let db: f64 = impulsive
        .split('(')
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((-26.2..=-26.0).contains(&db), "impulsive dB {db}");
}

#[test]
fn cli_warns_below_the_theory_length_once() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("short.toml");
    fs::write(
        &config_path,
        SMALL_CONFIG.replace("base_seed = 77", "base_seed = 78"),
    )
    .unwrap();
    let out = dir.path().join("short.csv");
    let output = Command::new(BIN)
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("note:"), "stderr: {stderr}");
    let quiet = Command::new(BIN)
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(quiet.status.success());
    assert!(quiet.stderr.is_empty());
}
