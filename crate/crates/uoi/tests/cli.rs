//! End-to-end checks of the `uoi` binary: schemas, exit codes, file/flag
//! precedence, and the output-directory environment variable.

use std::collections::BTreeSet;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_uoi")
}

#[test]
fn tradeoff_emits_all_four_policies_per_rho() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tradeoff.csv");
    let output = Command::new(bin())
        .args([
            "tradeoff", "--rhos", "0.2,0.4", "--t", "20000", "--q-bins", "41", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6, "row: {line}");
        seen.insert((fields[0].to_string(), fields[1].to_string()));
        assert_eq!(fields[5], "ok");
    }
    for rho in ["0.2", "0.4"] {
        for policy in ["adaptive", "randomized", "uoi-optimal", "aoi-optimal"] {
            assert!(
                seen.contains(&(rho.to_string(), policy.to_string())),
                "missing row ({rho}, {policy})"
            );
        }
    }
}

#[test]
fn single_slot_trace_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let output = Command::new(bin())
        .args([
            "sample-path",
            "--t",
            "1",
            "--weight",
            "constant:1",
            "--critical",
            "none",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let data_rows = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .count();
    assert_eq!(data_rows, 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.conf");
    std::fs::write(&config, "rho=0.5\nt=100\nweight=constant:1\ncritical=none\n").unwrap();
    let out = dir.path().join("trace.csv");
    let output = Command::new(bin())
        .args(["sample-path", "--config"])
        .arg(&config)
        .args(["--rho", "0.4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# rho=0.4"), "flag did not win over the file");
    assert!(text.contains("# t=100"), "file value not applied");
}

#[test]
fn bad_values_name_the_key_and_fail() {
    let output = Command::new(bin())
        .args(["sample-path", "--rho", "1.5", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("rho"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.conf");
    std::fs::write(&config, "horizon=100\n").unwrap();
    let output = Command::new(bin())
        .args(["sample-path", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("horizon"), "stderr: {stderr}");
}

#[test]
fn out_dir_env_var_sets_default_location() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(bin())
        .args(["sample-path", "--t", "50", "--weight", "constant:1", "--critical", "none"])
        .env("UOI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("sample_path.csv").exists());
}

#[test]
fn bound_check_passes_on_defaults_at_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.csv");
    let output = Command::new(bin())
        .args(["bound-check", "--t", "50000", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "expected exit 0 (all PASS)");
    let text = std::fs::read_to_string(&out).unwrap();
    // 18 grid combinations, one per row, all passing; the documented example
    // combination carries its exact bound value.
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r.ends_with("PASS")));
    assert!(
        rows.iter()
            .any(|r| r.starts_with("0.8,0.25,1,") && r.contains(",10.45,")),
        "bound column for (0.8, 0.25, 1) should read 10.45"
    );
}

#[test]
fn solved_table_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("aoi.table");
    let output = Command::new(bin())
        .args(["rvi-solve", "--metric", "aoi", "--rho", "0.25", "--p", "0.8", "--out"])
        .arg(&table)
        .output()
        .unwrap();
    assert!(output.status.success());

    let out = dir.path().join("trace.csv");
    let output = Command::new(bin())
        .args(["sample-path", "--t", "5000", "--p", "0.8", "--critical", "none", "--policy"])
        .arg(format!("aoi-table:{}", table.display()))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("avg_update_rate"), "stdout: {stdout}");
}
