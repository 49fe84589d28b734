//! The binary's exit codes, output files and configuration sources.

use std::path::Path;
use std::process::{Command, Output};

fn lab(dir: Option<&Path>, args: &[&str]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_membrane-lab"));
    c.env_remove("MEMBRANE_LAB_OUT");
    if let Some(d) = dir {
        c.arg("--out").arg(d);
    }
    c.args(args).output().unwrap()
}

fn summary(dir: &Path, sub: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{sub}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lab(None, &[]).status.code(), Some(2));
    assert_eq!(lab(None, &["evolve", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(lab(None, &["inequalities", "--which", "nonsense"]).status.code(), Some(2));
    assert_eq!(lab(None, &["--help"]).status.code(), Some(0));
}

#[test]
fn undersized_domain_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(Some(d.path()), &["evolve", "--t-end", "10", "--half-width", "4", "--n", "33"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hardy_row_is_written() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(Some(d.path()), &["--seed", "42", "inequalities", "--which", "hardy", "--count", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(d.path().join("inequalities.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "hardy");
    assert_eq!(summary(d.path(), "inequalities")["passed"], true);
}

#[test]
fn lightspeed_family_verifies() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(
        Some(d.path()),
        &["verify-exact", "--family", "lightspeed", "--profile", "sech", "--sizes", "65,129,257"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(d.path().join("verify_exact.csv").exists());
}

#[test]
fn failed_check_exits_one() {
    // 33 nodes on [-2, 2] are pre-asymptotic: the first observed order is 3.696 < 3.7
    let d = tempfile::tempdir().unwrap();
    let o = lab(
        Some(d.path()),
        &["verify-exact", "--family", "lightspeed", "--sizes", "33,65,129"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(d.path(), "verify_exact")["passed"], false);
}

#[test]
fn config_file_drives_a_run() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("from-config");
    let cfg = serde_json::json!({
        "output_dir": out,
        "grid": { "x1_min": -4.0, "x1_max": 4.0, "x2_min": -4.0, "x2_max": 4.0, "n1": 65, "n2": 65 },
        "t_end": 1.5,
        "emit_every": 0.5,
        "epsilon": 1e-3
    });
    let path = d.path().join("lab.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = lab(None, &["--config", path.to_str().unwrap(), "energy"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = std::fs::read_to_string(out.join("energy.ndjson")).unwrap();
    assert_eq!(lines.lines().count(), 4);
    assert_eq!(summary(&out, "energy")["passed"], true);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("bad.json");
    std::fs::write(&path, "{ \"t_end\": \"soon\" }").unwrap();
    assert_eq!(lab(Some(d.path()), &["--config", path.to_str().unwrap(), "evolve"]).status.code(), Some(2));
}

#[test]
fn environment_overrides_config_output() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_membrane-lab"))
        .env("MEMBRANE_LAB_OUT", d.path())
        .args(["commutators", "--count", "5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("commutators.csv").exists());
    assert!(d.path().join("commutators_manifest.json").exists());
}

#[test]
fn dump_writes_requested_snapshots() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(
        Some(d.path()),
        &["dump", "--t-end", "1", "--n", "33", "--half-width", "4", "--times", "0,0.5,1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for t in ["0000.000", "0000.500", "0001.000"] {
        for tag in ["u", "u_t"] {
            assert!(d.path().join(format!("dump_t{t}_{tag}.csv")).exists(), "{t} {tag}");
        }
    }
}

#[test]
fn flat_background_checks_hamiltonian() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(Some(d.path()), &["evolve", "--flat", "--t-end", "1", "--n", "65", "--half-width", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let checks = summary(d.path(), "evolve")["checks"].clone();
    assert!(checks.as_array().unwrap().iter().any(|c| c["name"] == "hamiltonian_drift"));
}
