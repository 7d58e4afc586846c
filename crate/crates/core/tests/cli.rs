use fwlab::fourier::snapshot::load_snapshot;
use std::path::Path;
use std::process::{Command, Output};

fn fwlab(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fwlab"));
    cmd.args(args).env_remove("FWLAB_OUT");
    if let Some(dir) = out_env {
        cmd.env("FWLAB_OUT", dir);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn atlas_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas");
    let o = fwlab(
        &["run", "exponent-atlas", "--n", "2", "--p", "2", "--alpha-grid", "0:2:0.01", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(csv.starts_with("n,p,alpha,s_necessary,sufficient_s,new_necessary,gamma_lower_bound\n"));
    assert_eq!(csv.lines().count(), 201);
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(record["experiment"], "exponent-atlas");
    assert_eq!(record["pass"], true);
    assert!(record["params"].get("output").is_none());
}

#[test]
fn shorthand_and_env_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlab(&["falconer-lattice-sweep", "--q", "8,16", "--alpha", "1", "--n", "2"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("result.json").exists());
}

#[test]
fn failed_gate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlab(&["frostman-audit", "--tolerance", "max_constant=0.5"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"experiment": "gamma-fit", "colour": 1}"#);
    let o = fwlab(&["run", "--config", &bad], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = fwlab(&["validate", &bad], None);
    assert_eq!(o.status.code(), Some(2));

    let o = fwlab(&["frostman-audit", "--tolerance", "speed=1"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerances.speed"));

    let o = fwlab(&["run", "no-such-experiment"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));

    // Band beyond the grid's Nyquist frequency.
    let o = fwlab(&["lp-bounds", "--k", "3:30"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resource_breach_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"experiment": "frostman-audit", "measure": {"kind": "cantor", "ratio": 0.25, "depth": 20, "n": 2}}"#,
    );
    let o = fwlab(&["run", "--config", &config], Some(dir.path()));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), r#"{"experiment": "exponent-atlas"}"#);
    let o = fwlab(&["validate", &ok], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");

    let o = fwlab(&["schema"], None);
    let schema: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(schema["schema_version"], 1);
    assert_eq!(schema["experiments"].as_array().unwrap().len(), 12);
}

#[test]
fn snapshots_are_written_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"experiment": "lp-bounds", "measure": {"kind": "cantor", "ratio": 0.25, "depth": 3, "n": 2},
            "grid": {"size": 64, "box_len": 2.0}, "sweep": {"k": [1, 3]}, "snapshots": true,
            "tolerances": {"slope": 10.0}}"#,
    );
    let out = dir.path().join("lp");
    let o = fwlab(&["run", "--config", &config, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let field = load_snapshot(&out.join("fields/piece_2.bin")).unwrap();
    assert_eq!(field.spec().size, 64);
}
