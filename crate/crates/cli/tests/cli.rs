use std::path::Path;
use std::process::{Command, Output};

fn catflip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catflip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn fixed_points_to_stdout() {
    let out = catflip(&["fixed-points", "--G", "6", "--Delta", "0", "--no-timestamp"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["data"]["fixed_points"]["n0"], 6.0);
    assert_eq!(v["metadata"]["command"], "fixed-points");
    assert!(v["metadata"].get("timestamp").is_none());
}

#[test]
fn timestamp_present_by_default() {
    let out = catflip(&["barrier"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["metadata"]["timestamp"].is_u64());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "G = 5\nDelta = 1\neta = 0.5\n").unwrap();
    let out = dir.path().join("fp.json");
    let status = catflip(&[
        "fixed-points",
        "--config",
        cfg.to_str().unwrap(),
        "--Delta",
        "2",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let v = json(&out);
    assert_eq!(v["data"]["params"]["G"], 5.0);
    assert_eq!(v["data"]["params"]["Delta"], 2.0);
    assert_eq!(v["data"]["params"]["eta"], 0.5);
    assert_eq!(v["metadata"]["config"]["Delta"], "2");
    assert_eq!(v["metadata"]["config"]["U"], "0");
}

#[test]
fn validation_errors_exit_two() {
    assert_eq!(catflip(&["fixed-points", "--G", "-1"]).status.code(), Some(2));
    assert_eq!(catflip(&["sweep", "--methods", ""]).status.code(), Some(2));
    assert_eq!(catflip(&["sweep", "--methods", "bogus"]).status.code(), Some(2));
    assert_eq!(catflip(&["no-such-command"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "G = six\n").unwrap();
    let out = catflip(&["barrier", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn io_errors_exit_four() {
    let out = catflip(&["barrier", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = catflip(&["barrier", "--config", "/nonexistent-dir/run.cfg"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_with_failed_cells_exits_three_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = catflip(&[
        "sweep",
        "--methods",
        "barrier,small",
        "--start",
        "1",
        "--stop",
        "7",
        "--count",
        "4",
        "--no-timestamp",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Delta,gamma_barrier,gamma_small,status_barrier,status_small");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("7,,"));
    assert!(lines[4].ends_with("no_bistability,ok"));
    let meta = json(&dir.path().join("sweep.csv.meta.json"));
    assert_eq!(meta["config"]["methods"], "kramers-barrier,small-detuning");
}

#[test]
fn sweep_json_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let status = catflip(&[
        "sweep", "--variable", "theta", "--Delta", "3", "--start", "0", "--stop", "1", "--count", "3",
        "--methods", "barrier", "--format", "json", "--out", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let v = json(&out);
    let rows = v["data"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["x"], 1.0);
    assert_eq!(rows[0]["cells"][0]["status"], "ok");
}

#[test]
fn wigner_raster_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.bin");
    let status = catflip(&[
        "wigner", "--nodes", "9", "--format", "raster", "--out", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(&bytes[..8], b"CFRASTER");
    assert_eq!(bytes.len(), 8 + 16 + 32 + 81 * 8);
}

#[test]
fn gap_reports_truncation() {
    let out = catflip(&["gap", "--Delta", "2", "--N", "40", "--spectrum"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["data"]["gap"]["meta"]["truncation"], 40);
    assert_eq!(v["data"]["spectrum"]["steady_count"], 2);

    // A basis that leaks is enlarged once, and the larger size is reported.
    let out = catflip(&["gap", "--Delta", "2", "--N", "24"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["data"]["gap"]["meta"]["truncation"], 34);
}

#[test]
fn langevin_record_fields() {
    let out = catflip(&["langevin", "--Delta", "5.8", "--trajectories", "50", "--seed", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["params", "dt", "n", "seed", "mean_fpt", "stderr", "implied_rate", "censored"] {
        assert!(v["data"].get(key).is_some(), "{key}");
    }
    assert_eq!(v["metadata"]["seed"], 4);
}
