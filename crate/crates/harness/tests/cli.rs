use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchain")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const ENSEMBLE: &str = r#"{
  "schema_version": 1,
  "chain": {"n_qubits": 4, "delta": 0.1, "coupling": 0.025},
  "initial_state": "product_eigen",
  "noise": {"gamma": 0.01, "n_thermal": 0.05},
  "disorder": {"fraction": 0.05, "targets": ["delta", "coupling"], "ensemble_size": 6},
  "t_max": 10, "dt": 0.05, "sample_every": 20,
  "observables": {"pairs": [[1, 2], [2, 3]], "blocks": [[1, 2, 3, 4]], "c1": true, "c2": true, "c2_opt": true},
  "seed": 99
}"#;

#[test]
fn identical_runs_give_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ensemble.json", ENSEMBLE);
    let runs: Vec<PathBuf> = ["1", "3"]
        .iter()
        .map(|threads| {
            let out = tmp.path().join(format!("run-{threads}"));
            let o = qchain(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    for file in ["timeseries.csv", "ensemble_std.csv", "blocks.csv"] {
        let a = std::fs::read(runs[0].join(file)).unwrap();
        let b = std::fs::read(runs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between thread counts");
    }
    let m = manifest(&runs[0]);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 99);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["outputs"]["timeseries.csv"].is_string());
    let header = std::fs::read_to_string(runs[0].join("timeseries.csv")).unwrap();
    assert!(header.starts_with("time,pair_i,pair_j,e_n,c1,c2,c2_opt,ensemble_mean_flag\n"));

    let reseeded = tmp.path().join("reseeded");
    let o = qchain(&["run", "--config", cfg.to_str().unwrap(), "--out", reseeded.to_str().unwrap(), "--seed", "100"]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(reseeded.join("timeseries.csv")).unwrap(), std::fs::read(runs[0].join("timeseries.csv")).unwrap());
}

#[test]
fn empty_observables_write_only_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let body = ENSEMBLE.replace(
        r#""observables": {"pairs": [[1, 2], [2, 3]], "blocks": [[1, 2, 3, 4]], "c1": true, "c2": true, "c2_opt": true}"#,
        r#""observables": {}"#,
    );
    let cfg = write_config(tmp.path(), "empty.json", &body);
    let out = tmp.path().join("run");
    assert!(qchain(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let files: Vec<String> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(files, vec!["manifest.json".to_string()]);
}

#[test]
fn invalid_config_writes_error_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", &ENSEMBLE.replace(r#""t_max": 10"#, r#""t_max": -1"#));
    let out = tmp.path().join("run");
    let o = qchain(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["kind"], "config");
    assert!(m["error"]["message"].as_str().unwrap().contains("t_max"));

    let missing = tmp.path().join("missing");
    let o = qchain(&["run", "--config", "/nonexistent/config.json", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(manifest(&missing)["error"]["kind"], "io");
}

#[test]
fn solver_override_runs_mps() {
    let tmp = tempfile::tempdir().unwrap();
    let body = ENSEMBLE.replace(r#""ensemble_size": 6"#, r#""ensemble_size": 1"#);
    let cfg = write_config(tmp.path(), "single.json", &body);
    let out = tmp.path().join("run");
    let o = qchain(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--solver", "mps"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&out)["config"]["solver"]["kind"], "mps");
}

#[test]
fn bounds_from_correlation_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/correlations_example.csv");
    let out = tmp.path().join("bounds");
    let o = qchain(&["bounds", "--correlations", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("bounds.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let c2: f64 = rows[0][3].parse().unwrap();
    assert!((c2 - ((1.0f64 + 0.72 + 0.68 + 0.81).log2() - 1.0)).abs() < 1e-12);
    let opt: f64 = rows[0][4].parse().unwrap();
    assert!(opt >= c2);
    assert_eq!(&rows[1][3], "0");

    let bad = write_config(tmp.path(), "bad.csv", "i,j,a,b,value\n1,2,x,x,0.5\n");
    let out = tmp.path().join("bad");
    let o = qchain(&["bounds", "--correlations", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(manifest(&out)["error"]["kind"], "input");
}

#[test]
fn scan_marks_zero_gamma_not_applicable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scan.json",
        r#"{"schema_version": 1, "n_qubits": 2, "delta": 0.1, "n_thermal": 0.1, "gammas": [0, 0.05],
            "k_over_delta": [1.0], "transient": {"t_max": 20, "dt": 0.05, "sample_every": 4}}"#,
    );
    let out = tmp.path().join("scan");
    let o = qchain(&["scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,0,not_applicable,"));
    assert!(out.join("rows.csv").exists() && out.join("steady_vs_gamma.svg").exists());
}
