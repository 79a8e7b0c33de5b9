use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn eivdesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eivdesign"))
        .args(args)
        .env_remove("EIVDESIGN_LOG")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = eivdesign(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&run_ok(args)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_michaelis_menten() {
    let cfg = scenario("mm_solve.toml");
    let v = json(&["solve", "--config", cfg.to_str().unwrap()]);
    let pts = v["result"]["design"]["points"].as_array().unwrap();
    assert!((pts[0].as_f64().unwrap() - 5.82).abs() <= 0.01);
    assert_eq!(pts[1].as_f64().unwrap(), 80.0);
    assert_eq!(
        v["result"]["design"]["weights"],
        serde_json::json!([0.5, 0.5])
    );
    let prov = &v["provenance"];
    assert_eq!(prov["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(prov["seed"], 1729);
    assert_eq!(prov["config"]["model"], "michaelis-menten");
    assert_eq!(prov["tolerances"]["root_tol"], 1e-12);
    assert!(v["timestamp"].is_string());
}

#[test]
fn uniform_design_efficiency() {
    let cfg = scenario("exp_efficiency.toml");
    let v = json(&["efficiency", "--config", cfg.to_str().unwrap()]);
    let pct = v["result"]["efficiencies"][0]["efficiency_pct"]
        .as_f64()
        .unwrap();
    assert!((pct - 81.77).abs() <= 0.1, "{pct}");
    assert_eq!(v["result"]["reference_source"], "solver");
    let ref_pts = v["result"]["reference"]["points"].as_array().unwrap();
    assert!((ref_pts[1].as_f64().unwrap() - 11.59).abs() <= 0.01);
}

#[test]
fn malformed_prior_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
model = "michaelis-menten"
method = "mle"
design_space = { upper = 80.0 }
[prior]
atoms = [{ theta = [16.0, 3.5], weight = 0.5 }, { theta = [8.0, 1.75], weight = 0.4 }]
[error]
rho_sq = 1.0
"#,
    );
    let out = eivdesign(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("prior.atoms.weight") && err.contains("0.9"),
        "{err}"
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("model = \"hill\"\n", "model"),
        ("task = \"verify\"\n", "task"),
        (
            "model = \"emax\"\nmethod = \"mle\"\ndesign_space = { upper = 80.0 }\n",
            "prior",
        ),
        ("[table]\nid = 7\n", "table.id"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.toml"), text);
        let verb = if text.contains("table") {
            "table"
        } else {
            "solve"
        };
        let out = eivdesign(&[verb, "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{err}");
    }
    let out = eivdesign(&["solve", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_design_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "one_point.toml",
        r#"
model = "michaelis-menten"
method = "mle"
design_space = { upper = 80.0 }
[prior]
atoms = [{ theta = [16.0, 3.5], weight = 1.0 }]
[error]
rho_sq = 1.0
[design]
points = [40.0]
"#,
    );
    let out = eivdesign(&["verify", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn violated_verdict_is_success() {
    let cfg = scenario("mm_verify.toml");
    let v = json(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["result"]["verdict"], "Violated");
    assert!(v["result"]["sup_sensitivity"].as_f64().unwrap() > 2.0);
    assert_eq!(v["result"]["bound"], 2.0);
}

#[test]
fn sensitivity_trace_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let cfg = scenario("mm_verify.toml");
    run_ok(&[
        "sensitivity",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2001);
    assert_eq!(rows[0].0, 0.0);
    assert_eq!(rows.last().unwrap().0, 80.0);
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("trace.csv")]);
}

#[test]
fn table_csv_and_diff_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t2.toml", "[table]\nid = 2\n");
    let out = dir.path().join("table2.csv");
    run_ok(&[
        "table",
        "--config",
        &cfg,
        "--output",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,local,bayes,uniform");
    assert_eq!(lines.len(), 6);
    let avg: Vec<&str> = lines[5].split(',').collect();
    assert_eq!(avg[0], "Average");
    for (got, want) in avg[1..].iter().zip([70.20, 89.22, 69.31]) {
        assert!(
            (got.parse::<f64>().unwrap() - want).abs() <= 0.1,
            "{got} vs {want}"
        );
    }
    let diff = std::fs::read_to_string(dir.path().join("table2.csv.diff.txt")).unwrap();
    assert!(diff.contains("ok") && !diff.contains("MISMATCH"), "{diff}");
}

#[test]
fn table_one_has_ten_rows() {
    let cfg = scenario("table1.toml");
    let out = eivdesign(&[
        "table",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho_sq,method,nu5_x1,nu11_x1,efficiency_pct");
    assert_eq!(lines.len(), 11);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&first[..2], ["4/1", "MLE"]);
    for (got, (want, tol)) in first[2..]
        .iter()
        .zip([(8.02, 0.01), (8.12, 0.01), (62.92, 0.1)])
    {
        assert!(
            (got.parse::<f64>().unwrap() - want).abs() <= tol,
            "{got} vs {want}"
        );
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("table 1"));
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn identical_seed_gives_identical_payload() {
    let cfg = scenario("exp_ls_solve.toml");
    let cfg = cfg.to_str().unwrap();
    let a = without_timestamp(json(&["solve", "--config", cfg, "--seed", "99"]));
    let b = without_timestamp(json(&["solve", "--config", cfg, "--seed", "99"]));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a["provenance"]["seed"], 99);
    let pts = a["result"]["design"]["points"].as_array().unwrap();
    assert!((pts[0].as_f64().unwrap() - 6.79).abs() <= 0.05);
    assert!((pts[1].as_f64().unwrap() - 16.33).abs() <= 0.05);
}

#[test]
fn log_level_only_touches_stderr() {
    let cfg = scenario("mm_solve.toml");
    let cfg = cfg.to_str().unwrap();
    let quiet = eivdesign(&["solve", "--config", cfg, "--format", "csv"]);
    let loud = Command::new(env!("CARGO_BIN_EXE_eivdesign"))
        .args(["solve", "--config", cfg, "--format", "csv"])
        .env("EIVDESIGN_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(quiet.stdout, loud.stdout);
    assert!(quiet.stderr.is_empty());
    assert!(String::from_utf8_lossy(&loud.stderr).contains("INFO"));
}
