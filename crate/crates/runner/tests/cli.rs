use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ddcsim");

fn ddcsim(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("DDCSIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

const SHORT: &str = r#"{"t_total": 200, "t_transient": 10, "fleet": {"N": 200}}"#;

#[test]
fn run_writes_a_complete_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "short.json", SHORT);
    let out = tmp.path().join("out");
    let res = ddcsim(&["run", "--config", &config, "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let ts = read(out.join("timeseries.csv"));
    let mut lines = ts.lines();
    assert_eq!(lines.next().unwrap(), "t,omega,P,Pe,Pm,Ps,pending_consuming,pending_saving");
    assert_eq!(lines.count(), 201);

    let ccdf = read(out.join("ccdf.csv"));
    let rows: Vec<(f64, f64)> = ccdf
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(ccdf.lines().next().unwrap(), "delta_omega,R");
    assert!(rows.len() <= 10_000 && rows.len() > 100);
    assert_eq!(rows[0].1, 1.0);
    assert_eq!(rows.last().unwrap().1, 0.0);
    assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 >= w[1].1));

    let manifest: serde_json::Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["config"]["fleet"]["N"], 200);
    let summary: serde_json::Value = serde_json::from_str(&read(out.join("summary.json"))).unwrap();
    assert_eq!(summary["samples"], 19_001);
    assert!(summary["sigma2_omega"].as_f64().unwrap() > 0.0);
    assert!(out.join("plot.gp").exists());
    assert!(out.join("config.json").exists());
}

#[test]
fn rerunning_the_echoed_config_reproduces_the_output() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "short.json", SHORT);
    let first = tmp.path().join("a");
    let second = tmp.path().join("b");
    let res = ddcsim(&["run", "--config", &config, "--seed", "9", "--out", first.to_str().unwrap()]);
    assert!(res.status.success());
    let echo = first.join("config.json");
    let res = ddcsim(&["run", "--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap(), "--stride", "1"]);
    assert!(res.status.success());
    let res = ddcsim(&["run", "--config", &config, "--seed", "9", "--out", first.to_str().unwrap(), "--stride", "1"]);
    assert!(res.status.success());
    for file in ["timeseries.csv", "ccdf.csv", "summary.json"] {
        assert_eq!(read(first.join(file)), read(second.join(file)), "{file}");
    }
}

#[test]
fn environment_supplies_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "short.json", r#"{"t_total": 20, "t_transient": 1, "fleet": {"N": 20}}"#);
    let out = tmp.path().join("from_env");
    let res = Command::new(BIN)
        .args(["run", "--config", &config, "--no-plot"])
        .env("DDCSIM_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(out.join("summary.json").exists());
    assert!(!out.join("plot.gp").exists());
}

#[test]
fn invalid_config_reports_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.json", r#"{"ddc": {"gamma": -1}}"#);
    let res = ddcsim(&["run", "--config", &config, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let stderr = String::from_utf8(res.stderr).unwrap();
    assert!(stderr.starts_with("error kind=validation field=ddc.gamma message=\""), "{stderr}");

    let config = write(tmp.path(), "typo.json", r#"{"plant": {"inertia": 2}}"#);
    let res = ddcsim(&["run", "--config", &config, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8(res.stderr).unwrap().contains("field=plant.inertia"));
}

#[test]
fn usage_errors_are_machine_readable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let res = ddcsim(&["preset", "fig12", "--seed", "1", "--out", out]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error kind=usage message="));

    let res = ddcsim(&["frobnicate"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error kind=usage message="));

    let missing = tmp.path().join("missing.json");
    let res = ddcsim(&["run", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error kind=io message="));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "base.json",
        r#"{"t_total": 50, "t_transient": 5, "fleet": {"N": 40}, "policy_assignment": "ceddc"}"#,
    );
    let out = tmp.path().join("sweep");
    let res = ddcsim(&[
        "sweep", "--config", &config, "--param", "comm.window_T", "--values", "0,5,30", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = read(out.join("sweep.csv"));
    let labels: Vec<_> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["0", "5", "30"]);
    assert!(out.join("comm.window_T=5/manifest.json").exists());

    let res = ddcsim(&[
        "sweep", "--config", &config, "--param", "plant.nope", "--values", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("field=plant.nope"));
}

#[test]
fn preset_runs_every_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "base.json", r#"{"t_total": 30, "t_transient": 5, "fleet": {"N": 100}}"#);
    let out = tmp.path().join("fig7");
    let res = ddcsim(&["preset", "fig7", "--seed", "2", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = read(out.join("comparison.csv"));
    let labels: Vec<_> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["n1_100_n2_0", "n1_80_n2_20", "n1_50_n2_50", "n1_20_n2_80", "n1_0_n2_100"]);
    for label in labels {
        let manifest: serde_json::Value =
            serde_json::from_str(&read(out.join(label).join("manifest.json"))).unwrap();
        assert_eq!(manifest["seed"], 2);
    }
}
