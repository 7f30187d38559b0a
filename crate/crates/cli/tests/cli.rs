use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn singular_zero_driver_csv() {
    let out = loewner(&[
        "singular",
        "--term",
        r#"{"kind":"zero"}"#,
        "--T",
        "1",
        "--N",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,lambda,f1,f2,tip_re,tip_im\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1001);
    for row in rows {
        let t: f64 = row[0].parse().unwrap();
        let f1: f64 = row[2].parse().unwrap();
        assert!((f1 - 2.0 * t.sqrt()).abs() < 1e-12);
    }
    // The resolved configuration is echoed on stderr.
    let echo: Value = serde_json::from_str(
        String::from_utf8(out.stderr)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(echo["mesh"]["N"], 1000);
}

#[test]
fn verify_thm2_passes() {
    let out = loewner(&["verify", "thm2", "--c", "1", "--N", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    let f1 = report["measured"]["f1"].as_f64().unwrap();
    assert!((f1 - 2.561_553).abs() < 1e-5);
    assert_eq!(report["config"]["c"], 1.0);
}

#[test]
fn failed_verification_exits_with_two() {
    let out = loewner(&["verify", "cor1", "--c", "0.01", "--N", "2000"]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(loewner(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        loewner(&["singular", "--frobnicate"]).status.code(),
        Some(1)
    );
    let bad_term = loewner(&["singular", "--term", r#"{"kind":"cubic"}"#]);
    assert_eq!(bad_term.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_term.stderr).contains("error"));
    assert_eq!(
        loewner(&["verify", "thm3", "--A", "1", "--alpha", "0.4"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        loewner(&[
            "singular",
            "--term",
            r#"{"kind":"zero"}"#,
            "--N",
            "200000000"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(loewner(&["--help"]).status.code(), Some(0));
}

#[test]
fn geometry_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.csv");
    std::fs::write(&path, "x,y\n0,0\n0,2\n1,2\n0,1\n-1,1\n").unwrap();
    let out = loewner(&["zip", "--curve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertex 3"));
}

#[test]
fn fixture_then_zip() {
    let dir = tempfile::tempdir().unwrap();
    let arc = dir.path().join("arc.csv");
    let out = loewner(&[
        "fixture",
        "arc",
        "--n-points",
        "200",
        "--out",
        arc.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(&format!("{}.config.json", arc.display())).exists());

    let driver = dir.path().join("driver.csv");
    let out = loewner(&[
        "zip",
        "--curve",
        arc.to_str().unwrap(),
        "--out",
        driver.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&driver).unwrap();
    assert!(text.starts_with("t,lambda,s\n"));
    let times: Vec<f64> = csv_rows(&text)
        .iter()
        .map(|r| r[0].parse().unwrap())
        .collect();
    assert!(times.windows(2).all(|p| p[1] > p[0]));
    let config: Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{}.config.json", driver.display())).unwrap(),
    )
    .unwrap();
    assert_eq!(config["command"], "zip");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = loewner(&[
            "trace",
            "--term",
            r#"{"kind":"sqrt","c":1.0}"#,
            "--N",
            "300",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn forward_json_reports_the_normalization() {
    let out = loewner(&[
        "forward",
        "--term",
        r#"{"kind":"sqrt","c":1.0}"#,
        "--T",
        "0.5",
        "--N",
        "2000",
        "--z",
        "0.5,1",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["hydrodynamic_coefficient"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["im"][0], 1.0);
}

#[test]
fn hm_series_and_monte_carlo() {
    let out = loewner(&[
        "hm",
        "--term",
        r#"{"kind":"zero"}"#,
        "--T",
        "0.25",
        "--N",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = csv_rows(&text).pop().unwrap();
    assert!((last[1].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let line = dir.path().join("line.csv");
    let made = loewner(&[
        "fixture",
        "line",
        "--c-angle",
        "-0.3",
        "--n-points",
        "50",
        "--out",
        line.to_str().unwrap(),
    ]);
    assert_eq!(made.status.code(), Some(0));
    let out = loewner(&[
        "hm",
        "--curve",
        line.to_str().unwrap(),
        "--walkers",
        "4000",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m1 = v["conformal"]["m1"].as_f64().unwrap();
    let mc = v["monte_carlo"]["m1"]["estimate"].as_f64().unwrap();
    let se = v["monte_carlo"]["m1"]["stderr"].as_f64().unwrap();
    assert!((m1 - mc).abs() < 4.0 * se + 1e-2, "{m1} vs {mc} ± {se}");
    assert_eq!(v["monte_carlo"]["m1"]["seed"], 3);
}
