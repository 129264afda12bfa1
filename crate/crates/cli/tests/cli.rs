use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ucme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucme")).args(args).output().expect("binary runs")
}

fn run_into(dir: &Path, user: &str, observe: &str) {
    let out = ucme(&[
        "run", "--user", user, "--das", "edges", "--runs", "2", "--selections", "2", "--evals", "300",
        "--snapshot-every", "100", "--seed", "3", "--observe", observe, "--out", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_then_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let (guided, baseline) = (tmp.path().join("u1"), tmp.path().join("baseline"));
    run_into(&guided, "U1", "U2");
    // the baseline must score the guiding user for a comparison
    run_into(&baseline, "baseline", "U1,U2");

    let lines = fs::read_to_string(guided.join("runs.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    let heatmap = fs::read_to_string(guided.join("heatmap_run1.csv")).unwrap();
    assert_eq!(heatmap.lines().count(), 64);
    assert!(heatmap.lines().all(|l| l.split(',').count() == 64));
    assert!(heatmap.split([',', '\n']).any(|v| v.parse::<f64>().is_ok_and(|f| (0.6..=1.0).contains(&f))));

    let table = tmp.path().join("table.csv");
    let out = ucme(&[
        "compare", "--a", guided.to_str().unwrap(), "--b", baseline.to_str().unwrap(),
        "--metrics", "coverage,mean_usc,qd_score", "--comparisons", "3", "--out", table.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&table).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "metric");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][0], "mean_usc");
    assert_eq!(&rows[1][1], "U1");
    assert_eq!(&rows[0][1], "");
    let threshold: f64 = rows[0][7].parse().unwrap();
    assert!((threshold - 0.05 / 3.0).abs() < 1e-12);

    let out = ucme(&["compare", "--a", guided.to_str().unwrap(), "--b", baseline.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    // the baseline makes no selections, so only the seven series metrics apply
    assert_eq!(stdout.lines().count(), 1 + 7);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = ucme(&["run", "--user", "U13", "--out", "/nonexistent"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("U13"));
    let out = ucme(&["compare", "--a", "/nonexistent/a", "--b", "/nonexistent/b"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("runs.jsonl"));
    let tmp = tempfile::tempdir().unwrap();
    let ds = tmp.path().join("bad.json");
    fs::write(&ds, r#"{"bounds":{"width":4,"height":4},"units":[],"adjacencies":[]}"#).unwrap();
    let out = ucme(&["run", "--user", "U1", "--ds", ds.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
}
