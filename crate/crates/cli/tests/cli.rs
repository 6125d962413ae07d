use std::fs;
use std::process::{Command, Output};

use apollonian::gasket::{self, CountOptions};
use apollonian::geom;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apollonian")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gasket_count_last_row_matches_library() {
    let o = run(&["gasket", "count", "--triple", "unit", "--lambda-max", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,count"));
    let last = lines.last().unwrap();
    let (l, n) = last.split_once(',').unwrap();
    assert_eq!(l.parse::<f64>().unwrap(), 1000.0);
    let t = geom::triple_from_curvatures(1.0, 1.0, 1.0).unwrap();
    let want = gasket::count_inscribed(&t, 1000.0, &CountOptions::default()).unwrap();
    assert_eq!(n.parse::<u64>().unwrap(), want);
}

#[test]
fn custom_triple_formats() {
    let a = run(&["gasket", "count", "--triple", "1,1,1", "--lambda-max", "500"]);
    let b = run(&["gasket", "count", "--triple", "unit", "--lambda-max", "500"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["gasket", "count", "--triple", "not-a-triple", "--lambda-max", "500"]);
    assert_eq!(c.status.code(), Some(1));
}

#[test]
fn identities_suite_passes() {
    let o = run(&["checks", "--suite", "identities"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn small_q_rejected() {
    let o = run(&["carpet", "gen", "--q", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q must exceed 6"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["gasket", "count", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--depth", "-3"]).status.code(), Some(1));
    assert_eq!(run(&["carpet", "gen", "--q", "8", "--min-radius", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_suite_exits_two() {
    // The Weyl exponent criterion is not met by the discretizations.
    let o = run(&["checks", "--suite", "weyl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("FAIL [7]"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["carpet", "gen", "--q", "8", "--min-radius", "0.01"][..],
        &["spectrum", "--scheme", "arcfem", "--depth", "3", "--top", "20"][..],
        &["checks", "--suite", "extension"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_directory_receives_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["--output", d, "carpet", "gen", "--q", "9", "--min-radius", "0.02"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("carpet_circles.csv")).unwrap();
    assert!(csv.starts_with("center_x,center_y,radius,generation"));
    assert!(fs::read_to_string(dir.path().join("carpet.svg")).unwrap().starts_with("<svg"));

    let o = run(&["--output", d, "gasket", "render", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("gasket.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 16);
}

#[test]
fn spectrum_json_shape() {
    let o = run(&["spectrum", "--scheme", "trace", "--depth", "2", "--dirichlet", "v0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scheme"], "trace");
    assert_eq!(v["depth"], 2);
    assert_eq!(v["boundary"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 12);
}
