use std::fs;
use std::process::{Command, Output};

fn burkelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burkelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn list_shows_registry() {
    let o = burkelab(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for id in ["burke-mm1", "tandem", "charlier", "polymer", "numerics"] {
        assert!(text.contains(id), "missing {id}");
    }
}

#[test]
fn verify_passing_experiment_prints_json() {
    let o = burkelab(&["verify", "legendre", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["theorem_id"], "legendre");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["passed"], true);
    assert!(v["reports"].as_array().unwrap().len() == 9);
}

#[test]
fn verify_burke_passes() {
    let o = burkelab(&["verify", "burke-mm1", "--param", "replicates=100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn failing_check_exits_one() {
    let o = burkelab(&["verify", "pitman-discrete", "--samples", "2000", "--param", "threshold=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL pitman-discrete"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(burkelab(&["verify", "no-such-theorem"]).status.code(), Some(2));
    assert_eq!(burkelab(&["verify", "legendre", "--param", "bogus=1"]).status.code(), Some(2));
    assert_eq!(burkelab(&["verify", "legendre", "--param", "oops"]).status.code(), Some(2));
    assert_eq!(burkelab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(burkelab(&["verify"]).status.code(), Some(2));
    assert_eq!(burkelab(&["report", "--samples", "10"]).status.code(), Some(2));
}

#[test]
fn unstable_rates_reported_verbatim() {
    let o = burkelab(&["verify", "burke-mm1", "--param", "lambda=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unstable system: arrival rate 2 must be strictly below service rate 1"), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# legendre at two points\ntheorem_id = legendre\nlambda = 0.25, 0.5\nformat = json\nseed = 11\n").unwrap();
    let out = dir.path().join("plot.csv");
    let o = burkelab(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theorem_id,statistic,value,p_value,passed"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn same_seed_same_bytes() {
    let a = burkelab(&["verify", "ar1-output", "--samples", "2000", "--seed", "9"]);
    let b = burkelab(&["verify", "ar1-output", "--samples", "2000", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let c = burkelab(&["verify", "ar1-output", "--samples", "2000", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn shape_csv() {
    let o = burkelab(&["shape", "--kind", "poisson", "--x", "0.5,4", "--n", "20", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,estimate,stderr,reference");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("4,") && lines[2].ends_with(",1"));
}

#[test]
fn sample_outputs() {
    let o = burkelab(&["sample", "gue", "--n", "4", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 12);
    let o = burkelab(&["sample", "tandem", "--window", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("time,stage,event_type"));
    let o = burkelab(&["sample", "brownian", "--dt", "0.5", "--window", "2"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 5);
    let o = burkelab(&["sample", "tandem", "--lambda", "3"]);
    assert_eq!(o.status.code(), Some(2));
}
