use std::process::{Command, Output};

use serde_json::Value;

fn lcmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcmlab"))
        .args(args)
        .env_remove("LCMLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = lcmlab(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).unwrap()
}

#[test]
fn constant_examples() {
    let v = json(&["constant", "--a", "1", "--b", "0", "--l", "1", "--m", "0"]);
    assert_eq!(v["A"], "1");
    let v = json(&["constant", "--a", "3", "--b", "1", "--l", "1", "--m", "0"]);
    assert_eq!(v["A"], "9/4");
    assert_eq!(v["phi"], 2);
    assert_eq!(v["breakdown"].as_array().unwrap().len(), 2);
    let v = json(&["constant", "--a", "1", "--b", "0", "--l", "3", "--m", "2"]);
    assert_eq!(v["A"], "5/2");
    assert_eq!(v["A_display"], "2.50000000000");
}

#[test]
fn constant_accepts_negative_shift() {
    let v = json(&["constant", "--a", "4", "--b", "-3", "--l", "2", "--m", "1"]);
    let w = json(&["constant", "--a", "4", "--b", "1", "--l", "2", "--m", "1"]);
    assert_eq!(v["A"], w["A"]);
    assert_eq!(v["spec"]["b0"], 1);
}

#[test]
fn lcm_methods_agree() {
    for method in ["sieve", "gcd-fold", "theta-intervals"] {
        let v = json(&["lcm", "--a", "2", "--b", "1", "--l", "1", "--m", "0", "--n", "4", "--method", method]);
        assert_eq!(v["lcm"], "315", "{method}");
        assert!((v["log_lcm"].as_f64().unwrap() - 315f64.ln()).abs() < 1e-12);
    }
    let a = json(&["lcm", "--a", "6", "--b", "3", "--l", "3", "--m", "1", "--n", "40"]);
    let b = json(&["lcm", "--a", "6", "--b", "3", "--l", "3", "--m", "1", "--n", "40", "--method", "gcd-fold"]);
    assert_eq!(a["lcm"], b["lcm"]);
}

#[test]
fn logl_reports_split() {
    let v = json(&["logl", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n", "10"]);
    assert!((v["log_lcm"].as_f64().unwrap() - 2520f64.ln()).abs() < 1e-12);
    let first = v["first_power_sum"].as_f64().unwrap();
    let corr = v["correction"].as_f64().unwrap();
    assert!((first - 210f64.ln()).abs() < 1e-12);
    assert!((first + corr - 2520f64.ln()).abs() < 1e-12);
    assert_eq!(v["estimate"].as_f64().unwrap(), 10.0);
}

#[test]
fn primes_lists_support_with_locations() {
    let v = json(&["primes", "--a", "2", "--b", "1", "--l", "1", "--m", "0", "--n", "4"]);
    let primes: Vec<(u64, u64)> = v["primes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["p"].as_u64().unwrap(), p["e"].as_u64().unwrap()))
        .collect();
    assert_eq!(primes, vec![(3, 2), (5, 1), (7, 1)]);
    let csv = lcmlab(&["--format", "csv", "primes", "--a", "2", "--b", "1", "--l", "1", "--m", "0", "--n", "4"]);
    assert_eq!(stdout(&csv).lines().next(), Some("p,e,class,location"));
    assert_eq!(stdout(&csv).lines().count(), 4);
}

#[test]
fn theta_example() {
    let v = json(&["theta", "--x", "20", "--h", "4", "--k", "1"]);
    assert!((v["theta"].as_f64().unwrap() - 1105f64.ln()).abs() < 1e-12);
    let out = lcmlab(&["theta", "--x", "20", "--h", "4", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_csv_and_json() {
    let args = ["converge", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n-grid", "10^2,10^3"];
    let csv = lcmlab(&[&["--format", "csv"][..], &args[..]].concat());
    assert_eq!(csv.status.code(), Some(0));
    let text = stdout(&csv);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,log_lcm,ratio,constant,abs_err");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("100,"));
    let v = json(&args);
    assert_eq!(v["meta"]["constant_exact"], "1");
    assert_eq!(v["meta"]["method"], "sieve");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let args = ["converge", "--a", "5", "--b", "2", "--l", "4", "--m", "1", "--n-grid", "10^3,10^4"];
    let strip = |mut v: Value| {
        v["meta"]["timestamp"] = Value::Null;
        v
    };
    let one = strip(json(&[&["--threads", "1"][..], &args[..]].concat()));
    let four = strip(json(&[&["--threads", "4"][..], &args[..]].concat()));
    let env = Command::new(env!("CARGO_BIN_EXE_lcmlab"))
        .args(args)
        .env("LCMLAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    let env = strip(serde_json::from_slice(&env.stdout).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, env);
    let csv1 = lcmlab(&[&["--format", "csv", "--threads", "1"][..], &args[..]].concat());
    let csv2 = lcmlab(&[&["--format", "csv", "--threads", "2"][..], &args[..]].concat());
    assert_eq!(csv1.stdout, csv2.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("constant.json");
    let out = lcmlab(&[
        "--output",
        path.to_str().unwrap(),
        "constant",
        "--a",
        "3",
        "--b",
        "1",
        "--l",
        "1",
        "--m",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["A"], "9/4");
}

#[test]
fn validation_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &["constant", "--a", "0", "--b", "1", "--l", "1", "--m", "0"],
        &["constant", "--a", "2", "--b", "-2", "--l", "1", "--m", "0"],
        &["constant", "--a", "2", "--b", "1", "--l", "2", "--m", "2"],
        &["lcm", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n", "0"],
        &["--max-sieve", "1000", "lcm", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n", "2000"],
        &["--format", "csv", "lcm", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n", "5"],
        &["converge", "--a", "1", "--b", "0", "--l", "1", "--m", "0", "--n-grid", "10^3,10^2"],
        &["--threads", "0", "constant", "--a", "1", "--b", "0", "--l", "1", "--m", "0"],
        &["constant", "--a", "x"],
        &["no-such-command"],
    ];
    for args in cases {
        let out = lcmlab(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(lcmlab(&["--help"]).status.code(), Some(0));
    assert_eq!(lcmlab(&["--version"]).status.code(), Some(0));
}

#[test]
fn verify_small_grid_passes() {
    let out = lcmlab(&["verify", "--grid-small"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("all ") && text.ends_with(" checks passed\n"), "{text}");
}

#[test]
fn in_process_runner_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = lcmlab::cli::run_with(
        ["lcmlab", "lcm", "--a", "2", "--b", "1", "--l", "1", "--m", "0", "--n", "4"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let bin = lcmlab(&["lcm", "--a", "2", "--b", "1", "--l", "1", "--m", "0", "--n", "4"]);
    assert_eq!(out, bin.stdout);
}
