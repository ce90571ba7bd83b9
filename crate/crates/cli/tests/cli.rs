use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("spawn verify")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ncsym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

fn record<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["records"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap_or_else(|| panic!("no record {name}"))
}

#[test]
fn torus_trace_slope_record() {
    let out = verify(&["torus-trace", "--d", "2", "--nmax", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let slope = record(&v, "slope")["measured"].as_f64().unwrap();
    assert!((slope / (2.0 * std::f64::consts::PI) - 1.0).abs() < 0.02);
    assert_eq!(v["pass"], true);
}

#[test]
fn moments_recursions_pass() {
    let out = verify(&["moments", "--d", "2", "--max-degree", "10"]);
    assert_eq!(out.status.code(), Some(0));
    for r in json(&out)["records"].as_array().unwrap() {
        assert!(r["measured"].as_f64().unwrap() < 1e-12, "{r}");
    }
}

#[test]
fn su2_ratio_record() {
    let out = verify(&["su2", "--lmax", "200", "--word", "b1b1"]);
    assert_eq!(out.status.code(), Some(0));
    let m = record(&json(&out), "ratio")["measured"].as_f64().unwrap();
    assert!((m * 3.0 - 1.0).abs() < 0.02);
}

#[test]
fn csv_header_and_rows() {
    let out = verify(&["--suite", "moments", "--d", "4", "--max-degree", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,measured,reference,tolerance,pass"));
    assert!(lines.all(|l| l.split(',').count() == 5 && l.ends_with("true")));
}

#[test]
fn failing_check_exits_one() {
    let out = verify(&["moments", "--d", "4", "--max-degree", "6", "--tol.main_reduction", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(record(&v, "main_reduction")["pass"], false);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(verify(&["spectral-flow"]).status.code(), Some(2));
    assert_eq!(verify(&["moments", "--d", "3"]).status.code(), Some(2));
    assert_eq!(verify(&["su2", "--word", "b4b1"]).status.code(), Some(2));
    assert_eq!(verify(&["moments", "--tol.slope", "0.1"]).status.code(), Some(2));
    assert_eq!(verify(&["moments", "--seed", "abc"]).status.code(), Some(2));
    assert_eq!(verify(&[]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_three() {
    let out = verify(&["moments", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(verify(&["--config", "/nonexistent-dir/run.conf"]).status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let conf = tmp("run.conf");
    std::fs::write(&conf, "# pinned\nsuite = moments\nd = 4\nmax-degree = 4\nformat = csv\n").unwrap();
    let out = verify(&["--config", conf.to_str().unwrap(), "--format", "json", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["d"], "2");
    assert_eq!(v["config"]["max-degree"], "4");
    std::fs::write(&conf, "suite moments\n").unwrap();
    assert_eq!(verify(&["--config", conf.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reruns_are_identical_modulo_wall_time() {
    let path = tmp("sym.json");
    let run = || {
        let out = verify(&["symplectic", "--seed", "42", "--samples", "5", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());

    let (c, d) = (tmp("c.csv"), tmp("d.csv"));
    for p in [&c, &d] {
        let args = [
            "torus-trace",
            "--nmax",
            "64",
            "--samples",
            "2",
            "--seed",
            "7",
            "--format",
            "csv",
            "--out",
            p.to_str().unwrap(),
        ];
        assert_eq!(verify(&args).status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&c).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn seed_changes_stochastic_records() {
    let run = |seed: &str| {
        let v = json(&verify(&["torus-trace", "--nmax", "64", "--seed", seed, "--samples", "1"]));
        record(&v, "connes_0")["measured"].as_f64().unwrap()
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn help_exits_zero() {
    let out = verify(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("--theta"));
}

#[test]
fn symbol_compactness_small_grid() {
    let out = verify(&["symbol-compactness", "--radii", "25,50,100", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
    let r = record(&v, "tail_ratio_100")["measured"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&r));
    assert_eq!(verify(&["symbol-compactness", "--radii", "50,25"]).status.code(), Some(2));
}

#[test]
fn moyal_suite_passes() {
    let out = verify(&["moyal", "--samples", "5", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(verify(&["moyal", "--d", "4"]).status.code(), Some(2));
}
