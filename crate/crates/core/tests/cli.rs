use std::path::Path;
use std::process::{Command, Output};

fn qbattery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbattery"))
        .args(args)
        .env_remove("QBATTERY_JOBS")
        .output()
        .expect("run qbattery")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.trim_start_matches("# ").strip_prefix(&format!("{key}=")))
        .map(str::to_owned)
}

fn columns(text: &str) -> &str {
    text.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_header_and_columns() {
    let o = qbattery(&["simulate", "--tauq", "20", "--nout", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# qbattery "));
    assert_eq!(columns(&text), "t,re_a,im_a,re_b,im_b,E_A,E_B,P_B");
    assert_eq!(value(&text, "command").as_deref(), Some("simulate"));
    assert_eq!(value(&text, "tauq").as_deref(), Some("20"));
    assert!(value(&text, "result_t_m").is_some());
    assert!(value(&text, "timestamp").is_none());
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 51);
}

#[test]
fn zero_drive_gives_zero_energies() {
    let o = qbattery(&["simulate", "--f", "0", "--nout", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[5..], ["0", "0", "0"], "{line}");
    }
    assert_eq!(value(&text, "result_peak").as_deref(), Some("none"));
}

#[test]
fn csv_header_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let o = qbattery(&["simulate", "--r", "2", "--tauq", "35", "--gamma", "0.05", "--nout", "80", "--out", path_str(&first)]);
    assert!(o.status.success());
    assert!(value(&stdout(&o), "t_m").is_some());
    let o = qbattery(&["simulate", "--config", path_str(&first), "--out", path_str(&second)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn json_config_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"tauq": 40, "r": 0.5, "nout": 10}"#).unwrap();
    let o = qbattery(&["simulate", "--config", path_str(&cfg), "--tauq", "30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "tauq").as_deref(), Some("30"));
    assert_eq!(value(&text, "r").as_deref(), Some("0.5"));

    std::fs::write(&cfg, r#"{"tauq": 40, "bogus": 1}"#).unwrap();
    assert_eq!(qbattery(&["simulate", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn sweep_is_identical_for_one_and_many_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["sweep", "--r", "1", "--grid", "10:1000:6", "--fit"];
    let mut args_a = common.to_vec();
    args_a.extend(["--jobs", "1", "--out", path_str(&a)]);
    let mut args_b = common.to_vec();
    args_b.extend(["--jobs", "4", "--out", path_str(&b)]);
    assert!(qbattery(&args_a).status.success());
    assert!(qbattery(&args_b).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(columns(&text), "tau_q,t_m,e_bm,p_bm,status");
    assert!(value(&text, "jobs").is_none());
    let slope: f64 = value(&text, "result_slope").unwrap().parse().unwrap();
    assert!((slope - 0.5).abs() < 0.03, "{slope}");
}

#[test]
fn sweep_writes_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let o = qbattery(&[
        "sweep", "--grid", "10,30,100,300", "--method", "closed_form", "--fit", "e_bm", "--fit-window", "10:300", "--plot",
        path_str(&svg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<circle"));
    assert_eq!(value(&stdout(&o), "result_fit_field").as_deref(), Some("e_bm"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["simulate", "--tauq", "-3"],
        vec!["sweep", "--grid", "10,20"],
        vec!["sweep", "--grid", ""],
        vec!["sweep", "--fit", "nonsense"],
        vec!["analytic", "nonsense"],
        vec!["analytic", "quench_energy"],
        vec!["tc", "--gamma", "0.1", "--s-list", "2"],
        vec!["simulate", "--step", "--r", "2"],
        vec!["frobnicate"],
    ] {
        let o = qbattery(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn io_failure_exits_with_one() {
    let o = qbattery(&["simulate", "--nout", "5", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analytic_quantities() {
    let get = |args: &[&str]| -> f64 {
        let o = qbattery(args);
        assert!(o.status.success(), "{args:?}");
        let text = stdout(&o);
        text.trim().split_once('=').unwrap().1.parse().unwrap()
    };
    assert!((get(&["analytic", "theta_m", "--r", "1"]) - 4.594_879_147_22).abs() < 1e-9);
    assert!((get(&["analytic", "constant_peak", "--f", "1"]) - 4.0).abs() < 1e-12);
    assert!((get(&["analytic", "optimal_tauq", "--gamma", "0.1"]) - 25.128_624_172_5).abs() < 1e-8);
    let e = get(&["analytic", "decoupled_energy", "--f", "1", "--gamma", "0.1", "--gf", "0", "--t", "10"]);
    assert!((e - 400.0 * ((-0.5f64).exp() - 1.0).powi(2)).abs() < 1e-10);
}

#[test]
fn tc_writes_convergence_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let o = qbattery(&["tc", "--f", "0.02", "--tauq", "50", "--s-list", "4", "--nout", "101", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    assert!(value(&report, "ncutoff").is_some());
    assert!(value(&report, "error_s4").is_some());
    let conv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(columns(&conv), "s,error");
    let trace = std::fs::read_to_string(dir.path().join("conv_s4.csv")).unwrap();
    assert_eq!(columns(&trace), "t,e_a,e_b,norm,leakage");
}

#[test]
fn timestamp_is_opt_in() {
    let o = qbattery(&["simulate", "--nout", "3", "--timestamp"]);
    assert!(value(&stdout(&o), "timestamp").is_some());
}
