use anhosc::continuum::harmonic_fixed_origin;
use anhosc::lattice::ModelParams;
use serde_json::Value;
use std::process::{Command, Output};

fn anhosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anhosc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn propagate_harmonic_matches_mehler() {
    let out = anhosc(&["propagate", "--a", "0", "--b", "0.5", "--beta", "1.3", "--xf", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (pref, expo) = harmonic_fixed_origin(&ModelParams::new(0.0, 0.5, 1.0, 1.3, 0.4).unwrap()).unwrap();
    let r = &v["result"];
    assert!((r["propagator"].as_f64().unwrap() - pref * expo.exp()).abs() < 1e-14);
    assert_eq!(r["universal_exponent"].as_f64(), Some(0.0));
    assert_eq!(r["polynomial_factor"].as_f64(), Some(1.0));
    assert_eq!(v["diagnostics"]["status"], "ok");
}

#[test]
fn propagate_reports_all_factors() {
    let out = anhosc(&["propagate", "--a", "2", "--b", "1", "--xf", "0.5", "--pmax", "2", "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = &v["result"];
    let f: Vec<f64> = ["harmonic_prefactor", "harmonic_exponent", "universal_exponent", "polynomial_factor", "propagator"]
        .iter()
        .map(|k| r[*k].as_f64().unwrap_or_else(|| panic!("{k} missing")))
        .collect();
    let product = f[0] * (f[1] + f[2]).exp() * f[3];
    assert!((product - f[4]).abs() <= 1e-12 * f[4].abs());
    assert_eq!(v["truncation"]["pmax"].as_u64(), Some(2));
    assert_eq!(v["truncation"]["order"].as_u64(), Some(3));
}

#[test]
fn exit_codes() {
    let node = format!("{}", -std::f64::consts::PI.powi(2) / 2.0);
    let singular = anhosc(&["propagate", "--a", "2", "--b", &node, "--xf", "1"]);
    assert_eq!(singular.status.code(), Some(2));
    assert_eq!(json(&singular)["diagnostics"]["status"], "singular");
    assert_eq!(anhosc(&["validate", "--suite", "nonsense"]).status.code(), Some(1));
    assert_eq!(anhosc(&["propagate", "--c", "-1"]).status.code(), Some(1));
    assert_eq!(anhosc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(anhosc(&["--help"]).status.code(), Some(0));
    let ok = anhosc(&["validate", "--suite", "algebra"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["checks"][0]["status"], "pass");
}

#[test]
fn sweep_header_and_order() {
    let out = anhosc(&["sweep", "--sweep", "b", "--from", "-1", "--to", "1", "--steps", "5", "--a", "0.1", "--xf", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "param,value,harmonic_prefactor,harmonic_exponent,universal_exponent,polynomial_factor,propagator,status"
    );
    let values: Vec<f64> = rows(&out).iter().map(|r| num(&r[1])).collect();
    assert_eq!(values, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    assert!(rows(&out).iter().all(|r| r[0] == "b" && r[7] == "ok"));
}

#[test]
fn xf_sweep_is_gaussian_without_anharmonicity() {
    let out = anhosc(&["sweep", "--sweep", "xf", "--from", "0", "--to", "2", "--steps", "9", "--a", "0", "--b", "1", "--beta", "0.8"]);
    let g = 2f64.sqrt();
    for r in rows(&out) {
        let x = num(&r[1]);
        let expect = -0.5 * g / (g * 0.8).tanh() * x * x;
        assert!((num(&r[3]) - expect).abs() <= 1e-13 * (1.0 + expect.abs()), "xf={x}");
    }
}

#[test]
fn universal_exponent_is_linear_in_a() {
    let out = anhosc(&["sweep", "--sweep", "a", "--from", "0", "--to", "1", "--steps", "6", "--xf", "1"]);
    let r = rows(&out);
    let slope = num(&r[1][4]) / num(&r[1][1]);
    assert!(slope < 0.0);
    for row in &r {
        assert!((num(&row[4]) - slope * num(&row[1])).abs() <= 1e-12);
    }
}

#[test]
fn output_is_deterministic_and_formats_agree() {
    let args = ["propagate", "--a", "0.3", "--b", "-1", "--xf", "0.7"];
    let first = anhosc(&args);
    assert_eq!(first.stdout, anhosc(&args).stdout);
    let sweep = ["sweep", "--sweep", "beta", "--from", "0.5", "--to", "1.5", "--steps", "4", "--a", "0.2", "--xf", "0.3"];
    let csv = anhosc(&sweep);
    assert_eq!(csv.stdout, anhosc(&sweep).stdout);
    for r in rows(&csv) {
        let j = json(&anhosc(&["propagate", "--a", "0.2", "--xf", "0.3", "--beta", &r[1]]));
        assert_eq!(j["result"]["propagator"].as_f64().unwrap(), num(&r[6]));
        assert_eq!(j["result"]["harmonic_exponent"].as_f64().unwrap(), num(&r[3]));
    }
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# model\na = 0.4\nb = 2\nxf = 0.5 # endpoint\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&anhosc(&["propagate", "--config", cfg, "--b", "1"]));
    assert_eq!(v["params"]["a"].as_f64(), Some(0.4));
    assert_eq!(v["params"]["b"].as_f64(), Some(1.0));
    assert_eq!(v["params"]["xf"].as_f64(), Some(0.5));
    assert_eq!(v["params"]["c"].as_f64(), Some(1.0));
    std::fs::write(dir.path().join("bad.cfg"), "colour = blue\n").unwrap();
    let bad = anhosc(&["propagate", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = anhosc(&["propagate", "--a", "0.1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    let v: Value = serde_json::from_slice(&written).unwrap();
    assert_eq!(v["params"]["a"].as_f64(), Some(0.1));
}

#[test]
fn oracle_command_passes() {
    for n in ["2", "3"] {
        let out = anhosc(&["oracle", "--n", n, "--a", "0.1", "--beta", "0.3", "--xf", "0.2"]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["status"], "pass");
        assert!(v["rel_diff"].as_f64().unwrap() < 1e-6);
    }
}
