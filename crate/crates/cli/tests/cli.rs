use std::path::PathBuf;
use std::process::{Command, Output};

use contagion_core::quadrature::annuity_from_density;
use contagion_core::{build_schedule, leg_integrals, QuadConfig, SymmetricCompetitorParams};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contagion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn price_reports_reference_premium() {
    let o = run(&["price"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let s = v["premium"].as_f64().unwrap();
    assert!((s - 0.050_433_718_475_983_51).abs() < 1e-15);
    assert_eq!(v["summed"]["mode"], "summed");
    assert_eq!(v["paper"]["mode"], "paper");
    assert_eq!(v["schedule"]["n_payments"], 20);
    assert!(v.get("annualized_premium").is_none());

    let o = run(&["price", "--accrual", "paper", "--annualized"]);
    let v = stdout_json(&o);
    let paper = v["paper"]["premium"].as_f64().unwrap();
    assert_eq!(v["premium"].as_f64().unwrap(), paper);
    assert!((v["annualized_premium"].as_f64().unwrap() - paper / 0.25).abs() < 1e-15);
}

#[test]
fn price_independent_model_matches_quadrature() {
    let o = run(&["price", "--b", "0", "--c", "0"]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o)["premium"].as_f64().unwrap();

    let params = SymmetricCompetitorParams::new(0.1, 0.2, 0.0, 0.0);
    let sched = build_schedule(5.0, 0.25, 0.1, 0.05).unwrap();
    let cfg = QuadConfig::default();
    let legs = leg_integrals(&params, &sched, &cfg).unwrap();
    let annuity = annuity_from_density(&params, &sched, &cfg).unwrap();
    let reference = legs.protection.value / (annuity.value + legs.accrual_sum().value);
    assert!((s - reference).abs() <= 1e-9 * reference);
}

#[test]
fn bad_schedule_is_config_error() {
    let o = run(&["price", "--maturity", "5.1"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("5.1") && err.contains("0.25"), "{err}");
}

#[test]
fn invalid_parameters_are_named() {
    let o = run(&["price", "--b", "0.2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("atten_b"));
}

#[test]
fn general_model_only_for_simulate() {
    let path = tmp("general.json");
    std::fs::write(
        &path,
        r#"{"model": {"kind": "general", "base_b": 0.1, "base_c": 0.2,
                      "jump_b": 0.3, "jump_c": -0.1, "atten_b": 1.0, "atten_c": 0.5},
            "mc": {"paths": 5000}}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["price", "--config", p])), 2);
    let o = run(&["simulate", "--config", p]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["paths"], 5000);
    assert_eq!(v["curve"].as_array().unwrap().len(), 20);
    assert!(v["premium"]["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_config_field_rejected() {
    let path = tmp("typo.json");
    std::fs::write(&path, r#"{"mc": {"path": 10}}"#).unwrap();
    assert_eq!(
        code(&run(&["price", "--config", path.to_str().unwrap()])),
        2
    );
}

#[test]
fn curves_small_grid() {
    let o = run(&["curves", "--t-min", "0", "--t-max", "1", "--steps", "3"]);
    assert_eq!(code(&o), 0);
    let header = String::from_utf8_lossy(&o.stdout)
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert_eq!(
        header,
        "t1,t2,joint_survival,joint_density,marginal_b,marginal_c,increment_b,bound_b,increment_c,bound_c"
    );
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0);
    for r in &rows {
        let on_diagonal = r[0] == r[1];
        assert_eq!(r[3].is_empty(), on_diagonal);
    }
    assert_eq!(code(&run(&["curves", "--steps", "0"])), 2);
}

#[test]
fn validate_is_reproducible_and_worker_independent() {
    let paths = ["v1.json", "v2.json", "v3.json"].map(tmp);
    for (p, workers) in paths.iter().zip(["1", "1", "3"]) {
        let o = run(&[
            "validate",
            "--paths",
            "20000",
            "--workers",
            workers,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes: Vec<_> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);

    let v: Value = serde_json::from_slice(&bytes[0]).unwrap();
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 25 + 10 + 2 + 20 + 2);
    assert_eq!(v["bound_grid"].as_array().unwrap().len(), 27);
    let ratio = v["accrual_ratio"].as_f64().unwrap();
    assert!((ratio - v["one_minus_exp_beta_t"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn validate_failure_exit_code() {
    // a single path has zero standard error, so every z-score is infinite
    let o = run(&["validate", "--paths", "1", "--format", "csv"]);
    assert_eq!(code(&o), 1);
    assert!(csv_rows(&o).iter().any(|r| r[8] == "false"));
}

#[test]
fn sweep_outputs() {
    let o = run(&[
        "sweep", "--param", "delta", "--from", "0", "--to", "1", "--steps", "5",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 5);
    let protection: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(protection.windows(2).all(|w| w[1] < w[0]));

    let o = run(&[
        "sweep", "--param", "b", "--from", "0", "--to", "0.099", "--steps", "6",
    ]);
    let premium: Vec<f64> = csv_rows(&o).iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(premium.windows(2).all(|w| w[1] >= w[0]));

    let o = run(&[
        "sweep", "--param", "r", "--from", "0.03", "--to", "0.03", "--steps", "1",
    ]);
    assert_eq!(csv_rows(&o).len(), 1);

    assert_eq!(
        code(&run(&[
            "sweep", "--param", "vol", "--from", "0", "--to", "1"
        ])),
        2
    );
}

#[test]
fn schema_is_printed() {
    let o = run(&["--print-schema"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["title"], "RunConfig");
}
