use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use ncmax_core::avgops::{avg_apply, grid_lp_norm, GridFunction};
use ncmax_core::io::write_grid;
use ncmax_core::{DyadicLevel, Exponent, GeneralOperator, Operator};

const PROJECTIONS: &str = r#"{"dim": 2, "positive": true,
  "items": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;

fn ncmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncmax")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn l1_norm_of_projection_pair() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "seq.json", PROJECTIONS);
    let out = ncmax(&["norm", "--kind", "l1-pos", "--p", "1", "--input", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json_of(&out)["value"], 2.0);
}

#[test]
fn linf_norm_writes_certificate() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "seq.json", PROJECTIONS);
    let cert = dir.path().join("cert.json");
    let out = ncmax(&["norm", "--kind", "linf-pos", "--p", "inf", "--input", s(&input), "--output", s(&cert)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["certificate"], s(&cert));
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["kind"], "dominant");

    let out = ncmax(&["norm", "--kind", "linf-pos", "--p", "2", "--input", s(&input)]);
    let v = json_of(&out);
    assert!((v["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!(v["gap"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn malformed_input_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "bad.json", "{\"dim\": 2,\n \"positive\": tru");
    let out = ncmax(&["norm", "--kind", "l1-pos", "--p", "1", "--input", s(&input)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&ncmax(&["norm", "--kind", "l1-pos", "--p", "1", "--input", s(&missing)])), 2);
    assert_eq!(code(&ncmax(&["norm", "--kind", "l1-pos", "--p", "0.5", "--input", s(&input)])), 2);
    assert_eq!(code(&ncmax(&["norm", "--kind", "sup", "--p", "1", "--input", s(&input)])), 2);
}

#[test]
fn dominate_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "seq.json", PROJECTIONS);
    let out_path = dir.path().join("dom.json");
    let out = ncmax(&["dominate", "--p", "3", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json_of(&out);
    assert!((v["primal"].as_f64().unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-6);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(written["dual"]["items"].as_array().unwrap().len(), 2);

    let out = ncmax(&["oracle", "--p", "3", "--input", s(&input), "--resolution", "1e-4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(json_of(&out)["difference"].as_f64().unwrap() <= 2e-4);
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "seq.json", PROJECTIONS);
    let config = file(&dir, "cfg.json", r#"{"solver": {"max_iter": 1}}"#);
    let out = ncmax(&["dominate", "--p", "1.5", "--input", s(&input), "--config", s(&config)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(json_of(&out)["converged"], false);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "seq.json", PROJECTIONS);
    let config = file(&dir, "cfg.json", r#"{"solver": {"tolerance": 1e-3}}"#);
    let out = ncmax(&["dominate", "--p", "2", "--input", s(&input), "--config", s(&config)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tolerance"), "{}", stderr(&out));
}

#[test]
fn maximal_constant_input_has_unit_ratio() {
    let dir = TempDir::new().unwrap();
    let c = GeneralOperator::from_real_rows(&[&[2.0, 1.0], &[0.0, 1.0]]).unwrap();
    let input = dir.path().join("f.json");
    write_grid(&input, &GridFunction::constant(c, 32).unwrap()).unwrap();
    let output = dir.path().join("F.json");
    let out = ncmax(&["maximal", "--p", "2", "--levels", "3", "--input", s(&input), "--output", s(&output)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json_of(&out);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["bound"], 16.0);
    assert!(output.exists());
}

#[test]
fn maximal_scalar_input_matches_pointwise_maximum() {
    let dir = TempDir::new().unwrap();
    let values: Vec<f64> = (0..32).map(|j| ((j * 7 % 11) as f64 - 5.0) * if j % 3 == 0 { 1.0 } else { 0.1 }).collect();
    let f = GridFunction::from_scalars(&values).unwrap();
    let input = dir.path().join("f.json");
    write_grid(&input, &f).unwrap();
    let out = ncmax(&["maximal", "--p", "4", "--levels", "3", "--input", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let abs = GridFunction::from_scalars(&values.iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap();
    let avgs: Vec<GridFunction> = (0..=3).map(|n| avg_apply(&abs, DyadicLevel::new(n).unwrap()).unwrap()).collect();
    let max: Vec<f64> = (0..32)
        .map(|j| avgs.iter().map(|a| a.values()[j].matrix()[(0, 0)].re).fold(0.0, f64::max))
        .collect();
    let p = Exponent::Finite(4.0);
    let oracle = grid_lp_norm(&GridFunction::from_scalars(&max).unwrap(), p) / grid_lp_norm(&f, p);
    let ratio = json_of(&out)["ratio"].as_f64().unwrap();
    assert!((ratio - oracle).abs() <= 1e-6 * oracle, "{ratio} vs {oracle}");
}

#[test]
fn maximal_rejects_p_below_two() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.json");
    write_grid(&input, &GridFunction::from_scalars(&[1.0; 16]).unwrap()).unwrap();
    let out = ncmax(&["maximal", "--p", "1.5", "--levels", "2", "--input", s(&input)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2 <= p < inf"), "{}", stderr(&out));
}

#[test]
fn verify_stein_within_bound() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let out = ncmax(&["verify", "--suite", "stein", "--seed", "42", "--trials", "50", "--output", s(&report)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let r = &v[0];
    assert_eq!(r["suite"], "stein");
    assert_eq!(r["ratios"].as_array().unwrap().len(), 50);
    assert!(r["max_ratio"].as_f64().unwrap() <= 4.0);
    assert_eq!(r["pass"], true);
    assert!(stderr(&out).contains("PASS stein"));
}

#[test]
fn verify_usage_errors_exit_2() {
    assert_eq!(code(&ncmax(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&ncmax(&["verify", "--suite", "theorem", "--p", "1.5", "--trials", "1"])), 2);
    assert_eq!(code(&ncmax(&["verify", "--suite", "stein", "--trials", "0"])), 2);
    assert_eq!(code(&ncmax(&["frobnicate"])), 2);
}

#[test]
fn verify_failure_exits_1() {
    // a solver without iterations skips every trial, which fails the skip rate
    let dir = TempDir::new().unwrap();
    let config = file(&dir, "cfg.json", r#"{"solver": {"max_iter": 1}, "grid_size": 16, "levels": 1}"#);
    let out = ncmax(&["verify", "--suite", "theorem", "--trials", "2", "--config", s(&config)]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v[0]["pass"], false);
    assert_eq!(v[0]["skipped"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_csv_rows() {
    let out = ncmax(&["verify", "--suite", "cauchy_schwarz", "--trials", "3", "--p", "1,inf", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "suite,p,trial,ratio,bound,status");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[4].starts_with("cauchy_schwarz,inf,0,"));
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ncmax"))
            .args(["verify", "--suite", "lemma21", "--trials", "4", "--seed", "3"])
            .env("NCMAX_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let two = run("2");
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    let strip = |out: &Output| {
        let mut v = json_of(out);
        for r in v.as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("wall_time");
        }
        v
    };
    assert_eq!(strip(&one), strip(&two));
    assert_eq!(code(&run("0")), 2);
    assert_eq!(code(&run("many")), 2);
}
