use std::path::Path;
use std::process::{Command, Output};

fn adamsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adamsq")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn constants_json() {
    let o = adamsq(&["constants", "--n", "2", "--alpha", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gamma = v["gamma"].as_f64().unwrap();
    assert!((gamma - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((v["gamma_gradient"].as_f64().unwrap() - gamma).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&adamsq(&["verify", "nonexistent"])), 2);
    assert_eq!(code(&adamsq(&["no-such-command"])), 2);
    assert_eq!(code(&adamsq(&["verify", "taylor_match", "--format", "xml"])), 2);
    assert_eq!(code(&adamsq(&["constants", "--alpha", "5"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"epsilon": [1e-3, 1e-2]}"#).unwrap();
    assert_eq!(code(&adamsq(&["verify", "norm_slope", "--config", cfg.to_str().unwrap()])), 2);
    std::fs::write(&cfg, r#"{"scenario": "inversion"}"#).unwrap();
    assert_eq!(code(&adamsq(&["verify", "norm_slope", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn failing_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    std::fs::write(&cfg, r#"{"alphas": [0.5], "tolerance": 1e-9}"#).unwrap();
    let o = adamsq(&["verify", "inversion", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",fail"));
}

fn run_into(dir: &Path, seed: &str) -> Vec<u8> {
    let o = adamsq(&["verify", "taylor_match", "--seed", seed, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(dir.join("taylor_match.csv")).unwrap()
}

#[test]
fn fixed_seed_is_byte_identical() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_into(a.path(), "11");
    assert_eq!(first, run_into(b.path(), "11"));
    assert_ne!(first, run_into(c.path(), "12"));
    assert!(first.ends_with(b"\n") && !first.ends_with(b"\n\n"));
    let header = first.split(|&b| b == b'\n').next().unwrap();
    assert_eq!(header, b"scenario,quantity,parameters,measured,target,tolerance,relation,verdict");
}

#[test]
fn json_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = adamsq(&["verify", "taylor_match", "--format", "json", "--out", out]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("taylor_match.json")).unwrap()).unwrap();
    assert_eq!(v[0]["scenario"], "taylor_match");
    assert_eq!(v[0]["pass"], true);

    run_into(dir.path(), "0");
    let csv = dir.path().join("taylor_match.csv");
    assert_eq!(code(&adamsq(&["report", csv.to_str().unwrap()])), 0);
    let failing = dir.path().join("failing.csv");
    std::fs::write(&failing, "scenario,quantity,parameters,measured,target,tolerance,relation,verdict\nx,q,,1,0,0.1,at_most,fail\n").unwrap();
    assert_eq!(code(&adamsq(&["report", failing.to_str().unwrap()])), 1);
    assert_eq!(code(&adamsq(&["report", dir.path().join("missing.csv").to_str().unwrap()])), 2);
}

#[test]
fn data_subcommands() {
    let o = adamsq(&["rearrange"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,star,double_star\n"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&adamsq(&["potential", "--out", out])), 0);
    let pot = dir.path().join("potential.csv");
    let o = adamsq(&["functional", "--input", pot.to_str().unwrap(), "--c", "0.1", "--region", "ball:1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&adamsq(&["functional", "--region", "square"])), 2);
    assert_eq!(code(&adamsq(&["extremal", "--epsilon", "0.01", "--format", "json"])), 0);
}
