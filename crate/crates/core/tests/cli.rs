use std::path::PathBuf;
use std::process::{Command, Output};

fn oeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oeq")).args(args).env_remove("OEQ_BUDGET_SECS").output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn central_charge_and_weights() {
    let o = oeq(&["cc", "E13"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "16/15");
    let o = oeq(&["--json", "weights", "x1^3 + x2^2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["integral_total"], 6);
}

#[test]
fn gradings_table() {
    let o = oeq(&["gradings", "A11", "E6", "--rank", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 weight matrices"), "{}", stdout(&o));
}

#[test]
fn verify_exit_codes() {
    let o = oeq(&["verify", &fixture("appendix4_s11_w13.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("-2"));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("appendix4_s11_w13.json")).unwrap();
    let mut f: serde_json::Value = serde_json::from_str(&text).unwrap();
    let e0 = f["E"][0].as_str().unwrap().to_string();
    f["E"][0] = serde_json::Value::String(format!("{e0} + x1^3"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, f.to_string()).unwrap();
    let o = oeq(&["--json", "verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["mf_ok"], false);

    assert_eq!(oeq(&["verify", "/nonexistent/defect.json"]).status.code(), Some(3));
}

#[test]
fn ideal_check() {
    let o = oeq(&["ideal", "check", &fixture("appendix5_chain_loop.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "proper");

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("appendix5_chain_loop.json")).unwrap();
    let mut f: serde_json::Value = serde_json::from_str(&text).unwrap();
    f["constraints"] = serde_json::json!(["a1^2 + 1", "a1 - 1"]);
    let unit = dir.path().join("unit.json");
    std::fs::write(&unit, f.to_string()).unwrap();
    let o = oeq(&["ideal", "check", unit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "unit");

    // far too little time for the E13–Z11 constraints
    let o = oeq(&["--json", "ideal", "check", &fixture("appendix2_e13_z11.json"), "--budget-secs", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unknown"));
}

#[test]
fn qdim_table() {
    let o = oeq(&["--json", "qdim", &fixture("appendix1_a5_a2a2.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["reduced"]["product"], "2");
}

#[test]
fn search_verdicts() {
    let o = oeq(&["search", "--v1", "A2", "--v2", "A3", "--rank", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], "Obstructed");
    assert_eq!(r["obstructions"][0], "CentralCharge");

    let o = oeq(&["search", "--v1", "A5", "--v2", "A2xA2", "--rank", "2", "--budget-secs", "300"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], "Solvable");
}

#[test]
fn usage_errors() {
    assert_eq!(oeq(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(oeq(&["search", "--v1", "A5", "--v2", "A2xA2", "--rank", "2", "--budget-secs", "-1"]).status.code(), Some(3));
    assert_eq!(oeq(&["search", "--v1", "A5", "--v2", "A2xA2", "--rank", "2", "--pin", "a1"]).status.code(), Some(3));
    assert_eq!(oeq(&["cc", "x1^2*x2^2 +"]).status.code(), Some(3));
    assert_eq!(oeq(&["--version"]).status.code(), Some(0));
}
