use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn melchaos(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_melchaos"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn summary(dir: &Path, cmd: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{cmd}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn check_passes_on_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(melchaos(&["check", "--out", out]), 0);
    let s = summary(dir.path(), "check");
    assert_eq!(s["status"], "pass");
    assert_eq!(s["result"]["scenario"]["scenario"], "S1");
    assert_eq!(s["schema"], "melchaos-summary/1");
}

#[test]
fn config_errors_exit_with_two_and_still_write_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(melchaos(&["zeros", "--out", out, "--epsilon=-0.01"]), 2);
    let s = summary(dir.path(), "zeros");
    assert_eq!(s["status"], "error");
    assert_eq!(s["error"]["kind"], "Config");

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "epsilon = [1e-2]\nunknown_key = 3\n").unwrap();
    assert_eq!(melchaos(&["check", "--out", out, "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(summary(dir.path(), "check")["exit_code"], 2);

    assert_eq!(melchaos(&["construct", "--out", out, "--symbols", "1x"]), 2);
}

#[test]
fn numerical_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sliding.toml");
    std::fs::write(&cfg, format!("output_dir = {:?}\n[system]\nfixture = \"sliding\"\n", dir.path())).unwrap();
    assert_eq!(melchaos(&["melnikov", "--config", cfg.to_str().unwrap()]), 1);
    let s = summary(dir.path(), "melnikov");
    assert_eq!(s["status"], "error");
    assert!(s["error"]["module"].is_string());
}

#[test]
fn json_configs_are_accepted_and_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    std::fs::write(&cfg, r#"{"melnikov": {"range": [0.0, 0.5], "step": 0.05}}"#).unwrap();
    let mut tables = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let code = melchaos(&["melnikov", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        tables.push(std::fs::read(out.join("melnikov.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let text = String::from_utf8(tables.remove(0)).unwrap();
    assert_eq!(text.lines().next(), Some("alpha,M_value"));
    assert_eq!(text.lines().count(), 12);
}
