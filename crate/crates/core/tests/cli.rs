use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use macrosig::synthetic::logit_panel;
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrosig")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn small_panel(dir: &Path) -> String {
    let p = dir.join("panel.csv");
    logit_panel(5, 240, -0.5, &[2.0, -1.5], 3).save(&p).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&bin(&["frobnicate"])), 2);
    assert_eq!(code(&bin(&["train", "--input", "x.csv", "--model", "svm"])), 2);
    assert_eq!(code(&bin(&["run"])), 2);
    assert_eq!(code(&bin(&["--help"])), 0);
}

#[test]
fn bad_config_exits_2_and_names_the_problem() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text = fs::read_to_string(fixture("synthetic_macro.toml")).unwrap().replace("label = \"Recession\"", "label = \"NBER\"");
    fs::write(&cfg, text.replace("input = \"synthetic_macro.csv\"", &format!("input = {:?}", fixture("synthetic_macro.csv")))).unwrap();
    let out = dir.path().join("out");
    let o = bin(&["run", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("NBER"));
    assert!(!out.exists());

    fs::write(&cfg, "seed = 1\n[data]\ninput = \"a.csv\"\nlabel = \"y\"\ncolour = 3\n").unwrap();
    assert_eq!(code(&bin(&["run", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn stage_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&bin(&["train", "--input", missing.to_str().unwrap(), "--model", "logit"])), 1);
    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "date,a,Recession\n2000-01,1,0\n1999-12,2,1\n").unwrap();
    assert_eq!(code(&bin(&["evaluate", "--input", garbage.to_str().unwrap(), "--folds", "2", "--family", "logit"])), 1);
}

#[test]
fn train_then_evaluate() {
    let dir = TempDir::new().unwrap();
    let panel = small_panel(dir.path());
    let model = dir.path().join("logit.json");
    let o = bin(&["train", "--input", &panel, "--model", "logit", "--seed", "3", "--output", model.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["evaluate", "--model", model.to_str().unwrap(), "--test", &panel]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["family"], "logit");
    assert_eq!(v["n"], 240);
    assert!(v["metrics"]["accuracy"].as_f64().unwrap() > 0.7);

    let o = bin(&["evaluate", "--model", model.to_str().unwrap(), "--test", &panel, "--table"]);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("| Metric | Logit |\n|---|---:|\n| Accuracy |"), "{table}");
}

#[test]
fn cross_validation_reports_every_fold() {
    let dir = TempDir::new().unwrap();
    let panel = small_panel(dir.path());
    for (k, plain) in [("2", false), ("5", false), ("3", true)] {
        let mut args = vec!["evaluate", "--input", &panel, "--folds", k, "--family", "probit", "--seed", "1"];
        if plain {
            args.push("--plain");
        }
        let o = bin(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["folds"].as_array().unwrap().len(), k.parse::<usize>().unwrap());
    }
}

#[test]
fn backcast_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("filled.csv");
    let input = fixture("synthetic_macro.csv");
    let o = bin(&["backcast", "--input", input.to_str().unwrap(), "--column", "COPPER_RET", "--max-k", "2", "--max-q", "2", "--criterion", "bic", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("filled.json")).unwrap()).unwrap();
    let entries = side.as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["series"], "COPPER_RET");
    assert_eq!(entries[0]["filled"].as_array().unwrap().len(), 4);
    for key in ["order", "ar", "ma", "loglik", "aic", "bic"] {
        assert!(!entries[0]["model"][key].is_null(), "{key}");
    }
    let csv = fs::read_to_string(&out).unwrap();
    let row1: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row1[0], "1986-01");
    // COPPER_RET is filled, VIX and GOLD_RET keep their gaps
    assert!(!row1[15].is_empty());
    assert!(row1[6].is_empty() && row1[14].is_empty());

    let o = bin(&["backcast", "--input", input.to_str().unwrap(), "--column", "NOPE"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn select_writes_report_and_heatmap() {
    let dir = TempDir::new().unwrap();
    let panel = small_panel(dir.path());
    let svg = dir.path().join("corr.svg");
    let json = dir.path().join("sel.json");
    let o = bin(&["select", "--input", &panel, "--label", "Recession", "--iterations", "30", "--trees", "80", "--seed", "7", "--threshold", "0.8", "--svg", svg.to_str().unwrap(), "--output", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let selected: Vec<&str> = v["selected"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(selected, ["s0", "s1"]);
    assert_eq!(v["boruta"]["features"].as_array().unwrap().len(), 5);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let o = bin(&["select", "--input", &panel, "--iterations", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn diagnostic_tests_print_json() {
    let input = fixture("synthetic_macro.csv");
    let input = input.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&bin(&["test", "jb", "--input", input, "--column", "VIX"]).stdout).unwrap();
    assert_eq!(v["n"], 420);
    let v: serde_json::Value = serde_json::from_slice(&bin(&["test", "adf", "--input", input, "--column", "UNRATE_CHG"]).stdout).unwrap();
    assert_eq!(v["stationary_at_5pct"], true);
    let o = bin(&["test", "reset", "--input", input, "--response", "INDPRO_YOY", "--regressors", "LEI_YOY", "PMI", "--powers", "2,3,5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let powers: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["power"].as_u64().unwrap()).collect();
    assert_eq!(powers, [2, 3, 5]);
    assert_eq!(code(&bin(&["test", "jb", "--input", input, "--column", "NOPE"])), 2);
}
