use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cuspsym");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CUSPSYM_CACHE_DIR").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eisenstein_level_one_weight_four() {
    let out = run(&["eisenstein", "--N", "1", "--k", "4", "--prec", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["weight"], 4);
    assert_eq!(v["parts"][0].as_object().unwrap().len(), 3);
}

#[test]
fn output_is_deterministic() {
    let args = ["mu", "--open", "0,0,1/5,2/5 mod 1", "--W", "2", "--prec", "6"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_manin_passes_at_level_three() {
    let out = run(&["verify-manin", "--N", "3", "--W", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    for case in ["a", "b", "c"] {
        assert_eq!(v["cases"][case]["man1"]["pass"], true);
        assert_eq!(v["cases"][case]["man2"]["pass"], true);
    }
}

#[test]
fn verify_identities_reports_discrepancies() {
    let out = run(&["verify-identities", "--nmax", "40", "--series-nmax", "6", "--prec", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["discrepancies"].as_array().unwrap().len(), 3);
}

#[test]
fn bg_table_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = run(&["bg-table", "--N", "5", "--k", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["summary"]["cusp_rank"], 1);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(t["level"], 5);
}

#[test]
fn cusp_part_of_a_supplied_combination() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("combo.json");
    let combo = r#"{"level":5,"terms":[{"coefficient":{"level":5,"num":[1,0,0,0],"den":[1,1,1,1]},"factors":[{"k":1,"c":[0,1]},{"k":1,"c":[0,2]}],"monomial":[0,0]}]}"#;
    std::fs::write(&path, combo).unwrap();
    let out = run(&["cusp-part", "--N", "5", "--k", "2", "--combo", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["parts"]["0,0"].is_object());
}

#[test]
fn text_format() {
    let out = run(&["--format", "text", "eisenstein", "--N", "3", "--k", "2", "--c1", "1", "--prec", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("weight: 2"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["eisenstein", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_two() {
    let out = run(&["mu", "--open", "not an open"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

fn cached_files(dir: &Path) -> usize {
    walk(dir).filter(|p| p.extension().is_some_and(|e| e == "json")).count()
}

fn walk(dir: &Path) -> Box<dyn Iterator<Item = std::path::PathBuf>> {
    let Ok(rd) = std::fs::read_dir(dir) else { return Box::new(std::iter::empty()) };
    Box::new(rd.flatten().flat_map(|e| {
        let p = e.path();
        if p.is_dir() {
            walk(&p)
        } else {
            Box::new(std::iter::once(p))
        }
    }))
}

#[test]
fn cache_environment_variable_overrides_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let args = [
        "--cache-dir",
        flag_dir.path().to_str().unwrap(),
        "eisenstein",
        "--N",
        "5",
        "--k",
        "3",
        "--c2",
        "2",
        "--prec",
        "8",
    ];
    let first = Command::new(BIN).args(args).env("CUSPSYM_CACHE_DIR", env_dir.path()).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(cached_files(env_dir.path()), 1);
    assert_eq!(cached_files(flag_dir.path()), 0);
    let second = Command::new(BIN).args(args).env("CUSPSYM_CACHE_DIR", env_dir.path()).output().unwrap();
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(run(&args).stdout, first.stdout);
    assert_eq!(cached_files(flag_dir.path()), 1);
}
