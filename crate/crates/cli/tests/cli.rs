use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use gridlambda_core::cases::parse_tsv_grid;
use gridlambda_core::Scalar;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridlambda"))
}

fn corpus(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(case).join("model.wb")
}

fn scratch_file(tag: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("gridlambda-cli-{tag}-{}.wb", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_spill_reference() {
    let out = bin().arg("eval").arg(corpus("corkscrew")).args(["--print", "balance#", "--format", "tsv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = parse_tsv_grid(&stdout(&out)).expect("tsv");
    assert_eq!(grid.shape(), (1, 6));
    let rounded: Vec<f64> = grid.iter().map(|s| s.as_f64().unwrap().round()).collect();
    assert_eq!(rounded, [-30000.0, -44750.0, -43988.0, -27437.0, 5191.0, 54201.0]);
}

#[test]
fn tsv_output_keeps_full_precision() {
    let out = bin().arg("eval").arg(corpus("portfolio")).args(["--print", "G4#", "--format", "tsv"]).output().unwrap();
    let grid = parse_tsv_grid(&stdout(&out)).expect("tsv");
    assert_eq!(grid.shape(), (9, 1));
    assert_eq!(grid.get(3, 0), &Scalar::Number(1070.4180000000001));
}

#[test]
fn table_output_labels_regions() {
    let out = bin().arg("eval").arg(corpus("growth")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("Sheet1!"), "{}", stdout(&out));
}

#[test]
fn cycle_exits_with_one() {
    let path = scratch_file("cycle", "A1 := =B1 + 1\nB1 := =A1\n");
    let out = bin().arg("eval").arg(&path).args(["--print", "A1"]).output().unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("#CIRC!"), "{}", stdout(&out));
}

#[test]
fn syntax_error_exits_with_two_and_names_the_line() {
    let path = scratch_file("syntax", "A1 := 1\nA2 := =SUM(1,\n");
    let out = bin().arg("eval").arg(&path).output().unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn corpus_command_passes_all_cases() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let out = bin().arg("corpus").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("9 passed, 0 failed"), "{}", stdout(&out));
}

#[test]
fn repl_session_with_growth_workbook() {
    let mut child = bin()
        .arg("repl")
        .arg(corpus("growth"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("=ROWS(ExponentialGrowthλ(10000, 5%, 12))\nname k := =2\n=k * 21\n:quit\n=1\n".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines, ["13", "defined k", "42"]);
}

#[test]
fn trace_flag_writes_eval_lines() {
    let path = scratch_file("trace", "A1 := =LET(x, 2, x * x)\n");
    let out = bin().arg("--trace").arg("eval").arg(&path).args(["--print", "A1"]).output().unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("EVAL Sheet1!A1:x #1"));
}

#[test]
fn recursion_limit_from_environment() {
    let path = scratch_file("depth", "name Downλ := =LAMBDA(n, IF(n = 0, 0, 1 + Downλ(n - 1)))\nA1 := =Downλ(50)\n");
    let out = bin().env("GRIDLAMBDA_MAX_RECURSION", "10").arg("eval").arg(&path).args(["--print", "A1"]).output().unwrap();
    let ok = bin().arg("eval").arg(&path).args(["--print", "A1", "--format", "tsv"]).output().unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("#NUM!"));
    assert_eq!(stdout(&ok).trim(), "50");
}

#[test]
fn functions_lists_builtins() {
    let out = bin().arg("functions").output().unwrap();
    assert!(stdout(&out).lines().any(|l| l.starts_with("SCAN\t")));
}
