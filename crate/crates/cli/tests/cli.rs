use std::path::Path;
use std::process::{Command, Output};

const E11A: &str = "0,-1,1,-10,-20";

fn exzero(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_exzero"));
    cmd.args(args).env_remove("EXZERO_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("EXZERO_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn tate_prints_parameters_with_precision() {
    let o = exzero(&["tate", "--curve", E11A, "--p", "11"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("ord_p(q) = 5"));
    assert!(out.contains("L-invariant = "));
    assert!(out.contains("O(11^"));
    assert!(out.contains("PASS j(q) = j(E) mod 11^8"));
    assert!(out.contains("PASS Saint-Etienne"));
}

#[test]
fn lp_eval_at_one_is_exact_zero() {
    let o = exzero(&["lp-eval", "--curve", E11A, "--p", "11"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("= 0 exactly at all 5 levels"));
}

#[test]
fn lp_eval_rejects_s_outside_zp() {
    let o = exzero(&["lp-eval", "--curve", E11A, "--p", "11", "--s", "1/11"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gs_check_passes_for_11a() {
    let o = exzero(&["gs-check", "--curve", E11A, "--p", "11"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[0]^+ = 1/5"));
}

#[test]
fn mtt_report_for_91b_is_consistent() {
    let o = exzero(&["mtt-report", "--curve", "0,1,1,-7,5", "--p", "7", "--rank", "1"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("c0 = 0 + O(7^"));
    assert!(out.contains("c1 = 0 + O(7^"));
    assert!(out.contains("verdict: consistent with ord >= 2"));
}

#[test]
fn lambda_bk_needs_both_inputs() {
    let o = exzero(&["lambda-bk", "--curve", E11A, "--p", "11", "--alpha", "2"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = exzero(&["lambda-bk", "--curve", E11A, "--p", "11", "--alpha", "2", "--height", "1/3"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda_BK = "));
}

#[test]
fn lambda_bk_rejects_zero_height() {
    let o = exzero(&["lambda-bk", "--curve", E11A, "--p", "11", "--alpha", "1", "--height", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn height_unit_prints_a_padic_value() {
    let o = exzero(&["height-unit", "--curve", E11A, "--p", "11"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("+ O(11^"));
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        &["frobnicate"][..],
        &["tate", "--curve", E11A, "--p", "3"],
        &["tate", "--curve", E11A, "--p", "5"],
        &["tate", "--curve", "0,0,0,0,0", "--p", "11"],
        &["tate", "--curve", "1,2,3", "--p", "11"],
        &["tate", "--p", "11"],
        &["cohomlab-suite", "--instances", "0"],
    ] {
        let o = exzero(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn cohomlab_suite_prints_pass_lines() {
    let o = exzero(&["cohomlab-suite", "--seed", "3", "--instances", "5"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS ")).count() >= 10);
    assert!(!out.contains("FAIL"));
}

#[test]
fn json_output_annotates_precision() {
    let o = exzero(&["--json", "tate", "--curve", E11A, "--p", "11"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tate"]["ord"], 5);
    let q = v["tate"]["q"]["display"].as_str().unwrap();
    assert!(q.contains("O(11^"), "{q}");
}

#[test]
fn curve_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("26a.json");
    std::fs::write(&path, r#"{"a1":1,"a2":0,"a3":1,"a4":-5,"a6":-8,"p":13}"#).unwrap();
    let o = exzero(&["gs-check", "--curve-file", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("[0]^+ = 1/3"));
    std::fs::write(&path, "{not json").unwrap();
    let o = exzero(&["gs-check", "--curve-file", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

fn cache_file(dir: &Path) -> std::path::PathBuf {
    let entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    entries[0].clone()
}

#[test]
fn cache_is_written_then_hit() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gs-check", "--curve", E11A, "--p", "11"];
    let first = exzero(&args, Some(dir.path()));
    assert!(stderr(&first).contains("cache: stored"));
    let second = exzero(&args, Some(dir.path()));
    assert!(stderr(&second).contains("cache: hit"));
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn cache_dir_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = exzero(
        &["gs-check", "--curve", E11A, "--p", "11", "--cache-dir", flag_dir.path().to_str().unwrap()],
        Some(env_dir.path()),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 0);
    cache_file(flag_dir.path());
}

#[test]
fn corrupted_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gs-check", "--curve", E11A, "--p", "11"];
    let clean = exzero(&args, Some(dir.path()));
    let path = cache_file(dir.path());
    let mut bytes = std::fs::read(&path).unwrap();
    let at = bytes.len() - 10;
    bytes[at] = if bytes[at] == b'1' { b'2' } else { b'1' };
    std::fs::write(&path, &bytes).unwrap();
    let o = exzero(&args, Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("recomputing"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cache: stored"));
    assert_eq!(stdout(&o), stdout(&clean));
    let again = exzero(&args, Some(dir.path()));
    assert!(stderr(&again).contains("cache: hit"));
}

#[test]
fn stale_cache_version_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gs-check", "--curve", E11A, "--p", "11"];
    exzero(&args, Some(dir.path()));
    let path = cache_file(dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("v1", "v0", 1)).unwrap();
    let o = exzero(&args, Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("VersionMismatch"), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("EXZERO-MODSYM-CACHE v1"));
}
