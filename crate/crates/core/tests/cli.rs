use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn centmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_centmon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &str = "B\n\n4\n3\n\ng0\ng1\ng2\ng3\na\nb\nc\nXX.\n.XX\n.X.\nXXX\n";

fn small_context(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("in.cxt");
    fs::write(&path, SMALL).unwrap();
    path
}

#[test]
fn classify_map_26() {
    let o = centmon(&["classify", "26"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("U(26)"));
    let o = centmon(&["classify", "26", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["condition"], "U26");
    assert_eq!(v["table"], serde_json::json!([0, 1, 2, 2]));
    assert_eq!(v["image_size"], 3);
}

#[test]
fn enumerate_counts_c1() {
    let o = centmon(&["enumerate", "--attribute", "C1", "--count-only"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "4096");
    let o = centmon(&["enumerate", "--attribute", "U(26)", "--limit", "3"]);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(centmon(&[]).status.code(), Some(2));
    assert_eq!(centmon(&["intents", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(centmon(&["enumerate", "--attribute", "Z9"]).status.code(), Some(2));
    assert_eq!(centmon(&["stage"]).status.code(), Some(2));
}

#[test]
fn context_commands() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_context(dir.path());
    let p = input.to_str().unwrap();
    let o = centmon(&["intents", p, "--count"]);
    assert!(o.status.success());
    // intents: {b}, {a,b}, {b,c}, {a,b,c}
    assert_eq!(stdout(&o).trim(), "4");
    let o = centmon(&["maximal", p, "--count", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["maximal_intents"], 2);
    let out = dir.path().join("canon");
    let o = centmon(&["canonicalize", p, "--out-dir", out.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reduced_objects"], 2);
    let o = centmon(&["intents", out.join("K3.cxt").to_str().unwrap(), "--count"]);
    assert_eq!(stdout(&o).trim(), "4");
    assert_eq!(fs::read_to_string(&input).unwrap(), SMALL);
}

#[test]
fn malformed_context_fails_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cxt");
    fs::write(&path, SMALL.replace(".X.", ".Y.")).unwrap();
    let o = centmon(&["intents", path.to_str().unwrap(), "--count"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 15"));
}

#[test]
fn verify_without_stages_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = centmon(&["verify", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A1"));
}

#[test]
fn json_output_is_stable() {
    let a = centmon(&["oracle", "--json"]);
    let b = centmon(&["oracle", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["mismatches"], 0);
}

#[test]
fn stage_command_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = centmon(&["stage", "--attribute", "C2", "--dir", d, "--json"]);
    assert!(a.status.success());
    let file = dir.path().join("stages").join("stage-C2.json");
    let first = fs::read(&file).unwrap();
    let b = centmon(&["stage", "--attribute", "C2", "--dir", d, "--json", "--workers", "2"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(&file).unwrap(), first);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v[0]["candidates"], 4096);
}
