//! Golden-file tests: `analyze --report json` output for each bundled
//! fixture must be byte-identical across runs and match the stored report.

use std::path::PathBuf;
use std::process::Command;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn analyze_json(fixture: &str) -> Vec<u8> {
    let root = repo_root();
    let out = Command::new(env!("CARGO_BIN_EXE_rotkit"))
        .arg("analyze")
        .arg(root.join(format!("fixtures/{fixture}.json")))
        .args(["--report", "json"])
        .output()
        .expect("run rotkit");
    assert!(
        out.status.success(),
        "analyze {fixture} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn check_fixture(fixture: &str) {
    let golden_path = repo_root().join(format!("fixtures/golden/{fixture}.analyze.json"));
    if !golden_path.exists() {
        panic!("missing golden file for {fixture}");
    }
    let golden = std::fs::read(&golden_path).unwrap();
    let first = analyze_json(fixture);
    let second = analyze_json(fixture);
    assert_eq!(first, second, "{fixture}: report not deterministic");
    assert_eq!(
        first, golden,
        "{fixture}: report differs from golden file"
    );
}

#[test]
fn golden_example_6_1() {
    check_fixture("example-6-1");
}

#[test]
fn golden_example_6_2() {
    check_fixture("example-6-2");
}

#[test]
fn golden_ex_1_8() {
    check_fixture("ex-1-8");
}

#[test]
fn golden_fig_4_combed() {
    check_fixture("fig-4-combed");
}

#[test]
fn export_dot_deterministic() {
    let root = repo_root();
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_rotkit"))
            .arg("export-dot")
            .arg(root.join("fixtures/example-6-1.json"))
            .output()
            .expect("run rotkit");
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run(), "DOT output not deterministic");
}
