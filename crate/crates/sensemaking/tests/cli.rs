use std::path::PathBuf;
use std::process::{Command, Output};

fn sensemaking(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensemaking"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn chain_query_text() {
    let o = sensemaking(&["infer", "appendix1", "--evidence", "Traffic_Accident=1", "--query", "Injury"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "P(Injury=1)=0.800000000\nP(Injury=0)=0.200000000\n");
}

#[test]
fn json_output_is_byte_stable() {
    let args = ["sensemake", "explosion", "--json"];
    let first = sensemaking(&args);
    let second = sensemaking(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["action"], "leave-the-situation");
    assert!(stdout(&first).ends_with("}\n"));
}

#[test]
fn fixtures_validate() {
    for name in ["appendix1", "figure2", "figure5", "maier", "explosion"] {
        let o = sensemaking(&["validate", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}

#[test]
fn oracle_check_passes_on_fixtures() {
    for name in ["appendix1", "figure5", "maier"] {
        let o = sensemaking(&["oracle", name, "--check"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn cycle_is_a_validation_error() {
    let path = scratch(
        "cycle.json",
        r#"{
  "variables": [{"name": "A", "states": ["1", "0"]}, {"name": "B", "states": ["1", "0"]}],
  "cpts": [
    {"child": "A", "parents": ["B"], "rows": [{"given": ["1"], "probs": [0.5, 0.5]}, {"given": ["0"], "probs": [0.5, 0.5]}]},
    {"child": "B", "parents": ["A"], "rows": [{"given": ["1"], "probs": [0.5, 0.5]}, {"given": ["0"], "probs": [0.5, 0.5]}]}
  ]
}"#,
    );
    let o = sensemaking(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("CycleDetected"), "{}", stderr(&o));
}

#[test]
fn unnormalized_row_names_its_path() {
    let path = scratch(
        "rowsum.json",
        r#"{
  "variables": [{"name": "A", "states": ["1", "0"]}],
  "cpts": [{"child": "A", "parents": [], "rows": [{"given": [], "probs": [0.5, 0.6]}]}]
}"#,
    );
    let o = sensemaking(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("RowNotNormalized at cpts[0].rows[0]"), "{}", stderr(&o));
}

#[test]
fn impossible_evidence_is_a_runtime_error() {
    let o = sensemaking(&["infer", "figure2", "--evidence", "Traffic_Accident=0", "Debris=1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stderr(&o).to_lowercase().contains("impossible"), "{}", stderr(&o));
}

#[test]
fn unknown_variable_is_a_validation_error() {
    let o = sensemaking(&["infer", "appendix1", "--evidence", "Nope=1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_print_a_synopsis() {
    for args in [&[][..], &["infer"][..], &["frobnicate"][..]] {
        let o = sensemaking(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("Usage:"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn missing_file_is_reported() {
    let o = sensemaking(&["validate", "/nonexistent/scenario.json"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn help_exits_zero() {
    let o = sensemaking(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sensemake"));
}
