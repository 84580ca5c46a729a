use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fusionmod"));
    c.env_remove("FUSIONMOD_DATA");
    c
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn copy_dir(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let target = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn classify_builtin_matches_fixtures() {
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(bin()
        .args(["classify", "--builtin", "s4", "--max-rank", "5", "--expect-fixtures", "--trace", "--out"])
        .arg(out.path()));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("[1, 3, 3, 7, 2]"));
    let report = json(out.path().join("classification.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["counts"], serde_json::json!([1, 3, 3, 7, 2]));
    assert_eq!(report["fixture_check"]["missing"], serde_json::json!([]));
    // the 31 U-solutions over T = E, Q = 2E at rank 5 are in the trace
    let trace = report["trace"].as_array().unwrap();
    assert!(trace
        .iter()
        .any(|t| t["rank"] == 5 && t["stage"] == "U" && t["solutions"] == 31 && t["classes"] == 4));
    let md = std::fs::read_to_string(out.path().join("classification.md")).unwrap();
    for sec in report["ranks"].as_array().unwrap() {
        for m in sec["modules"].as_array().unwrap() {
            assert!(md.contains(&format!("### {}", m["label"].as_str().unwrap())));
        }
    }
    assert!(md.contains("## Solver trace"));
}

#[test]
fn rank_one_has_a_single_row() {
    let out = tempfile::tempdir().unwrap();
    let (code, _, _) = run(bin().args(["classify", "--builtin", "s4", "--max-rank", "1", "--out"]).arg(out.path()));
    assert_eq!(code, 0);
    let report = json(out.path().join("classification.json"));
    let modules = report["ranks"][0]["modules"].as_array().unwrap();
    assert_eq!(modules.len(), 1);
    assert_eq!(modules[0]["label"], "M_1_1");
    assert!(report.get("trace").is_none());
}

#[test]
fn ring_and_plan_files_are_labeled_from_the_catalog() {
    let out = tempfile::tempdir().unwrap();
    let d = data_dir();
    let (code, _, stderr) = run(bin()
        .arg("classify")
        .arg("--ring")
        .arg(d.join("rings/s4.toml"))
        .arg("--plan")
        .arg(d.join("plans/s4.toml"))
        .args(["--max-rank", "3", "--expect-fixtures", "--out"])
        .arg(out.path()));
    assert_eq!(code, 0, "{stderr}");
    let report = json(out.path().join("classification.json"));
    assert_eq!(report["counts"], serde_json::json!([1, 3, 3]));
    assert_eq!(report["ranks"][2]["modules"][0]["fixture"].as_str().unwrap().get(..4), Some("M_3_"));
}

#[test]
fn missing_plan_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(bin()
        .arg("classify")
        .arg("--ring")
        .arg(data_dir().join("rings/s4.toml"))
        .args(["--plan", "missing.toml", "--out"])
        .arg(out.path()));
    assert_eq!(code, 2);
    assert!(stderr.contains("file not found"), "{stderr}");
    assert!(stderr.contains("missing.toml"));
}

#[test]
fn conflicting_sources_are_rejected() {
    let (code, _, _) = run(bin().args(["classify", "--builtin", "s4", "--ring", "x.toml"]));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().args(["check", "--only", "nonsense"]));
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let (code, _, _) = run(bin()
            .args(["classify", "--builtin", "s4", "--max-rank", "4", "--trace", "--out"])
            .arg(dir.path()));
        assert_eq!(code, 0);
        let (code, _, _) = run(bin().args(["categorify", "--out"]).arg(dir.path()));
        assert_eq!(code, 0);
    }
    for f in ["classification.json", "classification.md", "categorification.json", "categorification.md"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn categorify_check_paper() {
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(bin()
        .args(["categorify", "--builtin", "s4", "--check-paper", "--out"])
        .arg(out.path()));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("matches all fixture lists"));
    let report = json(out.path().join("categorification.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["all_match"], true);
    let standard = |name: &str| -> Vec<String> {
        report["jobs"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|j| j["name"] == name && j["counted"] == true)
            .map(|j| j["outcomes"][0]["fixture"].as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(standard("Rep(A4, alpha)"), ["M_3_1"]);
    assert_eq!(standard("Rep(S4)"), ["M_5_1"]);
    assert_eq!(standard("Rep(K4, alpha)"), ["M_1_1"]);
    let md = std::fs::read_to_string(out.path().join("categorification.md")).unwrap();
    assert!(md.contains("| M_2_1 | none | none | yes |"), "{md}");
}

#[test]
fn check_passes_on_the_shipped_data() {
    let (code, stdout, _) = run(&mut bin().arg("check"));
    assert_eq!(code, 0, "{stdout}");
    for suite in ["catalog", "orthogonality", "cocycle", "based"] {
        assert!(stdout.contains(&format!("PASS {suite}")), "{stdout}");
    }
}

#[test]
fn only_cocycle_runs_one_suite() {
    let (code, stdout, _) = run(bin().args(["check", "--only", "cocycle"]));
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.contains("D4-alpha: 64 pairs"), "{stdout}");
}

#[test]
fn tampered_table_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&data_dir(), dir.path());
    let path = dir.path().join("tables/s3.toml");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace(r#"["2", "0", "-1"]"#, r#"["2", "0", "1"]"#)).unwrap();
    let (code, stdout, stderr) = run(bin().arg("check").env("FUSIONMOD_DATA", dir.path()));
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL"));
    assert!(stderr.to_lowercase().contains("orthogonal"), "{stderr}");
}

#[test]
fn missing_data_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(bin().arg("check").env("FUSIONMOD_DATA", dir.path().join("nope")));
    assert_eq!(code, 2, "{stderr}");
}
