use fusionmod_web::{analyze_json, categorify_json, classify_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn classify_reports_counts_and_labels() {
    let v = parse(&classify_json(4).unwrap());
    assert_eq!(v["counts"], serde_json::json!([1, 3, 3, 7]));
    let labels: Vec<&str> = v["modules"].as_array().unwrap().iter().map(|m| m["label"].as_str().unwrap()).collect();
    assert_eq!(labels.len(), 14);
    assert!(labels.contains(&"M_4_1"));
    assert!(classify_json(0).is_err());
    assert!(classify_json(9).is_err());
}

const M45: &str = r#"{"matrices": {
    "psi":  [[0,1,0,0],[1,0,0,0],[0,0,0,1],[0,0,1,0]],
    "rho1": [[1,1,0,0],[1,1,0,0],[0,0,1,1],[0,0,1,1]],
    "rho2": [[1,0,1,1],[0,1,1,1],[1,1,1,0],[1,1,0,1]]
}}"#;

#[test]
fn analyze_derives_rho3_and_finds_the_fixture() {
    let v = parse(&analyze_json(M45).unwrap());
    assert_eq!(v["representation"], serde_json::json!([]));
    assert_eq!(v["based"], serde_json::json!([]));
    assert_eq!(v["irreducible"], true);
    assert!(v["fixture"].as_str().unwrap().starts_with("M_4_"));
    assert_eq!(v["module"]["matrices"]["rho3"].as_array().unwrap().len(), 4);
}

#[test]
fn analyze_reports_violations() {
    let broken = M45.replace("[1,0,1,1],[0,1,1,1]", "[2,0,1,1],[0,1,1,1]");
    let v = parse(&analyze_json(&broken).unwrap());
    assert!(!v["representation"].as_array().unwrap().is_empty());
    assert_eq!(v["irreducible"], Value::Null);
    assert!(v["fixture"].is_null());
}

#[test]
fn analyze_splits_a_direct_sum() {
    let sum = r#"{"matrices": {
        "psi":  [[1,0],[0,1]], "rho1": [[2,0],[0,2]],
        "rho2": [[3,0],[0,3]], "rho3": [[3,0],[0,3]]
    }}"#;
    let v = parse(&analyze_json(sum).unwrap());
    assert_eq!(v["irreducible"], false);
    assert_eq!(v["components"], serde_json::json!([1, 1]));
}

#[test]
fn analyze_rejects_bad_input() {
    assert!(analyze_json("not json").is_err());
    assert!(analyze_json(r#"{"matrices": {"psi": [[1]]}}"#).unwrap_err().contains("missing"));
    assert!(analyze_json(r#"{"matrices": {"chi": [[1]]}}"#).is_err());
}

#[test]
fn categorify_rows() {
    let v = parse(&categorify_json().unwrap());
    assert_eq!(v["all_match"], true);
    let row = v["rows"].as_array().unwrap().iter().find(|r| r["name"] == "Rep(A4, alpha)").unwrap();
    assert_eq!(row["standard"], "M_3_1");
}
