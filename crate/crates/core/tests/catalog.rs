mod common;

use common::{catalog, data_copy, fixture};
use fusionmod::catalog::{categorify, load_catalog, Catalog, DATA_ENV, MANIFEST};
use fusionmod::ring::regular_module;
use fusionmod::zmodule::{canonical_key, decompose};
use fusionmod::Error;

#[test]
fn builtin_catalog_has_every_fixture() {
    let c = catalog();
    assert_eq!(c.fixtures.len(), 16);
    assert!(c.tables.len() >= 10);
    for rank in 1..=5 {
        let n = c.fixtures.iter().filter(|f| f.module.rank() == rank).count();
        assert_eq!(n, [1, 3, 3, 7, 2][rank - 1], "rank {rank}");
    }
}

#[test]
fn directory_copy_loads_like_builtin() {
    let dir = data_copy();
    let c = Catalog::from_dir(dir.path()).unwrap();
    assert_eq!(c.fixtures.len(), catalog().fixtures.len());
    assert_eq!(c.jobs.len(), catalog().jobs.len());
}

#[test]
fn empty_directory_reports_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    match Catalog::from_dir(dir.path()) {
        Err(Error::MissingFile(path)) => assert!(path.ends_with(MANIFEST), "{path}"),
        other => panic!("expected MissingFile, got {other:?}"),
    }
}

#[test]
fn edited_fixture_is_rejected_by_name() {
    let dir = data_copy();
    let path = dir.path().join("fixtures/m_4_2.json");
    let text = std::fs::read_to_string(&path).unwrap();
    // rho1 diagonal 2 -> 3 breaks the representation property
    let edited = text.replacen("[2, 0, 0, 0]", "[3, 0, 0, 0]", 1);
    assert_ne!(text, edited);
    std::fs::write(&path, edited).unwrap();
    match Catalog::from_dir(dir.path()) {
        Err(Error::Validation { file, reason }) => {
            assert!(file.contains("m_4_2") || reason.contains("M_4_2"), "{file}: {reason}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn stale_canonical_key_is_rejected() {
    let dir = data_copy();
    let path = dir.path().join("fixtures/m_2_1.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let key = v["canonical_key"].as_array_mut().unwrap();
    key.reverse();
    std::fs::write(&path, v.to_string()).unwrap();
    assert!(matches!(Catalog::from_dir(dir.path()), Err(Error::Validation { .. })));
}

#[test]
fn tampered_table_fails_orthogonality() {
    let dir = data_copy();
    let path = dir.path().join("tables/s3.toml");
    let text = std::fs::read_to_string(&path).unwrap();
    let edited = text.replace(r#"values = ["2", "0", "-1"]"#, r#"values = ["2", "0", "1"]"#);
    assert_ne!(text, edited);
    std::fs::write(&path, edited).unwrap();
    match Catalog::from_dir(dir.path()) {
        Err(Error::Validation { file, reason }) => {
            assert!(file.contains("s3"), "{file}");
            assert!(reason.to_lowercase().contains("orthogonal"), "{reason}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn lookup_finds_known_modules() {
    let c = catalog();
    let regular = regular_module(&c.ring);
    assert_eq!(c.lookup_fixture(&canonical_key(&regular)).unwrap().label, "M_5_1");
    let d4 = c.restriction_module("D4").unwrap();
    assert_eq!(c.lookup_fixture(&canonical_key(&d4)).unwrap().label, "M_5_2");
    let sum = fixture("M_1_1").direct_sum(fixture("M_2_1")).unwrap();
    assert!(c.lookup_fixture(&canonical_key(&sum)).is_none());
    assert_eq!(decompose(&sum).unwrap().len(), 2);
}

#[test]
fn fixture_keys_are_distinct_and_round_trip() {
    let c = catalog();
    for (i, f) in c.fixtures.iter().enumerate() {
        assert_eq!(canonical_key(&f.module), f.key, "{}", f.label);
        assert_eq!(c.lookup_fixture(&f.key).unwrap().label, f.label);
        for g in &c.fixtures[i + 1..] {
            assert_ne!(f.key, g.key, "{} vs {}", f.label, g.label);
        }
    }
}

#[test]
fn categorification_lists_match_fixtures() {
    let report = categorify(catalog()).unwrap();
    assert!(report.all_pass());
    for cmp in &report.comparison {
        assert!(cmp.matches(), "{}: expected {:?}, got {:?}", cmp.label, cmp.expected, cmp.computed);
    }
    assert!(report.tensor_discrepancies.is_empty(), "{:?}", report.tensor_discrepancies);
}

#[test]
fn environment_override_selects_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(DATA_ENV, dir.path());
    let err = load_catalog().unwrap_err();
    std::env::remove_var(DATA_ENV);
    assert!(matches!(err, Error::MissingFile(_)), "{err:?}");
    assert_eq!(load_catalog().unwrap().fixtures.len(), 16);
}
