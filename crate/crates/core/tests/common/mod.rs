#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use fusionmod::catalog::Catalog;
use fusionmod::{BasedModule, FusionRing, IntMatrix};

pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::builtin().expect("builtin catalog loads"))
}

pub fn s4() -> Arc<FusionRing> {
    catalog().ring.clone()
}

pub fn mat<const N: usize>(rows: [[i64; N]; N]) -> IntMatrix {
    IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Full module from the psi, rho1, rho2 matrices, with rho3 = psi * rho2.
pub fn module(t: IntMatrix, q: IntMatrix, u: IntMatrix) -> BasedModule {
    catalog().plan.assemble(&[t, q, u]).unwrap()
}

pub fn fixture(label: &str) -> &'static BasedModule {
    &catalog().fixture(label).unwrap_or_else(|| panic!("no fixture {label}")).module
}

pub fn idx(label: &str) -> usize {
    catalog().ring.index_of(label).unwrap()
}

/// Copies the shipped data directory into a fresh temporary directory.
pub fn data_copy() -> tempfile::TempDir {
    let src = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let dst = tempfile::tempdir().unwrap();
    copy_dir(&src, dst.path());
    dst
}

fn copy_dir(src: &std::path::Path, dst: &std::path::Path) {
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
