mod common;

use std::sync::Arc;

use common::{fixture, idx, mat, module, s4};
use fusionmod::zmodule::{
    are_equivalent, canonical_key, check_based, check_representation, decompose, is_irreducible, swap_rho,
    ModuleFile, ModuleViolation,
};
use fusionmod::{BasedModule, Error, FusionRing, IntMatrix};

fn t3() -> IntMatrix {
    IntMatrix::permutation(&[1, 0, 3, 2])
}

fn m45() -> BasedModule {
    module(
        t3(),
        mat([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]),
        mat([[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]),
    )
}

#[test]
fn printed_m45_is_a_representation() {
    assert!(check_representation(&m45()).is_ok());
    let trivial = BasedModule::new(Arc::new(FusionRing::trivial()), vec![IntMatrix::identity(1)]).unwrap();
    assert!(check_representation(&trivial).is_ok());
}

#[test]
fn bumped_entry_breaks_rho2_squared() {
    let m = m45();
    let mut mats = m.matrices().to_vec();
    mats[idx("rho2")].set(0, 1, 2);
    mats[idx("rho2")].set(1, 0, 2);
    let bad = BasedModule::new(s4(), mats).unwrap();
    let report = check_representation(&bad);
    assert!(report.violations.contains(&ModuleViolation::Product {
        i: "rho2".into(),
        j: "rho2".into()
    }));
}

#[test]
fn fixtures_and_regular_module_are_based() {
    for f in &common::catalog().fixtures {
        assert!(check_based(&f.module).is_ok(), "{}", f.label);
    }
    assert!(check_based(&fusionmod::ring::regular_module(&s4())).is_ok());
}

#[test]
fn non_symmetric_matrix_is_not_based() {
    // Over Z[Z3] the generator may act by a 3-cycle, which is a representation
    // whose transpose is the inverse, not the matrix itself.
    let ring = Arc::new(FusionRing::cyclic_group_ring(3));
    let c = IntMatrix::permutation(&[1, 2, 0]);
    let c2 = c.mul(&c);
    let m = BasedModule::new(ring.clone(), vec![IntMatrix::identity(3), c.clone(), c2.clone()]).unwrap();
    assert!(check_representation(&m).is_ok());
    assert!(check_based(&m).is_ok());
    let swapped = BasedModule::new(ring, vec![IntMatrix::identity(3), c.clone(), c]).unwrap();
    assert!(!check_based(&swapped).is_ok());
    assert!(matches!(is_irreducible(&swapped), Err(Error::PreconditionViolated(_))));
}

#[test]
fn reducibility_verdicts_for_rank_four_candidates() {
    let e = IntMatrix::identity(4);
    let q1 = mat([[0, 0, 1, 1], [0, 2, 0, 0], [1, 0, 0, 1], [1, 0, 1, 0]]);
    let u1 = mat([[0, 1, 0, 0], [1, 2, 1, 1], [0, 1, 0, 0], [0, 1, 0, 0]]);
    let u2 = mat([[1, 0, 1, 1], [0, 3, 0, 0], [1, 0, 1, 1], [1, 0, 1, 1]]);
    let irreducible = module(e.clone(), q1.clone(), u1);
    assert!(is_irreducible(&irreducible).unwrap());
    assert!(are_equivalent(&irreducible, fixture("M_4_1")).unwrap());
    assert!(!is_irreducible(&module(e, q1, u2)).unwrap());
    assert!(is_irreducible(fixture("M_1_1")).unwrap());
}

#[test]
fn decompose_splits_a_block_diagonal_rank_four_module() {
    let t2 = IntMatrix::permutation(&[1, 0, 2, 3]);
    let q3 = mat([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]);
    let u4 = mat([[1, 2, 0, 0], [2, 1, 0, 0], [0, 0, 3, 0], [0, 0, 0, 3]]);
    let m = module(t2, q3, u4);
    let parts = decompose(&m).unwrap();
    assert_eq!(parts.iter().map(BasedModule::rank).collect::<Vec<_>>(), vec![2, 1, 1]);
    for p in &parts {
        assert!(is_irreducible(p).unwrap());
    }
    let single = decompose(fixture("M_5_2")).unwrap();
    assert_eq!(single, vec![fixture("M_5_2").clone()]);
}

#[test]
fn decompose_recovers_summands() {
    let sum = fixture("M_2_2").direct_sum(fixture("M_3_1")).unwrap();
    let parts = decompose(&sum).unwrap();
    assert_eq!(parts.len(), 2);
    assert!(are_equivalent(&parts[0], fixture("M_2_2")).unwrap());
    assert!(are_equivalent(&parts[1], fixture("M_3_1")).unwrap());
    let mut rebuilt = parts[0].clone();
    for p in &parts[1..] {
        rebuilt = rebuilt.direct_sum(p).unwrap();
    }
    assert!(are_equivalent(&rebuilt, &sum).unwrap());
}

#[test]
fn m46_and_m48_share_a_key() {
    let q1 = mat([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]);
    let u2 = mat([[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 1, 0], [1, 1, 0, 1]]);
    let u4 = mat([[1, 0, 1, 1], [0, 1, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]);
    let m46 = module(t3(), q1.clone(), u2);
    let m48 = module(t3(), q1, u4);
    assert_eq!(canonical_key(&m46), canonical_key(&m48));
    // the printed isomorphism reverses the basis
    assert_eq!(m46.conjugate(&[3, 2, 1, 0]), m48);
}

#[test]
fn canonical_module_is_its_own_key() {
    let m = fusionmod::zmodule::canonicalize(fixture("M_4_3"));
    assert_eq!(canonical_key(&m).flat, m.flatten());
}

#[test]
fn conjugates_of_m52_share_its_key() {
    let m = fixture("M_5_2");
    let brute = itertools::Itertools::permutations(0..5, 5)
        .map(|p| m.conjugate(&p).flatten())
        .min()
        .unwrap();
    assert_eq!(canonical_key(m).flat, brute);
    for p in [[4, 3, 2, 1, 0], [1, 2, 3, 4, 0], [2, 0, 4, 1, 3]] {
        assert_eq!(canonical_key(&m.conjugate(&p)), canonical_key(m));
    }
}

#[test]
fn equivalence_examples() {
    let s3 = common::catalog().restriction_module("S3").unwrap();
    assert!(are_equivalent(&s3, fixture("M_3_2")).unwrap());
    assert!(!are_equivalent(fixture("M_2_2"), fixture("M_2_3")).unwrap());
    assert!(are_equivalent(fixture("M_4_6"), fixture("M_4_6")).unwrap());
    let other = BasedModule::new(Arc::new(FusionRing::trivial()), vec![IntMatrix::identity(1)]).unwrap();
    assert!(matches!(are_equivalent(fixture("M_1_1"), &other), Err(Error::RingMismatch(..))));
}

#[test]
fn swapping_rho2_and_rho3() {
    let (r2, r3) = (idx("rho2"), idx("rho3"));
    let swapped = swap_rho(fixture("M_3_2"), r2, r3).unwrap();
    assert!(are_equivalent(&swapped, fixture("M_3_3")).unwrap());
    let swapped = swap_rho(fixture("M_4_5"), r2, r3).unwrap();
    assert!(are_equivalent(&swapped, fixture("M_4_7")).unwrap());
    let m31 = fixture("M_3_1");
    assert_eq!(m31.matrix(r2), m31.matrix(r3));
    assert!(are_equivalent(&swap_rho(m31, r2, r3).unwrap(), m31).unwrap());
    assert!(matches!(swap_rho(m31, idx("psi"), r2), Err(Error::NotAnAutomorphism(..))));
}

#[test]
fn psi_always_acts_by_a_symmetric_involution() {
    for f in &common::catalog().fixtures {
        let t = f.module.matrix(idx("psi"));
        assert!(t.is_permutation() && t.is_symmetric(), "{}", f.label);
        assert!(t.mul(t).is_identity(), "{}", f.label);
    }
}

#[test]
fn module_json_round_trip() {
    for f in &common::catalog().fixtures {
        let text = serde_json::to_string(&f.module.to_file()).unwrap();
        let back = serde_json::from_str::<ModuleFile>(&text).unwrap().into_module(s4()).unwrap();
        assert_eq!(back, f.module);
        assert_eq!(canonical_key(&back), f.key);
    }
}
