mod common;

use common::{catalog, fixture, idx, s4};
use fusionmod::chars::{
    check_orthogonality, inner_product, lift, multiplicity, product, restrict, verify_projective_rep, CycMatrix,
    ProjectiveViolation, TableKind,
};
use fusionmod::cyclo::Cyclotomic;
use fusionmod::zmodule::{are_equivalent, check_based, check_representation, is_irreducible};
use fusionmod::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn chi(table: &str, label: &str) -> Vec<Cyclotomic> {
    catalog().table(table).unwrap().character(label).unwrap().values.clone()
}

fn value(table: &str, values: &[Cyclotomic], class: &str) -> Cyclotomic {
    values[catalog().table(table).unwrap().class_index(class).unwrap()].clone()
}

fn int(n: i64) -> Cyclotomic {
    Cyclotomic::from_int(24, n)
}

#[test]
fn every_table_is_orthogonal_both_ways() {
    for t in catalog().tables.values() {
        assert!(t.is_complete(), "{}", t.id);
        assert!(check_orthogonality(t).is_ok(), "{}: {}", t.id, check_orthogonality(t));
    }
}

#[test]
fn inner_products() {
    let s4t = catalog().table("S4").unwrap();
    let rho2 = chi("S4", "rho2");
    assert_eq!(inner_product(s4t, &rho2, &rho2).unwrap(), BigRational::one());

    let s3 = catalog().table("S3").unwrap();
    let res = restrict(catalog().embedding("S3").unwrap(), &rho2).unwrap();
    assert_eq!(inner_product(s3, &res, &chi("S3", "V")).unwrap(), BigRational::one());
    assert_eq!(inner_product(s3, &res, &chi("S3", "1")).unwrap(), BigRational::one());

    let cover = catalog().table("2.A4").unwrap();
    assert!(inner_product(cover, &chi("2.A4", "gamma1"), &chi("2.A4", "gamma2")).unwrap().is_zero());
}

#[test]
fn inner_product_rejects_mixed_conductors() {
    let t = catalog().table("Z2").unwrap();
    let a = vec![Cyclotomic::one(24), Cyclotomic::one(24)];
    let b = vec![Cyclotomic::one(8), Cyclotomic::one(8)];
    assert!(matches!(inner_product(t, &a, &b), Err(Error::ConductorMismatch(..))));
}

#[test]
fn restriction_values() {
    let z4 = restrict(catalog().embedding("Z4").unwrap(), &chi("S4", "rho1")).unwrap();
    assert_eq!(value("Z4", &z4, "r"), int(0));
    assert_eq!(value("Z4", &z4, "r2"), int(2));
    for emb in catalog().embeddings.values() {
        let one = restrict(emb, &chi("S4", "1")).unwrap();
        assert!(one.iter().all(|v| *v == int(1)), "{}", emb.id);
    }
    let k4 = restrict(catalog().embedding("K4").unwrap(), &chi("S4", "psi")).unwrap();
    assert_eq!(value("K4", &k4, "a"), int(-1));
    assert_eq!(value("K4", &k4, "b"), int(-1));
}

#[test]
fn restriction_decomposes_with_nonnegative_multiplicities() {
    for emb in catalog().embeddings.values() {
        let h = catalog().table(&emb.subgroup).unwrap();
        for g in &catalog().table("S4").unwrap().characters {
            let res = restrict(emb, &g.values).unwrap();
            let total: u32 = h
                .characters
                .iter()
                .map(|phi| multiplicity(h, &res, &phi.values, "test").unwrap() * phi.values[0].as_integer().unwrap() as u32)
                .sum();
            assert_eq!(i64::from(total), g.values[0].as_integer().unwrap(), "{} to {}", g.label, emb.id);
        }
    }
}

#[test]
fn restriction_modules() {
    let c = catalog();
    assert!(are_equivalent(&c.restriction_module("S3").unwrap(), fixture("M_3_2")).unwrap());
    assert!(are_equivalent(&c.restriction_module("A4").unwrap(), fixture("M_4_1")).unwrap());
    let trivial = c.restriction_module("1").unwrap();
    assert_eq!(trivial.rank(), 1);
    assert!(are_equivalent(&trivial, fixture("M_1_1")).unwrap());
}

#[test]
fn projective_modules() {
    let c = catalog();
    assert!(are_equivalent(&c.projective_module("A4", "2.A4").unwrap(), fixture("M_3_1")).unwrap());
    assert!(are_equivalent(&c.projective_module("S4", "2.S4").unwrap(), fixture("M_3_3")).unwrap());
    let k4 = c.projective_module("K4", "2.K4").unwrap();
    assert_eq!(k4.rank(), 1);
    assert!(are_equivalent(&k4, fixture("M_1_1")).unwrap());
}

#[test]
fn every_constructed_module_is_based_and_irreducible() {
    let c = catalog();
    for job in &c.jobs {
        let m = c.run_job(job).unwrap();
        assert!(check_representation(&m).is_ok(), "{}", job.name);
        assert!(check_based(&m).is_ok(), "{}", job.name);
        assert!(is_irreducible(&m).unwrap(), "{}", job.name);
    }
}

#[test]
fn dimensions_are_bookkept() {
    let c = catalog();
    let fp = [1, 1, 2, 3, 3];
    for job in &c.jobs {
        let m = c.run_job(job).unwrap();
        let dims: Vec<i64> = match &job.kind {
            fusionmod::catalog::JobKind::Restriction { embedding } => {
                let h = c.table(&c.embedding(embedding).unwrap().subgroup).unwrap();
                (0..h.characters.len()).map(|k| h.degree(k)).collect()
            }
            fusionmod::catalog::JobKind::DoubleCover { cover, .. } => {
                let t = c.table(cover).unwrap();
                t.spin_indices().into_iter().map(|k| t.degree(k)).collect()
            }
            fusionmod::catalog::JobKind::Explicit { projective } => {
                c.projective[projective].reps.iter().map(|(_, m)| m[0].dim() as i64).collect()
            }
        };
        for (i, &d) in fp.iter().enumerate() {
            for k in 0..m.rank() {
                let lhs: i64 = (0..m.rank()).map(|l| m.matrix(i).get(l, k) * dims[l]).sum();
                assert_eq!(lhs, d * dims[k], "{} at {i},{k}", job.name);
            }
        }
    }
}

#[test]
fn lifted_rows_are_pullbacks() {
    let c = catalog();
    let cover = c.table("2.S4").unwrap();
    assert_eq!(cover.kind, TableKind::DoubleCover);
    let lifted = lift(cover, c.table("S4").unwrap(), &chi("S4", "rho2")).unwrap();
    assert_eq!(lifted, chi("2.S4", "rho2"));
}

#[test]
fn spin_products_stay_spin() {
    let c = catalog();
    let cover = c.table("2.A4").unwrap();
    let f = product(&chi("2.A4", "N3"), &chi("2.A4", "gamma1")).unwrap();
    for g in ["gamma1", "gamma2", "gamma3"] {
        assert_eq!(multiplicity(cover, &f, &chi("2.A4", g), "test").unwrap(), 1);
    }
    for n in ["N0", "N1", "N2", "N3"] {
        assert_eq!(multiplicity(cover, &f, &chi("2.A4", n), "test").unwrap(), 0);
    }
}

#[test]
fn listed_spin_tensor_rules_agree_with_the_tables() {
    assert_eq!(catalog().tensor_discrepancies().unwrap(), vec![]);
}

#[test]
fn d4_projective_matrices() {
    let d4 = &catalog().projective["D4-alpha"];
    assert_eq!(d4.order(), 8);
    for (label, report) in d4.verify() {
        assert!(report.is_ok(), "{label}: {report}");
    }
    let p = |s: &str| Cyclotomic::parse(s, 24).unwrap();
    let a1 = CycMatrix::from_rows(vec![vec![p("i"), p("0")], vec![p("0"), p("1")]]).unwrap();
    let r = d4.exponents.iter().position(|e| e == &vec![1, 0]).unwrap();
    assert_eq!(d4.reps[0].1[r], a1);
}

#[test]
fn trivial_cocycle_on_a_true_representation_is_valid() {
    let d4 = &catalog().projective["D4-alpha"];
    let h = catalog().table("D4").unwrap();
    let w4 = h.character_index("W4").unwrap();
    // 1-dimensional characters are genuine representations
    for k in 0..w4 {
        let mats: Vec<CycMatrix> = d4
            .element_class
            .iter()
            .map(|&c| CycMatrix::from_rows(vec![vec![h.characters[k].values[c].clone()]]).unwrap())
            .collect();
        let one = |_: usize, _: usize| Cyclotomic::one(24);
        assert!(verify_projective_rep(&d4.mult, &mats, &one).is_ok());
    }
}

#[test]
fn trivial_cocycle_breaks_pi1_exactly_where_alpha_is_not_one() {
    let d4 = &catalog().projective["D4-alpha"];
    let one = |_: usize, _: usize| Cyclotomic::one(24);
    let report = verify_projective_rep(&d4.mult, &d4.reps[0].1, &one);
    // alpha(r^i s^j, r^i' s^j') = i^(j i') differs from 1 iff j = 1 and i' is not 0 mod 4
    let mut expected = Vec::new();
    for (g, eg) in d4.exponents.iter().enumerate() {
        for (h, eh) in d4.exponents.iter().enumerate() {
            if eg[1] == 1 && eh[0] % 4 != 0 {
                expected.push(ProjectiveViolation::Product { g, h });
            }
        }
    }
    assert_eq!(expected.len(), 24);
    assert_eq!(report.violations, expected);
    let odd = d4
        .exponents
        .iter()
        .enumerate()
        .flat_map(|(g, eg)| d4.exponents.iter().enumerate().map(move |(h, eh)| (g, eg, h, eh)))
        .filter(|(_, eg, _, eh)| eg[1] == 1 && eh[0] % 2 == 1)
        .map(|(g, _, h, _)| ProjectiveViolation::Product { g, h });
    for v in odd {
        assert!(report.violations.contains(&v));
    }
}

#[test]
fn d4_twisted_module() {
    let m = catalog().d4_twisted_module().unwrap();
    assert_eq!(m.rank(), 2);
    assert_eq!(m.matrix(idx("psi")), &common::mat([[0, 1], [1, 0]]));
    assert_eq!(m.matrix(idx("rho1")), &common::mat([[1, 1], [1, 1]]));
    assert!(m.matrix(s4().unit()).is_identity());
    assert!(are_equivalent(&m, fixture("M_2_3")).unwrap());
}

#[test]
fn wrong_listed_rule_fails_the_cross_check() {
    let mut c = catalog().clone();
    let data = c.projective.get_mut("D4-alpha").unwrap();
    for rule in &mut data.tensor {
        if rule.0 == "W2" && rule.1 == "pi1" {
            rule.2 = [("pi1".to_string(), 1)].into();
        }
    }
    assert!(matches!(c.d4_twisted_module(), Err(Error::CrossCheck(_))));
}

#[test]
fn non_integral_multiplicity_is_an_error() {
    let t = catalog().table("Z2").unwrap();
    let f = vec![int(1), int(0)];
    let r = multiplicity(t, &f, &chi("Z2", "1"), "half");
    assert!(matches!(r, Err(Error::NonIntegralMultiplicity { .. })));
    assert_eq!(
        inner_product(t, &f, &chi("Z2", "1")).unwrap(),
        BigRational::new(BigInt::from(1), BigInt::from(2))
    );
}
