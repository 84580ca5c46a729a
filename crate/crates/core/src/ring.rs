//! Fusion rings: a finite basis with nonnegative integer structure constants,
//! a unit basis element, and a duality involution.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::validation::ValidationReport;
use crate::zmodule::BasedModule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRing {
    id: String,
    labels: Vec<String>,
    unit: usize,
    dual: Vec<usize>,
    // (i, j, k) -> c_{ij}^k, zero entries absent
    consts: BTreeMap<(usize, usize, usize), u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RingViolation {
    DualNotInvolution { index: usize },
    UnitNotIdentity { side: &'static str, j: usize, k: usize, found: u32 },
    Tau { i: usize, j: usize, found: u32 },
    DualityNotAntiInvolution { i: usize, j: usize, k: usize },
    Associativity { i: usize, j: usize, k: usize, l: usize, left: u64, right: u64 },
}

impl fmt::Display for RingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingViolation::DualNotInvolution { index } => {
                write!(f, "dual is not an involution at index {index}")
            }
            RingViolation::UnitNotIdentity { side, j, k, found } => {
                write!(f, "unit is not a {side} identity: c(unit,{j})^{k} = {found}")
            }
            RingViolation::Tau { i, j, found } => {
                write!(f, "tau condition fails: c({i},{j})^unit = {found}")
            }
            RingViolation::DualityNotAntiInvolution { i, j, k } => {
                write!(f, "c({i},{j})^{k} differs from c(dual {j}, dual {i})^(dual {k})")
            }
            RingViolation::Associativity { i, j, k, l, left, right } => write!(
                f,
                "associativity fails at ({i},{j},{k};{l}): (b_i b_j) b_k gives {left}, b_i (b_j b_k) gives {right}"
            ),
        }
    }
}

impl FusionRing {
    /// Assembles a ring from raw data. Only shapes are checked here; use
    /// [`validate_ring`] for the algebraic axioms.
    pub fn new(
        id: impl Into<String>,
        labels: Vec<String>,
        unit: usize,
        dual: Vec<usize>,
        consts: BTreeMap<(usize, usize, usize), u32>,
    ) -> Result<Self> {
        let rank = labels.len();
        if rank == 0 {
            return Err(Error::InvalidRing("rank must be positive".into()));
        }
        if unit >= rank {
            return Err(Error::IndexOutOfRange { index: unit, rank });
        }
        if dual.len() != rank {
            return Err(Error::InvalidRing(format!(
                "dual map has length {}, expected {rank}",
                dual.len()
            )));
        }
        if let Some(&d) = dual.iter().find(|&&d| d >= rank) {
            return Err(Error::IndexOutOfRange { index: d, rank });
        }
        for &(i, j, k) in consts.keys() {
            for idx in [i, j, k] {
                if idx >= rank {
                    return Err(Error::IndexOutOfRange { index: idx, rank });
                }
            }
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != rank {
            return Err(Error::InvalidRing("labels are not unique".into()));
        }
        let consts = consts.into_iter().filter(|&(_, v)| v != 0).collect();
        Ok(FusionRing {
            id: id.into(),
            labels,
            unit,
            dual,
            consts,
        })
    }

    /// The trivial ring of rank 1.
    pub fn trivial() -> Self {
        let mut consts = BTreeMap::new();
        consts.insert((0, 0, 0), 1);
        FusionRing::new("trivial", vec!["1".into()], 0, vec![0], consts).unwrap()
    }

    /// The group ring ℤ[ℤ_n] with basis g^0..g^{n-1}.
    pub fn cyclic_group_ring(n: usize) -> Self {
        let labels = (0..n).map(|k| format!("g{k}")).collect();
        let dual = (0..n).map(|k| (n - k) % n).collect();
        let mut consts = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                consts.insert((i, j, (i + j) % n), 1);
            }
        }
        FusionRing::new(format!("Z[Z{n}]"), labels, 0, dual, consts).unwrap()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn dual(&self, i: usize) -> usize {
        self.dual[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Structure constant c_{ij}^k.
    pub fn c(&self, i: usize, j: usize, k: usize) -> u32 {
        self.consts.get(&(i, j, k)).copied().unwrap_or(0)
    }

    /// Expansion of b_i b_j as (k, c_{ij}^k) pairs with nonzero coefficient.
    pub fn product(&self, i: usize, j: usize) -> Vec<(usize, u32)> {
        self.consts
            .range((i, j, 0)..=(i, j, usize::MAX))
            .map(|(&(_, _, k), &v)| (k, v))
            .collect()
    }

    pub fn structure_constants(&self) -> impl Iterator<Item = ((usize, usize, usize), u32)> + '_ {
        self.consts.iter().map(|(&k, &v)| (k, v))
    }

    /// True when b_i b_i = 1, i.e. b_i acts as an involution in every module.
    pub fn squares_to_unit(&self, i: usize) -> bool {
        self.product(i, i) == vec![(self.unit, 1)]
    }

    /// Whether swapping basis elements `a` and `b` preserves all ring data.
    pub fn is_automorphism_swap(&self, a: usize, b: usize) -> bool {
        let n = self.rank();
        if a >= n || b >= n {
            return false;
        }
        let s = |x: usize| {
            if x == a {
                b
            } else if x == b {
                a
            } else {
                x
            }
        };
        if s(self.unit) != self.unit {
            return false;
        }
        if (0..n).any(|x| s(self.dual[x]) != self.dual[s(x)]) {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c(i, j, k) != self.c(s(i), s(j), s(k)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Parses a ring definition in TOML or JSON (format chosen by `hint`, an
    /// extension such as `"toml"` or `"json"`; anything else tries both).
    pub fn from_str_with_format(text: &str, hint: &str) -> Result<Self> {
        let file: RingFile = match hint {
            "json" => serde_json::from_str(text).map_err(|e| Error::FileFormat {
                path: "<ring>".into(),
                reason: e.to_string(),
            })?,
            "toml" => toml::from_str(text).map_err(|e| Error::FileFormat {
                path: "<ring>".into(),
                reason: e.to_string(),
            })?,
            _ => match toml::from_str(text) {
                Ok(f) => f,
                Err(_) => serde_json::from_str(text).map_err(|e| Error::FileFormat {
                    path: "<ring>".into(),
                    reason: e.to_string(),
                })?,
            },
        };
        file.into_ring()
    }

    pub fn to_file(&self) -> RingFile {
        let dual = (0..self.rank())
            .filter(|&i| self.dual[i] != i)
            .map(|i| (self.labels[i].clone(), self.labels[self.dual[i]].clone()))
            .collect();
        let mut products = Vec::new();
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                if i == self.unit || j == self.unit {
                    continue;
                }
                let terms: BTreeMap<String, u32> = self
                    .product(i, j)
                    .into_iter()
                    .map(|(k, v)| (self.labels[k].clone(), v))
                    .collect();
                products.push((self.labels[i].clone(), self.labels[j].clone(), terms));
            }
        }
        RingFile {
            id: Some(self.id.clone()),
            labels: self.labels.clone(),
            unit: self.labels[self.unit].clone(),
            dual,
            products,
        }
    }
}

/// On-disk ring definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingFile {
    #[serde(default)]
    pub id: Option<String>,
    pub labels: Vec<String>,
    pub unit: String,
    #[serde(default)]
    pub dual: BTreeMap<String, String>,
    pub products: Vec<(String, String, BTreeMap<String, u32>)>,
}

impl RingFile {
    /// Resolves labels, fills in unit products, and symmetrizes pairs listed once.
    pub fn into_ring(self) -> Result<FusionRing> {
        let n = self.labels.len();
        let idx = |l: &str| {
            self.labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let unit = idx(&self.unit)?;
        let mut dual: Vec<usize> = (0..n).collect();
        for (a, b) in &self.dual {
            let (ia, ib) = (idx(a)?, idx(b)?);
            dual[ia] = ib;
            dual[ib] = ia;
        }
        let mut listed: BTreeMap<(usize, usize), BTreeMap<usize, u32>> = BTreeMap::new();
        for (a, b, terms) in &self.products {
            let key = (idx(a)?, idx(b)?);
            let mut t = BTreeMap::new();
            for (label, &v) in terms {
                if v != 0 {
                    t.insert(idx(label)?, v);
                }
            }
            if let Some(prev) = listed.get(&key) {
                if *prev != t {
                    return Err(Error::InvalidRing(format!(
                        "product {a}*{b} listed twice with different results"
                    )));
                }
            }
            listed.insert(key, t);
        }
        let explicit: Vec<(usize, usize)> = listed.keys().copied().collect();
        for (i, j) in explicit {
            if !listed.contains_key(&(j, i)) {
                let t = listed[&(i, j)].clone();
                listed.insert((j, i), t);
            }
        }
        for x in 0..n {
            listed.entry((unit, x)).or_insert_with(|| BTreeMap::from([(x, 1)]));
            listed.entry((x, unit)).or_insert_with(|| BTreeMap::from([(x, 1)]));
        }
        let mut consts = BTreeMap::new();
        for ((i, j), t) in listed {
            for (k, v) in t {
                consts.insert((i, j, k), v);
            }
        }
        let id = self.id.clone().unwrap_or_else(|| "ring".into());
        FusionRing::new(id, self.labels, unit, dual, consts)
    }
}

/// Checks every fusion-ring axiom exhaustively and lists each failure.
pub fn validate_ring(ring: &FusionRing) -> ValidationReport<RingViolation> {
    let n = ring.rank();
    let u = ring.unit;
    let mut report = ValidationReport::new();
    for i in 0..n {
        if ring.dual[ring.dual[i]] != i {
            report.push(RingViolation::DualNotInvolution { index: i });
        }
    }
    for j in 0..n {
        for k in 0..n {
            let want = u32::from(j == k);
            let left = ring.c(u, j, k);
            if left != want {
                report.push(RingViolation::UnitNotIdentity { side: "left", j, k, found: left });
            }
            let right = ring.c(j, u, k);
            if right != want {
                report.push(RingViolation::UnitNotIdentity { side: "right", j, k, found: right });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let want = u32::from(j == ring.dual[i]);
            let found = ring.c(i, j, u);
            if found != want {
                report.push(RingViolation::Tau { i, j, found });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if ring.c(i, j, k) != ring.c(ring.dual[j], ring.dual[i], ring.dual[k]) {
                    report.push(RingViolation::DualityNotAntiInvolution { i, j, k });
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let left: u64 = (0..n)
                        .map(|m| u64::from(ring.c(i, j, m)) * u64::from(ring.c(m, k, l)))
                        .sum();
                    let right: u64 = (0..n)
                        .map(|m| u64::from(ring.c(j, k, m)) * u64::from(ring.c(i, m, l)))
                        .sum();
                    if left != right {
                        report.push(RingViolation::Associativity { i, j, k, l, left, right });
                    }
                }
            }
        }
    }
    report
}

/// Left multiplication by b_i: column j holds the expansion of b_i b_j.
pub fn mult_matrix(ring: &FusionRing, i: usize) -> Result<IntMatrix> {
    let n = ring.rank();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, rank: n });
    }
    let mut m = IntMatrix::zeros(n);
    for j in 0..n {
        for (k, v) in ring.product(i, j) {
            m.set(k, j, i64::from(v));
        }
    }
    Ok(m)
}

/// Frobenius–Perron dimensions of the basis elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FpdimVector {
    pub dims: Vec<u64>,
}

impl FpdimVector {
    pub fn total(&self) -> u64 {
        self.dims.iter().sum()
    }
}

/// Perron root of each left-multiplication matrix, rounded and then certified
/// as a ring homomorphism in exact integer arithmetic.
///
/// Since N_{i*} = N_iᵀ, the FPdim vector is a positive eigenvector of N_iᵀ N_i,
/// so FPdim(b_i)² is the top eigenvalue of that symmetric matrix. Symmetric
/// eigensolvers converge reliably where a general Schur iteration on a
/// permutation matrix may not.
pub fn fpdim_character(ring: &FusionRing) -> Result<FpdimVector> {
    let n = ring.rank();
    let mut dims = Vec::with_capacity(n);
    for i in 0..n {
        let m = mult_matrix(ring, i)?.to_f64();
        let root = symmetric_top_eigenvalue(m.transpose() * &m).max(0.0).sqrt();
        let rounded = root.round();
        if rounded < 1.0 || (root - rounded).abs() > 1e-6 {
            return Err(Error::NotIntegral(format!(
                "Perron root of {} is {root:.9}",
                ring.label(i)
            )));
        }
        dims.push(rounded as u64);
    }
    let v = FpdimVector { dims };
    verify_fpdim(ring, &v)?;
    Ok(v)
}

fn verify_fpdim(ring: &FusionRing, v: &FpdimVector) -> Result<()> {
    let n = ring.rank();
    if v.dims[ring.unit] != 1 {
        return Err(Error::NotIntegral("unit does not map to 1".into()));
    }
    for i in 0..n {
        if v.dims[i] == 0 || v.dims[ring.dual(i)] != v.dims[i] {
            return Err(Error::NotIntegral(format!("bad value at {}", ring.label(i))));
        }
        for j in 0..n {
            let rhs: u64 = ring
                .product(i, j)
                .into_iter()
                .map(|(k, c)| u64::from(c) * v.dims[k])
                .sum();
            if v.dims[i] * v.dims[j] != rhs {
                return Err(Error::NotIntegral(format!(
                    "rounded dimensions are not multiplicative at ({}, {})",
                    ring.label(i),
                    ring.label(j)
                )));
            }
        }
    }
    Ok(())
}

/// Largest eigenvalue of a symmetric real matrix.
pub fn symmetric_top_eigenvalue(m: nalgebra::DMatrix<f64>) -> f64 {
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The ring acting on itself by left multiplication.
pub fn regular_module(ring: &Arc<FusionRing>) -> BasedModule {
    let matrices = (0..ring.rank())
        .map(|i| mult_matrix(ring, i).expect("index in range"))
        .collect();
    BasedModule::new(ring.clone(), matrices).expect("multiplication matrices have matching shapes")
}
