//! Based modules over a fusion ring: one nonnegative integer matrix per basis
//! element, with equivalence up to simultaneous permutation conjugation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::ring::FusionRing;
use crate::validation::ValidationReport;

#[derive(Clone)]
pub struct BasedModule {
    ring: Arc<FusionRing>,
    rank: usize,
    matrices: Vec<IntMatrix>,
}

impl fmt::Debug for BasedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("BasedModule");
        s.field("ring", &self.ring.id()).field("rank", &self.rank);
        for (label, m) in self.ring.labels().iter().zip(&self.matrices) {
            s.field(label, m);
        }
        s.finish()
    }
}

impl PartialEq for BasedModule {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.matrices == other.matrices
    }
}

impl Eq for BasedModule {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ModuleViolation {
    UnitNotIdentity,
    Product { i: String, j: String },
    NotTranspose { i: String, dual: String },
}

impl fmt::Display for ModuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleViolation::UnitNotIdentity => write!(f, "unit does not act as the identity"),
            ModuleViolation::Product { i, j } => {
                write!(f, "M({i}) M({j}) differs from the fusion rule expansion")
            }
            ModuleViolation::NotTranspose { i, dual } => {
                write!(f, "M({dual}) is not the transpose of M({i})")
            }
        }
    }
}

/// Lexicographically least row-major flattening of the matrix tuple over all
/// simultaneous permutation conjugations. Equal keys means equivalent modules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub rank: usize,
    pub flat: Vec<i64>,
}

impl BasedModule {
    /// `matrices` holds one n×n matrix per ring basis element, in basis order.
    pub fn new(ring: Arc<FusionRing>, matrices: Vec<IntMatrix>) -> Result<Self> {
        if matrices.len() != ring.rank() {
            return Err(Error::MalformedModule(format!(
                "expected {} matrices, got {}",
                ring.rank(),
                matrices.len()
            )));
        }
        let rank = matrices[0].dim();
        if rank == 0 {
            return Err(Error::MalformedModule("rank must be positive".into()));
        }
        if matrices.iter().any(|m| m.dim() != rank) {
            return Err(Error::MalformedModule("matrix sizes disagree".into()));
        }
        if matrices.iter().any(|m| !m.is_nonnegative()) {
            return Err(Error::MalformedModule("negative entry".into()));
        }
        Ok(BasedModule {
            ring,
            rank,
            matrices,
        })
    }

    /// Rebuilds the module whose flattening is `key.flat`.
    pub fn from_key(ring: Arc<FusionRing>, key: &CanonicalKey) -> Result<Self> {
        let n = key.rank;
        let block = n * n;
        if key.flat.len() != block * ring.rank() {
            return Err(Error::MalformedModule("key length does not match ring".into()));
        }
        let matrices = key
            .flat
            .chunks(block)
            .map(|c| IntMatrix::from_flat(n, c.to_vec()))
            .collect();
        BasedModule::new(ring, matrices)
    }

    pub fn ring(&self) -> &Arc<FusionRing> {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrices(&self) -> &[IntMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &IntMatrix {
        &self.matrices[i]
    }

    pub fn matrix_by_label(&self, label: &str) -> Result<&IntMatrix> {
        Ok(&self.matrices[self.ring.index_of(label)?])
    }

    /// Row-major concatenation of all matrices in basis order.
    pub fn flatten(&self) -> Vec<i64> {
        self.matrices
            .iter()
            .flat_map(|m| m.as_flat().iter().copied())
            .collect()
    }

    /// Sum of all action matrices.
    pub fn total_matrix(&self) -> IntMatrix {
        let mut acc = IntMatrix::zeros(self.rank);
        for m in &self.matrices {
            acc.add_scaled(1, m);
        }
        acc
    }

    /// Relabels the basis: new basis vector `i` is old basis vector `perm[i]`.
    pub fn conjugate(&self, perm: &[usize]) -> BasedModule {
        assert_eq!(perm.len(), self.rank, "permutation length must equal the rank");
        BasedModule {
            ring: self.ring.clone(),
            rank: self.rank,
            matrices: self.matrices.iter().map(|m| m.conjugate(perm)).collect(),
        }
    }

    /// Restriction to an index subset (in the given order).
    pub fn restrict_to(&self, idx: &[usize]) -> BasedModule {
        BasedModule {
            ring: self.ring.clone(),
            rank: idx.len(),
            matrices: self.matrices.iter().map(|m| m.submatrix(idx)).collect(),
        }
    }

    /// Block-diagonal direct sum, `self` first.
    pub fn direct_sum(&self, other: &BasedModule) -> Result<BasedModule> {
        ensure_same_ring(self, other)?;
        let n = self.rank + other.rank;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = IntMatrix::zeros(n);
                for i in 0..self.rank {
                    for j in 0..self.rank {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..other.rank {
                    for j in 0..other.rank {
                        m.set(self.rank + i, self.rank + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        BasedModule::new(self.ring.clone(), matrices)
    }

    pub fn to_file(&self) -> ModuleFile {
        ModuleFile {
            ring: self.ring.id().to_string(),
            rank: self.rank,
            matrices: self
                .ring
                .labels()
                .iter()
                .cloned()
                .zip(self.matrices.iter().cloned())
                .collect(),
        }
    }
}

fn ensure_same_ring(a: &BasedModule, b: &BasedModule) -> Result<()> {
    if *a.ring != *b.ring {
        return Err(Error::RingMismatch(a.ring.id().into(), b.ring.id().into()));
    }
    Ok(())
}

/// JSON serialization of a module: matrices keyed by basis label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleFile {
    pub ring: String,
    pub rank: usize,
    pub matrices: BTreeMap<String, IntMatrix>,
}

impl ModuleFile {
    /// Resolves labels against `ring`. The unit's matrix may be omitted; every
    /// other basis label must be present.
    pub fn into_module(mut self, ring: Arc<FusionRing>) -> Result<BasedModule> {
        if self.ring != ring.id() {
            return Err(Error::RingMismatch(self.ring, ring.id().into()));
        }
        for label in self.matrices.keys() {
            ring.index_of(label)?;
        }
        let unit_label = ring.label(ring.unit()).to_string();
        self.matrices
            .entry(unit_label)
            .or_insert_with(|| IntMatrix::identity(self.rank));
        let mut matrices = Vec::with_capacity(ring.rank());
        for label in ring.labels() {
            let m = self
                .matrices
                .remove(label)
                .ok_or_else(|| Error::MalformedModule(format!("missing matrix for `{label}`")))?;
            if m.dim() != self.rank {
                return Err(Error::MalformedModule(format!(
                    "matrix for `{label}` is {}x{0}, rank is {}",
                    m.dim(),
                    self.rank
                )));
            }
            matrices.push(m);
        }
        BasedModule::new(ring, matrices)
    }
}

/// Checks M_i M_j = Σ_k c_{ij}^k M_k for every pair, and that the unit acts trivially.
pub fn check_representation(m: &BasedModule) -> ValidationReport<ModuleViolation> {
    let ring = &m.ring;
    let mut report = ValidationReport::new();
    if !m.matrices[ring.unit()].is_identity() {
        report.push(ModuleViolation::UnitNotIdentity);
    }
    for i in 0..ring.rank() {
        for j in 0..ring.rank() {
            let lhs = m.matrices[i].mul(&m.matrices[j]);
            let mut rhs = IntMatrix::zeros(m.rank);
            for (k, c) in ring.product(i, j) {
                rhs.add_scaled(i64::from(c), &m.matrices[k]);
            }
            if lhs != rhs {
                report.push(ModuleViolation::Product {
                    i: ring.label(i).into(),
                    j: ring.label(j).into(),
                });
            }
        }
    }
    report
}

/// Checks M_{i*} = M_iᵀ for every basis element.
pub fn check_based(m: &BasedModule) -> ValidationReport<ModuleViolation> {
    let ring = &m.ring;
    let mut report = ValidationReport::new();
    for i in 0..ring.rank() {
        let d = ring.dual(i);
        if m.matrices[d] != m.matrices[i].transpose() {
            report.push(ModuleViolation::NotTranspose {
                i: ring.label(i).into(),
                dual: ring.label(d).into(),
            });
        }
    }
    report
}

fn require_based(m: &BasedModule) -> Result<()> {
    let report = check_based(m);
    if !report.is_ok() {
        return Err(Error::PreconditionViolated(format!(
            "module is not based: {report}"
        )));
    }
    Ok(())
}

/// Connected components of the support graph of Σ_i M_i, each sorted, ordered
/// by smallest member.
fn support_components(m: &BasedModule) -> Vec<Vec<usize>> {
    let total = m.total_matrix();
    let n = m.rank;
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if comp[w] == usize::MAX && (total.get(v, w) > 0 || total.get(w, v) > 0) {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// A based module is irreducible iff the support graph of Σ_i M_i is connected.
pub fn is_irreducible(m: &BasedModule) -> Result<bool> {
    require_based(m)?;
    Ok(support_components(m).len() == 1)
}

/// Splits a based module into its irreducible summands.
pub fn decompose(m: &BasedModule) -> Result<Vec<BasedModule>> {
    require_based(m)?;
    let comps = support_components(m);
    if comps.len() == 1 {
        return Ok(vec![m.clone()]);
    }
    Ok(comps.iter().map(|c| m.restrict_to(c)).collect())
}

/// Canonical key together with a permutation realizing it.
pub fn canonical_form(m: &BasedModule) -> (CanonicalKey, Vec<usize>) {
    let perm = canon::minimizing_permutation(&m.matrices, m.rank);
    let flat = m.conjugate(&perm).flatten();
    (CanonicalKey { rank: m.rank, flat }, perm)
}

pub fn canonical_key(m: &BasedModule) -> CanonicalKey {
    canonical_form(m).0
}

/// The module conjugated into its canonical basis order.
pub fn canonicalize(m: &BasedModule) -> BasedModule {
    let (_, perm) = canonical_form(m);
    m.conjugate(&perm)
}

pub fn are_equivalent(m1: &BasedModule, m2: &BasedModule) -> Result<bool> {
    ensure_same_ring(m1, m2)?;
    Ok(m1.rank == m2.rank && canonical_key(m1) == canonical_key(m2))
}

/// Exchanges the matrices of basis elements `i` and `j`, which must be related
/// by a ring automorphism.
pub fn swap_rho(m: &BasedModule, i: usize, j: usize) -> Result<BasedModule> {
    let ring = &m.ring;
    if !ring.is_automorphism_swap(i, j) {
        let name = |x: usize| ring.labels().get(x).cloned().unwrap_or_else(|| x.to_string());
        return Err(Error::NotAnAutomorphism(name(i), name(j)));
    }
    let mut matrices = m.matrices.clone();
    matrices.swap(i, j);
    BasedModule::new(ring.clone(), matrices)
}

mod canon {
    use std::cmp::Ordering;

    use crate::matrix::IntMatrix;

    /// Branch-and-bound search for the permutation minimizing the flattening.
    ///
    /// Scalar matrices are invariant under conjugation and skipped. The bound is
    /// seeded from permutations that respect an invariant partition of the
    /// indices, then every permutation is visited with prefix pruning on the
    /// first row of the leading non-scalar matrix.
    pub(super) fn minimizing_permutation(matrices: &[IntMatrix], n: usize) -> Vec<usize> {
        let active: Vec<&IntMatrix> = matrices.iter().filter(|m| !is_scalar(m)).collect();
        let identity: Vec<usize> = (0..n).collect();
        if active.is_empty() || n == 1 {
            return identity;
        }
        let mut search = Search {
            active: &active,
            n,
            best: None,
        };
        let order = refinement_order(&active, n);
        search.seed(&order);
        let mut perm = Vec::with_capacity(n);
        let mut used = vec![false; n];
        search.dfs(&order, &mut perm, &mut used);
        search.best.map(|(p, _)| p).unwrap_or(identity)
    }

    fn is_scalar(m: &IntMatrix) -> bool {
        let n = m.dim();
        let d = m.get(0, 0);
        (0..n).all(|i| (0..n).all(|j| m.get(i, j) == if i == j { d } else { 0 }))
    }

    type Signature = Vec<(i64, Vec<i64>)>;

    fn signature(active: &[&IntMatrix], v: usize) -> Signature {
        let n = active[0].dim();
        active
            .iter()
            .map(|m| {
                let mut row: Vec<i64> = (0..n).map(|j| m.get(v, j)).collect();
                row.sort_unstable();
                (m.get(v, v), row)
            })
            .collect()
    }

    /// Indices sorted by their invariant signature; equal signatures form cells.
    fn refinement_order(active: &[&IntMatrix], n: usize) -> Vec<(usize, usize)> {
        let mut sigs: Vec<(Signature, usize)> = (0..n).map(|v| (signature(active, v), v)).collect();
        sigs.sort();
        let mut out = Vec::with_capacity(n);
        let mut cell = 0;
        for k in 0..n {
            if k > 0 && sigs[k].0 != sigs[k - 1].0 {
                cell += 1;
            }
            out.push((sigs[k].1, cell));
        }
        out
    }

    struct Search<'a> {
        active: &'a [&'a IntMatrix],
        n: usize,
        best: Option<(Vec<usize>, Vec<i64>)>,
    }

    const SEED_LIMIT: usize = 5040;

    impl Search<'_> {
        fn flat(&self, perm: &[usize]) -> Vec<i64> {
            let mut out = Vec::with_capacity(self.active.len() * self.n * self.n);
            for m in self.active {
                for &i in perm {
                    for &j in perm {
                        out.push(m.get(i, j));
                    }
                }
            }
            out
        }

        fn offer(&mut self, perm: &[usize]) {
            match &self.best {
                Some((_, best)) if !self.less_than(perm, best) => {}
                _ => {
                    let flat = self.flat(perm);
                    self.best = Some((perm.to_vec(), flat));
                }
            }
        }

        /// Streams the flattening of `perm` against `best`, stopping at the first difference.
        fn less_than(&self, perm: &[usize], best: &[i64]) -> bool {
            let mut pos = 0;
            for m in self.active {
                for &i in perm {
                    for &j in perm {
                        match m.get(i, j).cmp(&best[pos]) {
                            Ordering::Less => return true,
                            Ordering::Greater => return false,
                            Ordering::Equal => {}
                        }
                        pos += 1;
                    }
                }
            }
            false
        }

        /// Permutations that keep the cells in signature order, up to a cap.
        fn seed(&mut self, order: &[(usize, usize)]) {
            let mut cells: Vec<Vec<usize>> = Vec::new();
            for &(v, c) in order {
                if c == cells.len() {
                    cells.push(Vec::new());
                }
                cells[c].push(v);
            }
            let mut budget = SEED_LIMIT;
            let mut current = Vec::with_capacity(self.n);
            self.seed_cells(&cells, 0, &mut current, &mut budget);
        }

        fn seed_cells(
            &mut self,
            cells: &[Vec<usize>],
            c: usize,
            current: &mut Vec<usize>,
            budget: &mut usize,
        ) {
            if *budget == 0 {
                return;
            }
            if c == cells.len() {
                *budget -= 1;
                let perm = current.clone();
                self.offer(&perm);
                return;
            }
            let mut cell = cells[c].clone();
            permute_all(&mut cell, 0, &mut |p| {
                if *budget == 0 {
                    return;
                }
                let len = current.len();
                current.extend_from_slice(p);
                self.seed_cells(cells, c + 1, current, budget);
                current.truncate(len);
            });
        }

        fn dfs(&mut self, order: &[(usize, usize)], perm: &mut Vec<usize>, used: &mut [bool]) {
            let k = perm.len();
            if k == self.n {
                let p = perm.clone();
                self.offer(&p);
                return;
            }
            for &(v, _) in order {
                if used[v] {
                    continue;
                }
                perm.push(v);
                if self.prefix_ok(perm) {
                    used[v] = true;
                    self.dfs(order, perm, used);
                    used[v] = false;
                }
                perm.pop();
            }
        }

        /// With positions 0..k fixed, the first k entries of row 0 of the
        /// leading active matrix are a prefix of the flattening.
        fn prefix_ok(&self, perm: &[usize]) -> bool {
            let Some((_, best)) = &self.best else {
                return true;
            };
            let m = self.active[0];
            let p0 = perm[0];
            for (c, &pc) in perm.iter().enumerate() {
                match m.get(p0, pc).cmp(&best[c]) {
                    Ordering::Less => return true,
                    Ordering::Greater => return false,
                    Ordering::Equal => {}
                }
            }
            true
        }
    }

    fn permute_all(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute_all(items, k + 1, f);
            items.swap(k, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::FusionRing;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn z2_ring() -> Arc<FusionRing> {
        Arc::new(FusionRing::cyclic_group_ring(2))
    }

    #[test]
    fn rank_one_identity_module_is_valid_and_irreducible() {
        let ring = Arc::new(FusionRing::trivial());
        let module = BasedModule::new(ring, vec![IntMatrix::identity(1)]).unwrap();
        assert!(check_representation(&module).is_ok());
        assert!(check_based(&module).is_ok());
        assert!(is_irreducible(&module).unwrap());
    }

    #[test]
    fn non_symmetric_action_is_reported_and_blocks_irreducibility() {
        // Over Z[Z3] the generator may act by a 3-cycle; its dual must act by the inverse.
        let ring = Arc::new(FusionRing::cyclic_group_ring(3));
        let c = m(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]);
        let good = BasedModule::new(ring.clone(), vec![IntMatrix::identity(3), c.clone(), c.transpose()])
            .unwrap();
        assert!(check_representation(&good).is_ok());
        assert!(check_based(&good).is_ok());
        // Swapping g and g^2 keeps a representation (the swap is an automorphism) ...
        let swapped = swap_rho(&good, 1, 2).unwrap();
        assert!(check_representation(&swapped).is_ok());
        // ... while acting by the same 3-cycle twice breaks both checks.
        let bad = BasedModule::new(ring, vec![IntMatrix::identity(3), c.clone(), c]).unwrap();
        assert!(!check_based(&bad).is_ok());
        assert!(matches!(is_irreducible(&bad), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn decompose_splits_block_sum() {
        let ring = z2_ring();
        let swap = BasedModule::new(ring.clone(), vec![IntMatrix::identity(2), m(&[&[0, 1], &[1, 0]])]).unwrap();
        let fixed = BasedModule::new(ring, vec![IntMatrix::identity(1), IntMatrix::identity(1)]).unwrap();
        let sum = fixed.direct_sum(&swap).unwrap().conjugate(&[1, 0, 2]);
        let parts = decompose(&sum).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].rank(), 2);
        assert!(are_equivalent(&parts[0], &swap).unwrap());
        assert!(are_equivalent(&parts[1], &fixed).unwrap());
    }

    #[test]
    fn swap_requires_automorphism() {
        let ring = Arc::new(FusionRing::cyclic_group_ring(3));
        let module = crate::ring::regular_module(&ring);
        assert!(matches!(swap_rho(&module, 0, 1), Err(Error::NotAnAutomorphism(..))));
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let a = crate::ring::regular_module(&z2_ring());
        let b = crate::ring::regular_module(&Arc::new(FusionRing::cyclic_group_ring(3)));
        assert!(matches!(are_equivalent(&a, &b), Err(Error::RingMismatch(..))));
    }

    #[test]
    fn file_round_trip_needs_every_label() {
        let ring = z2_ring();
        let module = crate::ring::regular_module(&ring);
        let json = serde_json::to_string(&module.to_file()).unwrap();
        let back: ModuleFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_module(ring.clone()).unwrap(), module);
        let mut partial = module.to_file();
        partial.matrices.remove("g1");
        assert!(partial.into_module(ring).is_err());
    }
}
