//! Staged exhaustive search for based modules of a fixed rank.
//!
//! A plan names one unknown matrix per stage together with matrix identities
//! tying it to earlier stages. Each stage is compiled to one integer
//! polynomial per matrix entry, simplified by merging entries forced equal,
//! bounded through a diagonal quadratic identity, and then searched by
//! backtracking with interval pruning.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::ring::{fpdim_character, FusionRing};
use crate::zmodule::{self, BasedModule, CanonicalKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    /// The unknown is a symmetric permutation matrix.
    Permutation,
    /// The unknown is a symmetric nonnegative integer matrix.
    #[default]
    Symmetric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageFile {
    pub symbol: String,
    pub target: String,
    #[serde(default)]
    pub kind: StageKind,
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedFile {
    pub symbol: String,
    pub target: String,
    pub expr: String,
}

/// On-disk plan: stages in solve order plus derived symbols.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    #[serde(default)]
    pub ring: Option<String>,
    #[serde(rename = "stage")]
    pub stages: Vec<StageFile>,
    #[serde(default)]
    pub derived: Vec<DerivedFile>,
}

/// `coeff · S_{f0} · S_{f1} ⋯` where each factor is a stage index; the identity is omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Monomial {
    coeff: i64,
    factors: Vec<usize>,
}

/// Matrix polynomial in the stage symbols.
type MatPoly = Vec<Monomial>;

#[derive(Debug, Clone)]
pub struct Stage {
    pub symbol: String,
    pub target: usize,
    pub kind: StageKind,
    pub constraints: Vec<String>,
    /// Each constraint chain split into `lhs - rhs` polynomials.
    equations: Vec<MatPoly>,
}

#[derive(Debug, Clone)]
pub struct Derived {
    pub symbol: String,
    pub target: usize,
    pub expr: String,
    poly: MatPoly,
}

#[derive(Debug, Clone)]
pub struct SolvePlan {
    ring: Arc<FusionRing>,
    stages: Vec<Stage>,
    derived: Vec<Derived>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolverConfig {
    /// Largest rank the solver accepts.
    pub max_rank: usize,
    /// Conjugacy classes of stage solutions are only counted up to this rank (n! cost).
    pub class_count_max_rank: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_rank: 12,
            class_count_max_rank: 7,
        }
    }
}

// ---------------------------------------------------------------------------
// Expression grammar: sums of monomials `[k][*]A*B*...`, `E` is the identity,
// equations are chains `lhs = rhs = ...`.

struct RawTerm {
    coeff: i64,
    symbols: Vec<String>,
}

fn parse_term(body: &str, sign: i64, whole: &str) -> Result<RawTerm> {
    let err = |r: String| Error::InvalidPlan(format!("`{whole}`: {r}"));
    let mut coeff = sign;
    let mut symbols = Vec::new();
    for (k, factor) in body.split('*').map(str::trim).enumerate() {
        if factor.is_empty() {
            return Err(err("empty factor".into()));
        }
        if factor.bytes().all(|b| b.is_ascii_digit()) {
            if k != 0 {
                return Err(err("coefficients must lead a term".into()));
            }
            coeff *= factor
                .parse::<i64>()
                .map_err(|_| err("coefficient too large".into()))?;
        } else if factor.starts_with(|c: char| c.is_ascii_alphabetic())
            && factor.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            if factor != "E" {
                symbols.push(factor.to_string());
            }
        } else {
            return Err(err(format!("bad factor `{factor}`")));
        }
    }
    Ok(RawTerm { coeff, symbols })
}

fn parse_side(text: &str, whole: &str) -> Result<Vec<RawTerm>> {
    let mut terms = Vec::new();
    let mut sign = 1;
    let mut current = String::new();
    let mut dangling = false;
    for c in text.chars() {
        if c == '+' || c == '-' {
            if !current.trim().is_empty() {
                terms.push(parse_term(current.trim(), sign, whole)?);
                current.clear();
                sign = 1;
            }
            if c == '-' {
                sign = -sign;
            }
            dangling = true;
        } else {
            current.push(c);
            if !c.is_whitespace() {
                dangling = false;
            }
        }
    }
    if current.trim().is_empty() || dangling {
        return Err(Error::InvalidPlan(format!("`{whole}`: empty term")));
    }
    terms.push(parse_term(current.trim(), sign, whole)?);
    Ok(terms)
}

fn mul_poly(a: &MatPoly, b: &MatPoly) -> MatPoly {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let mut factors = x.factors.clone();
            factors.extend_from_slice(&y.factors);
            out.push(Monomial {
                coeff: x.coeff * y.coeff,
                factors,
            });
        }
    }
    out
}

fn normalize(p: MatPoly) -> MatPoly {
    let mut acc: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for m in p {
        *acc.entry(m.factors).or_insert(0) += m.coeff;
    }
    acc.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(factors, coeff)| Monomial { coeff, factors })
        .collect()
}

/// Resolves symbols: stage symbols become factor indices, derived symbols expand.
fn resolve(
    terms: Vec<RawTerm>,
    stage_ids: &BTreeMap<String, usize>,
    derived: &BTreeMap<String, MatPoly>,
    whole: &str,
) -> Result<MatPoly> {
    let mut out = Vec::new();
    for t in terms {
        let mut poly = vec![Monomial {
            coeff: t.coeff,
            factors: vec![],
        }];
        for s in &t.symbols {
            let factor = if let Some(&id) = stage_ids.get(s) {
                vec![Monomial {
                    coeff: 1,
                    factors: vec![id],
                }]
            } else if let Some(p) = derived.get(s) {
                p.clone()
            } else {
                return Err(Error::InvalidPlan(format!("`{whole}`: unknown symbol `{s}`")));
            };
            poly = mul_poly(&poly, &factor);
        }
        out.extend(poly);
    }
    Ok(normalize(out))
}

fn max_factor(p: &MatPoly) -> Option<usize> {
    p.iter().flat_map(|m| m.factors.iter().copied()).max()
}

impl SolvePlan {
    pub fn from_file(file: PlanFile, ring: Arc<FusionRing>) -> Result<Self> {
        if let Some(id) = &file.ring {
            if id != ring.id() {
                return Err(Error::RingMismatch(id.clone(), ring.id().into()));
            }
        }
        let mut seen_targets = BTreeSet::new();
        let mut stage_ids = BTreeMap::new();
        let check_symbol = |s: &str| -> Result<()> {
            if s == "E" || s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(Error::InvalidPlan(format!("bad symbol name `{s}`")));
            }
            Ok(())
        };
        let mut targets = Vec::new();
        for (k, st) in file.stages.iter().enumerate() {
            check_symbol(&st.symbol)?;
            if stage_ids.insert(st.symbol.clone(), k).is_some() {
                return Err(Error::InvalidPlan(format!("symbol `{}` defined twice", st.symbol)));
            }
            targets.push(ring.index_of(&st.target)?);
        }
        // Derived symbols may only use stage symbols and earlier derived symbols.
        let mut derived_polys = BTreeMap::new();
        let mut derived = Vec::new();
        for d in &file.derived {
            check_symbol(&d.symbol)?;
            if stage_ids.contains_key(&d.symbol) || derived_polys.contains_key(&d.symbol) {
                return Err(Error::InvalidPlan(format!("symbol `{}` defined twice", d.symbol)));
            }
            let poly = resolve(parse_side(&d.expr, &d.expr)?, &stage_ids, &derived_polys, &d.expr)?;
            derived_polys.insert(d.symbol.clone(), poly.clone());
            derived.push(Derived {
                symbol: d.symbol.clone(),
                target: ring.index_of(&d.target)?,
                expr: d.expr.clone(),
                poly,
            });
        }
        for &t in targets.iter().chain(derived.iter().map(|d| &d.target)) {
            if t == ring.unit() {
                return Err(Error::InvalidPlan("the unit cannot be solved for".into()));
            }
            if !seen_targets.insert(t) {
                return Err(Error::InvalidPlan(format!(
                    "basis element `{}` is covered twice",
                    ring.label(t)
                )));
            }
            if ring.dual(t) != t {
                return Err(Error::InvalidPlan(format!(
                    "basis element `{}` is not self-dual; only symmetric unknowns are supported",
                    ring.label(t)
                )));
            }
        }
        for i in 0..ring.rank() {
            if i != ring.unit() && !seen_targets.contains(&i) {
                return Err(Error::InvalidPlan(format!(
                    "basis element `{}` is neither solved nor derived",
                    ring.label(i)
                )));
            }
        }
        let mut stages = Vec::new();
        for (k, st) in file.stages.iter().enumerate() {
            let mut equations = Vec::new();
            for c in &st.constraints {
                let sides: Vec<&str> = c.split('=').collect();
                if sides.len() < 2 {
                    return Err(Error::InvalidPlan(format!("`{c}` is not an equation")));
                }
                let polys = sides
                    .iter()
                    .map(|s| resolve(parse_side(s, c)?, &stage_ids, &derived_polys, c))
                    .collect::<Result<Vec<_>>>()?;
                for pair in polys.windows(2) {
                    let mut diff = pair[0].clone();
                    diff.extend(pair[1].iter().map(|m| Monomial {
                        coeff: -m.coeff,
                        factors: m.factors.clone(),
                    }));
                    let diff = normalize(diff);
                    if let Some(f) = max_factor(&diff) {
                        if f > k {
                            return Err(Error::InvalidPlan(format!(
                                "`{c}` in stage `{}` uses the later symbol `{}`",
                                st.symbol, file.stages[f].symbol
                            )));
                        }
                    }
                    for m in &diff {
                        if m.factors.iter().filter(|&&f| f == k).count() > 2 {
                            return Err(Error::InvalidPlan(format!(
                                "`{c}` has degree above 2 in `{}`",
                                st.symbol
                            )));
                        }
                    }
                    equations.push(diff);
                }
            }
            stages.push(Stage {
                symbol: st.symbol.clone(),
                target: targets[k],
                kind: st.kind,
                constraints: st.constraints.clone(),
                equations,
            });
        }
        Ok(SolvePlan {
            ring,
            stages,
            derived,
        })
    }

    /// Parses TOML or JSON (chosen by `hint`, else both are tried).
    pub fn from_str_with_format(text: &str, hint: &str, ring: Arc<FusionRing>) -> Result<Self> {
        let fmt_err = |e: String| Error::FileFormat {
            path: "<plan>".into(),
            reason: e,
        };
        let file: PlanFile = match hint {
            "json" => serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?,
            "toml" => toml::from_str(text).map_err(|e| fmt_err(e.to_string()))?,
            _ => match toml::from_str(text) {
                Ok(f) => f,
                Err(_) => serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?,
            },
        };
        SolvePlan::from_file(file, ring)
    }

    pub fn ring(&self) -> &Arc<FusionRing> {
        &self.ring
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn derived(&self) -> &[Derived] {
        &self.derived
    }

    /// Evaluates every derived symbol from the stage matrices.
    pub fn derive(&self, solved: &[IntMatrix]) -> Result<Vec<IntMatrix>> {
        let n = solved.first().map_or(0, IntMatrix::dim);
        self.derived
            .iter()
            .map(|d| {
                let m = eval_poly(&d.poly, solved, n);
                if !m.is_nonnegative() {
                    return Err(Error::MalformedModule(format!(
                        "derived matrix `{}` has a negative entry",
                        d.symbol
                    )));
                }
                Ok(m)
            })
            .collect()
    }

    /// Assembles the full matrix tuple (ring basis order) from stage solutions.
    pub fn assemble(&self, solved: &[IntMatrix]) -> Result<BasedModule> {
        let n = solved[0].dim();
        let mut matrices = vec![None; self.ring.rank()];
        matrices[self.ring.unit()] = Some(IntMatrix::identity(n));
        for (st, m) in self.stages.iter().zip(solved) {
            matrices[st.target] = Some(m.clone());
        }
        for (d, m) in self.derived.iter().zip(self.derive(solved)?) {
            matrices[d.target] = Some(m);
        }
        let matrices = matrices
            .into_iter()
            .map(|m| m.expect("plan covers every basis element"))
            .collect();
        BasedModule::new(self.ring.clone(), matrices)
    }
}

fn eval_poly(p: &MatPoly, solved: &[IntMatrix], n: usize) -> IntMatrix {
    let mut acc = IntMatrix::zeros(n);
    for m in p {
        let mut prod = IntMatrix::identity(n);
        for &f in &m.factors {
            prod = prod.mul(&solved[f]);
        }
        acc.add_scaled(m.coeff, &prod);
    }
    acc
}

// ---------------------------------------------------------------------------
// Per-entry integer polynomials in the unknowns x_{ab}, a ≤ b.

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct EntryPoly {
    constant: i64,
    lin: BTreeMap<usize, i64>,
    quad: BTreeMap<(usize, usize), i64>,
}

impl EntryPoly {
    fn is_zero(&self) -> bool {
        self.constant == 0 && self.lin.is_empty() && self.quad.is_empty()
    }

    fn add_lin(&mut self, v: usize, c: i64) {
        if c != 0 {
            let e = self.lin.entry(v).or_insert(0);
            *e += c;
            if *e == 0 {
                self.lin.remove(&v);
            }
        }
    }

    fn add_quad(&mut self, u: usize, v: usize, c: i64) {
        if c != 0 {
            let key = (u.min(v), u.max(v));
            let e = self.quad.entry(key).or_insert(0);
            *e += c;
            if *e == 0 {
                self.quad.remove(&key);
            }
        }
    }

    fn vars(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.lin.keys().copied().collect();
        for &(u, v) in self.quad.keys() {
            s.insert(u);
            s.insert(v);
        }
        s
    }
}

fn var_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * n - a * (a + 1) / 2 + b
}

fn var_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn var_pos(n: usize, v: usize) -> (usize, usize) {
    let mut a = 0;
    let mut start = 0;
    while start + (n - a) <= v {
        start += n - a;
        a += 1;
    }
    (a, a + (v - start))
}

/// Splits a monomial around occurrences of the unknown: K0 · X · K1 · X · K2.
fn split_known(m: &Monomial, stage: usize, solved: &[IntMatrix], n: usize) -> Vec<IntMatrix> {
    let mut parts = vec![IntMatrix::identity(n)];
    for &f in &m.factors {
        if f == stage {
            parts.push(IntMatrix::identity(n));
        } else {
            let last = parts.last_mut().expect("nonempty");
            *last = last.mul(&solved[f]);
        }
    }
    parts
}

fn compile_stage(stage_idx: usize, eqs: &[MatPoly], solved: &[IntMatrix], n: usize) -> Vec<EntryPoly> {
    let mut out = BTreeSet::new();
    for eq in eqs {
        let mut entries = vec![EntryPoly::default(); n * n];
        for m in eq {
            let parts = split_known(m, stage_idx, solved, n);
            let c = m.coeff;
            match parts.len() {
                1 => {
                    for r in 0..n {
                        for col in 0..n {
                            entries[r * n + col].constant += c * parts[0].get(r, col);
                        }
                    }
                }
                2 => {
                    let (k0, k1) = (&parts[0], &parts[1]);
                    for r in 0..n {
                        for col in 0..n {
                            let e = &mut entries[r * n + col];
                            for a in 0..n {
                                let ka = k0.get(r, a);
                                if ka == 0 {
                                    continue;
                                }
                                for b in 0..n {
                                    let kb = k1.get(b, col);
                                    if kb != 0 {
                                        e.add_lin(var_index(n, a, b), c * ka * kb);
                                    }
                                }
                            }
                        }
                    }
                }
                3 => {
                    let (k0, k1, k2) = (&parts[0], &parts[1], &parts[2]);
                    for r in 0..n {
                        for col in 0..n {
                            let e = &mut entries[r * n + col];
                            for a in 0..n {
                                let ka = k0.get(r, a);
                                if ka == 0 {
                                    continue;
                                }
                                for b in 0..n {
                                    for d in 0..n {
                                        let kbd = k1.get(b, d);
                                        if kbd == 0 {
                                            continue;
                                        }
                                        for f in 0..n {
                                            let kf = k2.get(f, col);
                                            if kf != 0 {
                                                e.add_quad(
                                                    var_index(n, a, b),
                                                    var_index(n, d, f),
                                                    c * ka * kbd * kf,
                                                );
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                _ => unreachable!("degree checked when the plan was built"),
            }
        }
        out.extend(entries.into_iter().filter(|e| !e.is_zero()));
    }
    out.into_iter().collect()
}

/// Global entry bound from identities whose diagonal reads Σ_j q_j x_{lj}² = c_l + Σ a_v x_v.
///
/// If M is the largest entry and it sits in row l, then M² ≤ c_l + K_l·M with
/// K_l the sum of positive a_v, hence M ≤ (K_l + √(K_l² + 4c_l)) / 2.
fn diagonal_bound(polys: &[EntryPoly], n: usize) -> Option<i64> {
    let mut row_bound: Vec<Option<i64>> = vec![None; n];
    for p in polys {
        if p.quad.is_empty() {
            continue;
        }
        let sign = if p.quad.values().all(|&c| c > 0) {
            1
        } else if p.quad.values().all(|&c| c < 0) {
            -1
        } else {
            continue;
        };
        if p.quad.keys().any(|(u, v)| u != v) {
            continue;
        }
        let squared: BTreeSet<usize> = p.quad.keys().map(|(u, _)| *u).collect();
        // Σ q x² = c + Σ a x after moving everything but the squares across.
        let c = -sign * p.constant;
        let k: i64 = p.lin.values().map(|&a| (-sign * a).max(0)).sum();
        let m = bound_root(c, k);
        for (l, slot) in row_bound.iter_mut().enumerate() {
            if (0..n).all(|j| squared.contains(&var_index(n, l, j))) {
                *slot = Some(slot.map_or(m, |s: i64| s.min(m)));
            }
        }
    }
    row_bound.into_iter().try_fold(0, |acc, b| b.map(|b| acc.max(b)))
}

/// Largest integer M ≥ 0 with M² ≤ c + k·M.
fn bound_root(c: i64, k: i64) -> i64 {
    if c < 0 {
        // M² - kM ≤ c < 0 still allows 0 < M < k
        let mut m = 0;
        while (m + 1) * (m + 1) <= c + k * (m + 1) {
            m += 1;
        }
        return m;
    }
    let mut m = ((k as f64 + ((k * k + 4 * c) as f64).sqrt()) / 2.0).floor() as i64 + 1;
    while m > 0 && m * m > c + k * m {
        m -= 1;
    }
    m
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = v;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    /// Keeps the smaller index as the root so roots come first in row-major order.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

fn substitute(p: &EntryPoly, uf: &mut UnionFind, fixed: &[Option<i64>]) -> EntryPoly {
    let mut out = EntryPoly {
        constant: p.constant,
        ..Default::default()
    };
    let val = |v: usize, uf: &mut UnionFind| {
        let r = uf.find(v);
        (r, fixed[r])
    };
    for (&v, &c) in &p.lin {
        match val(v, uf) {
            (_, Some(x)) => out.constant += c * x,
            (r, None) => out.add_lin(r, c),
        }
    }
    for (&(u, v), &c) in &p.quad {
        match (val(u, uf), val(v, uf)) {
            ((_, Some(x)), (_, Some(y))) => out.constant += c * x * y,
            ((_, Some(x)), (r, None)) | ((r, None), (_, Some(x))) => out.add_lin(r, c * x),
            ((r, None), (s, None)) => out.add_quad(r, s, c),
        }
    }
    out
}

/// Propagates forced equalities and zeros; `None` means the system is infeasible.
fn simplify(
    mut polys: Vec<EntryPoly>,
    uf: &mut UnionFind,
    fixed: &mut [Option<i64>],
) -> Option<Vec<EntryPoly>> {
    loop {
        let mut next = BTreeSet::new();
        for p in &polys {
            let q = substitute(p, uf, fixed);
            if q.is_zero() {
                continue;
            }
            if q.lin.is_empty() && q.quad.is_empty() {
                return None;
            }
            next.insert(q);
        }
        polys = next.into_iter().collect();
        let mut changed = false;
        for p in &polys {
            let all_pos = p.lin.values().chain(p.quad.values()).all(|&c| c > 0);
            let all_neg = p.lin.values().chain(p.quad.values()).all(|&c| c < 0);
            let squares_only = p.quad.keys().all(|(u, v)| u == v);
            if (all_pos && p.constant > 0) || (all_neg && p.constant < 0) {
                return None;
            }
            if (all_pos || all_neg) && p.constant == 0 && squares_only {
                for v in p.vars() {
                    let r = uf.find(v);
                    fixed[r] = Some(0);
                }
                changed = true;
                break;
            }
            if !p.quad.is_empty() {
                continue;
            }
            if p.lin.len() == 1 {
                let (&v, &c) = p.lin.iter().next().expect("one term");
                if (-p.constant) % c != 0 || (-p.constant) / c < 0 {
                    return None;
                }
                let r = uf.find(v);
                fixed[r] = Some(-p.constant / c);
                changed = true;
                break;
            }
            if p.lin.len() == 2 && p.constant == 0 {
                let mut it = p.lin.iter();
                let (&u, &cu) = it.next().expect("two terms");
                let (&v, &cv) = it.next().expect("two terms");
                if cu == -cv {
                    uf.union(u, v);
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return Some(polys);
        }
    }
}

struct Compiled {
    constant: i64,
    lin: Vec<(usize, i64)>,
    quad: Vec<(usize, usize, i64)>,
}

struct Dfs<'a> {
    polys: &'a [Compiled],
    by_var: Vec<Vec<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    out: Vec<Vec<i64>>,
}

impl Dfs<'_> {
    fn feasible(&self, p: &Compiled) -> bool {
        let mut lo = p.constant;
        let mut hi = p.constant;
        for &(v, c) in &p.lin {
            let (a, b) = (c * self.lo[v], c * self.hi[v]);
            lo += a.min(b);
            hi += a.max(b);
        }
        for &(u, v, c) in &p.quad {
            let (a, b) = (c * self.lo[u] * self.lo[v], c * self.hi[u] * self.hi[v]);
            lo += a.min(b);
            hi += a.max(b);
        }
        lo <= 0 && 0 <= hi
    }

    fn run(&mut self, k: usize, bounds: &[i64]) {
        if k == bounds.len() {
            self.out.push(self.lo.clone());
            return;
        }
        for val in 0..=bounds[k] {
            self.lo[k] = val;
            self.hi[k] = val;
            if self.by_var[k].iter().all(|&i| self.feasible(&self.polys[i])) {
                self.run(k + 1, bounds);
            }
        }
        self.lo[k] = 0;
        self.hi[k] = bounds[k];
    }
}

/// All symmetric nonnegative integer solutions of the entry polynomials.
fn solve_symmetric(polys: Vec<EntryPoly>, n: usize, symbol: &str) -> Result<Vec<IntMatrix>> {
    let nv = var_count(n);
    let bound = diagonal_bound(&polys, n).ok_or_else(|| Error::UnboundedSearch(symbol.to_string()))?;
    let mut uf = UnionFind::new(nv);
    let mut fixed = vec![None; nv];
    let Some(polys) = simplify(polys, &mut uf, &mut fixed) else {
        return Ok(Vec::new());
    };
    if fixed.iter().flatten().any(|&x| x > bound) {
        return Ok(Vec::new());
    }
    let roots: Vec<usize> = (0..nv)
        .filter(|&v| uf.find(v) == v && fixed[v].is_none())
        .collect();
    let pos: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let compiled: Vec<Compiled> = polys
        .iter()
        .map(|p| Compiled {
            constant: p.constant,
            lin: p.lin.iter().map(|(v, c)| (pos[v], *c)).collect(),
            quad: p.quad.iter().map(|((u, v), c)| (pos[u], pos[v], *c)).collect(),
        })
        .collect();
    let mut by_var = vec![Vec::new(); roots.len()];
    for (i, p) in compiled.iter().enumerate() {
        let mut vs: BTreeSet<usize> = p.lin.iter().map(|t| t.0).collect();
        for &(u, v, _) in &p.quad {
            vs.insert(u);
            vs.insert(v);
        }
        for v in vs {
            by_var[v].push(i);
        }
    }
    let bounds = vec![bound; roots.len()];
    let mut dfs = Dfs {
        polys: &compiled,
        by_var,
        lo: vec![0; roots.len()],
        hi: bounds.clone(),
        out: Vec::new(),
    };
    dfs.run(0, &bounds);
    let mut sols: Vec<IntMatrix> = dfs
        .out
        .into_iter()
        .map(|vals| {
            let mut m = IntMatrix::zeros(n);
            for v in 0..nv {
                let r = uf.find(v);
                let x = fixed[r].unwrap_or_else(|| vals[pos[&r]]);
                let (a, b) = var_pos(n, v);
                m.set(a, b, x);
                m.set(b, a, x);
            }
            m
        })
        .collect();
    sols.sort();
    sols.dedup();
    Ok(sols)
}

/// One symmetric permutation matrix per conjugacy class of involutions in Sₙ:
/// (1 2)(3 4)⋯(2k−1 2k) for k = 0..⌊n/2⌋.
pub fn involution_representatives(n: usize) -> Result<Vec<IntMatrix>> {
    involution_representatives_capped(n, SolverConfig::default().max_rank)
}

pub fn involution_representatives_capped(n: usize, cap: usize) -> Result<Vec<IntMatrix>> {
    if n == 0 || n > cap {
        return Err(Error::RankTooLarge { rank: n, cap });
    }
    Ok((0..=n / 2)
        .map(|k| {
            let perm: Vec<usize> = (0..n)
                .map(|i| if i < 2 * k { i ^ 1 } else { i })
                .collect();
            IntMatrix::permutation(&perm)
        })
        .collect())
}

/// Every involution of {0..n-1} (identity included) as a permutation matrix.
fn all_involutions(n: usize) -> Vec<IntMatrix> {
    fn rec(perm: &mut Vec<usize>, out: &mut Vec<IntMatrix>) {
        let Some(i) = perm.iter().position(|&p| p == usize::MAX) else {
            out.push(IntMatrix::permutation(perm));
            return;
        };
        perm[i] = i;
        rec(perm, out);
        for j in i + 1..perm.len() {
            if perm[j] == usize::MAX {
                perm[i] = j;
                perm[j] = i;
                rec(perm, out);
                perm[j] = usize::MAX;
            }
        }
        perm[i] = usize::MAX;
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; n], &mut out);
    out.sort();
    out
}

/// All solutions of stage `stage` given matrices for the earlier stages.
pub fn solve_stage(plan: &SolvePlan, stage: usize, solved: &[IntMatrix], rank: usize) -> Result<Vec<IntMatrix>> {
    solve_stage_with(plan, stage, solved, rank, &SolverConfig::default())
}

pub fn solve_stage_with(
    plan: &SolvePlan,
    stage: usize,
    solved: &[IntMatrix],
    rank: usize,
    config: &SolverConfig,
) -> Result<Vec<IntMatrix>> {
    if rank == 0 || rank > config.max_rank {
        return Err(Error::RankTooLarge {
            rank,
            cap: config.max_rank,
        });
    }
    let st = plan
        .stages
        .get(stage)
        .ok_or_else(|| Error::InvalidPlan(format!("no stage {stage}")))?;
    if solved.len() != stage || solved.iter().any(|m| m.dim() != rank) {
        return Err(Error::PreconditionViolated(format!(
            "stage `{}` needs {stage} solved matrices of size {rank}",
            st.symbol
        )));
    }
    match st.kind {
        StageKind::Permutation => {
            let candidates = if stage == 0 && plan.ring.squares_to_unit(st.target) {
                involution_representatives_capped(rank, config.max_rank)?
            } else {
                all_involutions(rank)
            };
            let mut env = solved.to_vec();
            let mut out = Vec::new();
            for c in candidates {
                env.push(c);
                let ok = st
                    .equations
                    .iter()
                    .all(|eq| eval_poly(eq, &env, rank) == IntMatrix::zeros(rank));
                let c = env.pop().expect("pushed");
                if ok {
                    out.push(c);
                }
            }
            Ok(out)
        }
        StageKind::Symmetric => {
            let polys = compile_stage(stage, &st.equations, solved, rank);
            solve_symmetric(polys, rank, &st.symbol)
        }
    }
}

/// Solution count for one stage under fixed earlier inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub inputs: Vec<(String, IntMatrix)>,
    pub solutions: usize,
    /// Orbits of the solutions under permutations fixing every input.
    pub classes: Option<usize>,
    /// For the final stage: how many assembled modules are irreducible.
    pub irreducible: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationResult {
    pub rank: usize,
    #[serde(skip)]
    pub modules: Vec<BasedModule>,
    pub keys: Vec<CanonicalKey>,
    pub trace: Vec<StageRecord>,
    /// Full solutions assembled, before the irreducibility filter and dedup.
    pub assembled: usize,
}

impl ClassificationResult {
    /// The trace record for `stage` with exactly these input matrices.
    pub fn record(&self, stage: &str, inputs: &[&IntMatrix]) -> Option<&StageRecord> {
        self.trace.iter().find(|r| {
            r.stage == stage
                && r.inputs.len() == inputs.len()
                && r.inputs.iter().zip(inputs).all(|((_, a), b)| a == *b)
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

fn count_classes(inputs: &[IntMatrix], solutions: &[IntMatrix], n: usize) -> usize {
    let stabilizer: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .filter(|p| inputs.iter().all(|m| m.conjugate(p) == *m))
        .collect();
    let reps: BTreeSet<IntMatrix> = solutions
        .iter()
        .map(|s| {
            stabilizer
                .iter()
                .map(|p| s.conjugate(p))
                .min()
                .expect("identity is in the stabilizer")
        })
        .collect();
    reps.len()
}

struct Enumeration<'a> {
    plan: &'a SolvePlan,
    rank: usize,
    config: &'a SolverConfig,
    trace: Vec<StageRecord>,
    found: BTreeMap<CanonicalKey, BasedModule>,
    assembled: usize,
}

impl Enumeration<'_> {
    fn descend(&mut self, solved: &mut Vec<IntMatrix>) -> Result<()> {
        let stage = solved.len();
        let sols = solve_stage_with(self.plan, stage, solved, self.rank, self.config)?;
        let last = stage + 1 == self.plan.stages.len();
        let classes = (self.rank <= self.config.class_count_max_rank)
            .then(|| count_classes(solved, &sols, self.rank));
        let record_at = self.trace.len();
        self.trace.push(StageRecord {
            stage: self.plan.stages[stage].symbol.clone(),
            inputs: self.plan.stages[..stage]
                .iter()
                .map(|s| s.symbol.clone())
                .zip(solved.iter().cloned())
                .collect(),
            solutions: sols.len(),
            classes,
            irreducible: None,
        });
        let mut irreducible = 0;
        for s in sols {
            solved.push(s);
            if last {
                if self.accept(solved)? {
                    irreducible += 1;
                }
            } else {
                self.descend(solved)?;
            }
            solved.pop();
        }
        if last {
            self.trace[record_at].irreducible = Some(irreducible);
        }
        Ok(())
    }

    fn accept(&mut self, solved: &[IntMatrix]) -> Result<bool> {
        let module = self.plan.assemble(solved)?;
        self.assembled += 1;
        verify(&module)?;
        if !zmodule::is_irreducible(&module)? {
            return Ok(false);
        }
        let (key, perm) = zmodule::canonical_form(&module);
        self.found.entry(key).or_insert_with(|| module.conjugate(&perm));
        Ok(true)
    }
}

fn verify(module: &BasedModule) -> Result<()> {
    let rep = zmodule::check_representation(module);
    let based = zmodule::check_based(module);
    if !rep.is_ok() || !based.is_ok() {
        return Err(Error::SolverBug(format!(
            "{:?}\nrepresentation: {rep}\nbased: {based}",
            module
        )));
    }
    Ok(())
}

/// All inequivalent irreducible based modules of the given rank.
pub fn enumerate_based_modules(ring: &Arc<FusionRing>, rank: usize, plan: &SolvePlan) -> Result<ClassificationResult> {
    enumerate_with(ring, rank, plan, &SolverConfig::default())
}

pub fn enumerate_with(
    ring: &Arc<FusionRing>,
    rank: usize,
    plan: &SolvePlan,
    config: &SolverConfig,
) -> Result<ClassificationResult> {
    if **ring != *plan.ring {
        return Err(Error::RingMismatch(ring.id().into(), plan.ring.id().into()));
    }
    if rank == 0 || rank > config.max_rank {
        return Err(Error::RankTooLarge {
            rank,
            cap: config.max_rank,
        });
    }
    if rank == 1 {
        return Ok(rank_one(ring));
    }
    let mut run = Enumeration {
        plan,
        rank,
        config,
        trace: Vec::new(),
        found: BTreeMap::new(),
        assembled: 0,
    };
    run.descend(&mut Vec::new())?;
    let (keys, modules) = run.found.into_iter().unzip();
    Ok(ClassificationResult {
        rank,
        modules,
        keys,
        trace: run.trace,
        assembled: run.assembled,
    })
}

/// A rank-one based module is a ring homomorphism to ℤ with positive values,
/// which is unique: the FPdim character (if the ring is integral).
fn rank_one(ring: &Arc<FusionRing>) -> ClassificationResult {
    let mut result = ClassificationResult {
        rank: 1,
        modules: Vec::new(),
        keys: Vec::new(),
        trace: Vec::new(),
        assembled: 0,
    };
    if let Ok(dims) = fpdim_character(ring) {
        let matrices = dims
            .dims
            .iter()
            .map(|&d| IntMatrix::scalar(1, d as i64))
            .collect();
        let module = BasedModule::new(ring.clone(), matrices).expect("1x1 shapes");
        result.assembled = 1;
        result.keys.push(zmodule::canonical_key(&module));
        result.modules.push(module);
    }
    result
}

/// Runs the enumeration for every rank 1..=max_rank.
pub fn classify(ring: &Arc<FusionRing>, max_rank: usize, plan: &SolvePlan) -> Result<Vec<ClassificationResult>> {
    classify_with(ring, max_rank, plan, &SolverConfig::default())
}

pub fn classify_with(
    ring: &Arc<FusionRing>,
    max_rank: usize,
    plan: &SolvePlan,
    config: &SolverConfig,
) -> Result<Vec<ClassificationResult>> {
    if max_rank == 0 {
        return Err(Error::PreconditionViolated("max rank must be at least 1".into()));
    }
    (1..=max_rank)
        .map(|r| enumerate_with(ring, r, plan, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> Arc<FusionRing> {
        Arc::new(FusionRing::cyclic_group_ring(2))
    }

    fn z2_plan(kind: &str) -> SolvePlan {
        let text = format!(
            r#"
            [[stage]]
            symbol = "G"
            target = "g1"
            kind = "{kind}"
            constraints = ["G*G = E"]
            "#
        );
        SolvePlan::from_str_with_format(&text, "toml", z2()).unwrap()
    }

    #[test]
    fn involution_representatives_counts() {
        assert_eq!(involution_representatives(1).unwrap(), vec![IntMatrix::identity(1)]);
        let four = involution_representatives(4).unwrap();
        assert_eq!(four.len(), 3);
        assert_eq!(four[1], IntMatrix::permutation(&[1, 0, 2, 3]));
        assert_eq!(four[2], IntMatrix::permutation(&[1, 0, 3, 2]));
        assert_eq!(involution_representatives(5).unwrap().len(), 3);
        assert!(matches!(involution_representatives(13), Err(Error::RankTooLarge { .. })));
    }

    #[test]
    fn all_involutions_of_four() {
        // 1 + C(4,2) + 3
        assert_eq!(all_involutions(4).len(), 10);
    }

    #[test]
    fn group_ring_z2_has_two_modules_of_rank_one_and_one_of_rank_two() {
        let ring = z2();
        let plan = z2_plan("permutation");
        let res = classify(&ring, 2, &plan).unwrap();
        assert_eq!(res[0].modules.len(), 1);
        assert_eq!(res[1].modules.len(), 1);
        // Symmetric search finds the same rank-2 module.
        let sym = enumerate_based_modules(&ring, 2, &z2_plan("symmetric")).unwrap();
        assert_eq!(sym.keys, res[1].keys);
    }

    #[test]
    fn symmetric_search_finds_all_square_roots_of_identity() {
        let sols = solve_stage(&z2_plan("symmetric"), 0, &[], 3).unwrap();
        // symmetric nonnegative X with X² = E are exactly the 4 involutions of S3
        assert_eq!(sols.len(), 4);
        assert!(sols.iter().all(IntMatrix::is_permutation));
    }

    #[test]
    fn missing_diagonal_identity_is_unbounded() {
        let text = r#"
            [[stage]]
            symbol = "G"
            target = "g1"
            constraints = ["G = G"]
        "#;
        let plan = SolvePlan::from_str_with_format(text, "toml", z2()).unwrap();
        assert!(matches!(solve_stage(&plan, 0, &[], 2), Err(Error::UnboundedSearch(_))));
    }

    #[test]
    fn bad_plans_are_rejected() {
        let cubic = r#"
            [[stage]]
            symbol = "G"
            target = "g1"
            constraints = ["G*G*G = G"]
        "#;
        assert!(matches!(
            SolvePlan::from_str_with_format(cubic, "toml", z2()),
            Err(Error::InvalidPlan(_))
        ));
        let uncovered = r#"
            [[stage]]
            symbol = "G"
            target = "g1"
            constraints = ["G*G = E"]
            [[derived]]
            symbol = "H"
            target = "g1"
            expr = "G"
        "#;
        assert!(matches!(
            SolvePlan::from_str_with_format(uncovered, "toml", z2()),
            Err(Error::InvalidPlan(_))
        ));
        let unknown = r#"
            [[stage]]
            symbol = "G"
            target = "g1"
            constraints = ["G*Z = E"]
        "#;
        assert!(matches!(
            SolvePlan::from_str_with_format(unknown, "toml", z2()),
            Err(Error::InvalidPlan(_))
        ));
    }

    #[test]
    fn expression_parser_handles_coefficients_and_signs() {
        let ids = BTreeMap::from([("A".to_string(), 0usize)]);
        let p = resolve(parse_side("2*E - A + 3*A", "t").unwrap(), &ids, &BTreeMap::new(), "t").unwrap();
        assert_eq!(
            p,
            vec![
                Monomial { coeff: 2, factors: vec![] },
                Monomial { coeff: 2, factors: vec![0] },
            ]
        );
        assert!(parse_side("3A", "t").is_err());
        assert!(parse_side("A +", "t").is_err());
        assert!(parse_side("A**A", "t").is_err());
        assert!(parse_side("A*2", "t").is_err());
    }

    #[test]
    fn var_index_round_trip() {
        for n in 1..6 {
            for v in 0..var_count(n) {
                let (a, b) = var_pos(n, v);
                assert!(a <= b && b < n);
                assert_eq!(var_index(n, a, b), v);
            }
        }
    }

    #[test]
    fn bound_root_is_tight() {
        assert_eq!(bound_root(3, 2), 3);
        assert_eq!(bound_root(1, 0), 1);
        assert_eq!(bound_root(2, 1), 2);
        assert_eq!(bound_root(0, 0), 0);
    }
}
