//! Character tables, restriction along subgroup embeddings, and the based
//! modules they produce: r(H) from ordinary characters and r(H, alpha) from
//! spin characters of a double cover or from explicit projective matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::perm::{self, Perm};
use crate::ring::FusionRing;
use crate::validation::ValidationReport;
use crate::zmodule::BasedModule;

/// Values on the classes of one table, in class order.
pub type ClassFunction = Vec<Cyclotomic>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Ordinary,
    DoubleCover,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassFile {
    pub label: String,
    pub size: u64,
    #[serde(default)]
    pub rep: String,
    /// Class of the quotient group this class lies over (double covers only).
    #[serde(default)]
    pub image: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacterFile {
    pub label: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub spin: bool,
}

pub type TensorRule = (String, String, BTreeMap<String, u32>);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableFile {
    pub id: String,
    pub order: u64,
    pub conductor: u32,
    pub kind: TableKind,
    #[serde(default)]
    pub covers: Option<String>,
    pub classes: Vec<ClassFile>,
    pub characters: Vec<CharacterFile>,
    /// Listed decompositions `lifted ⊗ spin = Σ spin` to compare against.
    #[serde(default)]
    pub tensor: Vec<TensorRule>,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub label: String,
    pub size: u64,
    pub rep: String,
    pub image: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Character {
    pub label: String,
    pub values: ClassFunction,
    pub spin: bool,
}

#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub id: String,
    pub order: u64,
    pub conductor: u32,
    pub kind: TableKind,
    pub covers: Option<String>,
    pub classes: Vec<ClassInfo>,
    pub characters: Vec<Character>,
    pub tensor: Vec<TensorRule>,
}

fn table_err(table: &str, reason: impl Into<String>) -> Error {
    Error::InvalidTable {
        table: table.to_string(),
        reason: reason.into(),
    }
}

impl CharacterTable {
    /// Parses values and checks shapes. Orthogonality is a separate check.
    pub fn from_file(file: TableFile) -> Result<Self> {
        let id = file.id.clone();
        if file.classes.is_empty() {
            return Err(table_err(&id, "no classes"));
        }
        let mut seen = BTreeSet::new();
        for c in &file.classes {
            if c.size == 0 {
                return Err(table_err(&id, format!("class `{}` has size 0", c.label)));
            }
            if !seen.insert(c.label.as_str()) {
                return Err(table_err(&id, format!("duplicate class `{}`", c.label)));
            }
            match (file.kind, &c.image) {
                (TableKind::Ordinary, Some(_)) => {
                    return Err(table_err(&id, "class images are only meaningful for double covers"))
                }
                (TableKind::DoubleCover, None) => {
                    return Err(table_err(&id, format!("class `{}` has no image", c.label)))
                }
                _ => {}
            }
        }
        let total: u64 = file.classes.iter().map(|c| c.size).sum();
        if total != file.order {
            return Err(table_err(&id, format!("class sizes sum to {total}, order is {}", file.order)));
        }
        if file.classes[0].size != 1 {
            return Err(table_err(&id, "first class must be the identity"));
        }
        if file.kind == TableKind::DoubleCover && file.covers.is_none() {
            return Err(table_err(&id, "double cover without `covers`"));
        }
        let mut characters = Vec::new();
        let mut seen = BTreeSet::new();
        for ch in &file.characters {
            if !seen.insert(ch.label.as_str()) {
                return Err(table_err(&id, format!("duplicate character `{}`", ch.label)));
            }
            if ch.values.len() != file.classes.len() {
                return Err(table_err(
                    &id,
                    format!("character `{}` has {} values for {} classes", ch.label, ch.values.len(), file.classes.len()),
                ));
            }
            if ch.spin && file.kind != TableKind::DoubleCover {
                return Err(table_err(&id, format!("spin character `{}` in an ordinary table", ch.label)));
            }
            let values = ch
                .values
                .iter()
                .map(|v| Cyclotomic::parse(v, file.conductor))
                .collect::<Result<Vec<_>>>()?;
            match values[0].as_integer() {
                Some(d) if d > 0 => {}
                _ => return Err(table_err(&id, format!("character `{}` has no positive degree", ch.label))),
            }
            characters.push(Character {
                label: ch.label.clone(),
                values,
                spin: ch.spin,
            });
        }
        if characters.is_empty() {
            return Err(table_err(&id, "no characters"));
        }
        let table = CharacterTable {
            id: file.id,
            order: file.order,
            conductor: file.conductor,
            kind: file.kind,
            covers: file.covers,
            classes: file
                .classes
                .into_iter()
                .map(|c| ClassInfo {
                    label: c.label,
                    size: c.size,
                    rep: c.rep,
                    image: c.image,
                })
                .collect(),
            characters,
            tensor: file.tensor,
        };
        for (a, b, terms) in &table.tensor {
            table.character(a)?;
            if !table.character(b)?.spin {
                return Err(table_err(&table.id, format!("tensor rule factor `{b}` is not a spin character")));
            }
            for t in terms.keys() {
                table.character(t)?;
            }
        }
        Ok(table)
    }

    pub fn from_str_with_format(text: &str, hint: &str) -> Result<Self> {
        let file: TableFile = if hint.ends_with("json") {
            serde_json::from_str(text).map_err(|e| Error::FileFormat {
                path: hint.to_string(),
                reason: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| Error::FileFormat {
                path: hint.to_string(),
                reason: e.to_string(),
            })?
        };
        Self::from_file(file)
    }

    pub fn is_complete(&self) -> bool {
        self.characters.len() == self.classes.len()
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.label == label)
            .ok_or_else(|| Error::UnmappedClass(format!("{label} in {}", self.id)))
    }

    pub fn character_index(&self, label: &str) -> Result<usize> {
        self.characters
            .iter()
            .position(|c| c.label == label)
            .ok_or_else(|| Error::UnknownLabel(format!("{label} in {}", self.id)))
    }

    pub fn character(&self, label: &str) -> Result<&Character> {
        Ok(&self.characters[self.character_index(label)?])
    }

    pub fn degree(&self, k: usize) -> i64 {
        self.characters[k].values[0].as_integer().expect("degree checked at load")
    }

    pub fn spin_indices(&self) -> Vec<usize> {
        (0..self.characters.len()).filter(|&k| self.characters[k].spin).collect()
    }

    pub fn ordinary_indices(&self) -> Vec<usize> {
        (0..self.characters.len()).filter(|&k| !self.characters[k].spin).collect()
    }
}

/// Pointwise product of two class functions.
pub fn product(chi: &[Cyclotomic], phi: &[Cyclotomic]) -> Result<ClassFunction> {
    chi.iter().zip(phi).map(|(a, b)| a.checked_mul(b)).collect()
}

/// (1/order) Σ size(c) chi(c) conj(phi(c)).
pub fn inner_product(table: &CharacterTable, chi: &[Cyclotomic], phi: &[Cyclotomic]) -> Result<BigRational> {
    if chi.len() != table.classes.len() || phi.len() != table.classes.len() {
        return Err(Error::PreconditionViolated(format!(
            "class function length differs from the {} classes of {}",
            table.classes.len(),
            table.id
        )));
    }
    let mut acc = Cyclotomic::zero(table.conductor);
    for ((c, a), b) in table.classes.iter().zip(chi).zip(phi) {
        let size = BigRational::from_integer(BigInt::from(c.size));
        acc = acc.checked_add(&a.checked_mul(&b.conj())?.scale(&size))?;
    }
    let q = acc
        .as_rational()
        .ok_or_else(|| Error::NotRational(format!("inner product over {} is {acc}", table.id)))?;
    Ok(q / BigRational::from_integer(BigInt::from(table.order)))
}

/// Inner product that must be a nonnegative integer.
pub fn multiplicity(table: &CharacterTable, chi: &[Cyclotomic], phi: &[Cyclotomic], context: &str) -> Result<u32> {
    let q = inner_product(table, chi, phi)?;
    if !q.is_integer() || q.is_negative() {
        return Err(Error::NonIntegralMultiplicity {
            value: q.to_string(),
            context: context.to_string(),
        });
    }
    q.to_integer().to_u32().ok_or_else(|| Error::NonIntegralMultiplicity {
        value: q.to_string(),
        context: context.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OrthogonalityViolation {
    Row { a: String, b: String, value: String },
    Column { c: String, d: String, value: String },
}

impl fmt::Display for OrthogonalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrthogonalityViolation::Row { a, b, value } => write!(f, "<{a}, {b}> = {value}"),
            OrthogonalityViolation::Column { c, d, value } => {
                write!(f, "column sum over classes {c}, {d} is {value}")
            }
        }
    }
}

/// Row orthonormality always; column orthogonality when the table is complete.
pub fn check_orthogonality(table: &CharacterTable) -> ValidationReport<OrthogonalityViolation> {
    let mut report = ValidationReport::new();
    let n = table.characters.len();
    for a in 0..n {
        for b in a..n {
            let expected = if a == b { BigRational::one() } else { BigRational::zero() };
            let got = inner_product(table, &table.characters[a].values, &table.characters[b].values);
            let value = match got {
                Ok(q) if q == expected => continue,
                Ok(q) => q.to_string(),
                Err(e) => e.to_string(),
            };
            report.push(OrthogonalityViolation::Row {
                a: table.characters[a].label.clone(),
                b: table.characters[b].label.clone(),
                value,
            });
        }
    }
    if !table.is_complete() {
        return report;
    }
    let m = table.classes.len();
    for c in 0..m {
        for d in c..m {
            let mut acc = Cyclotomic::zero(table.conductor);
            for ch in &table.characters {
                acc = &acc + &(&ch.values[c] * &ch.values[d].conj());
            }
            let expected = if c == d {
                Cyclotomic::from_rational(
                    table.conductor,
                    BigRational::new(BigInt::from(table.order), BigInt::from(table.classes[c].size)),
                )
            } else {
                Cyclotomic::zero(table.conductor)
            };
            if acc != expected {
                report.push(OrthogonalityViolation::Column {
                    c: table.classes[c].label.clone(),
                    d: table.classes[d].label.clone(),
                    value: acc.to_string(),
                });
            }
        }
    }
    report
}

/// Checks that a double cover sits over `base`: every class image exists,
/// the lifted rows are the base rows pulled back, and spin rows are odd on
/// the nontrivial central element.
pub fn check_cover(cover: &CharacterTable, base: &CharacterTable) -> Result<()> {
    if cover.kind != TableKind::DoubleCover || cover.covers.as_deref() != Some(base.id.as_str()) {
        return Err(table_err(&cover.id, format!("not a double cover of {}", base.id)));
    }
    if cover.order != 2 * base.order {
        return Err(table_err(&cover.id, "order is not twice the base order"));
    }
    let central: Vec<usize> = (0..cover.classes.len())
        .filter(|&c| cover.classes[c].image.as_deref() == Some(base.classes[0].label.as_str()))
        .collect();
    if central.len() != 2 || central.iter().any(|&c| cover.classes[c].size != 1) {
        return Err(table_err(&cover.id, "expected exactly two singleton classes over the identity"));
    }
    let z = central[1];
    for ch in &cover.characters {
        if ch.spin {
            if ch.values[z] != -&ch.values[0] {
                return Err(table_err(&cover.id, format!("spin character `{}` is not odd on the center", ch.label)));
            }
            continue;
        }
        let lifted = lift(cover, base, &base.character(&ch.label)?.values)?;
        if lifted != ch.values {
            return Err(table_err(
                &cover.id,
                format!("row `{}` is not the lift of the {} character", ch.label, base.id),
            ));
        }
    }
    if base.characters.len() != cover.ordinary_indices().len() {
        return Err(table_err(&cover.id, format!("not every {} character is lifted", base.id)));
    }
    Ok(())
}

/// Pulls a class function on the base group back through the covering map.
pub fn lift(cover: &CharacterTable, base: &CharacterTable, chi: &[Cyclotomic]) -> Result<ClassFunction> {
    cover
        .classes
        .iter()
        .map(|c| {
            let image = c.image.as_deref().ok_or_else(|| Error::UnmappedClass(c.label.clone()))?;
            Ok(chi[base.class_index(image)?].clone())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingClassFile {
    pub class: String,
    pub word: String,
    pub image: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub id: String,
    pub subgroup: String,
    pub supergroup: String,
    pub degree: usize,
    pub generators: BTreeMap<String, String>,
    #[serde(default)]
    pub relations: Vec<String>,
    pub classes: Vec<EmbeddingClassFile>,
}

/// A subgroup realized by permutations, with its classes mapped into the supergroup.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub id: String,
    pub subgroup: String,
    pub supergroup: String,
    pub degree: usize,
    pub generators: BTreeMap<String, Perm>,
    /// Supergroup class index for each subgroup class.
    pub class_map: Vec<usize>,
    /// All subgroup elements and the subgroup class of each.
    pub elements: Vec<Perm>,
    pub element_class: Vec<usize>,
}

impl Embedding {
    /// Evaluates the generators, checks relations, the subgroup order, every
    /// class size, and that each class lands on a supergroup class of the same
    /// cycle type. The supergroup must be a symmetric group whose class
    /// representatives are written in cycle notation.
    pub fn from_file(file: EmbeddingFile, sub: &CharacterTable, sup: &CharacterTable) -> Result<Self> {
        let err = |reason: String| Error::InvalidEmbedding {
            embedding: file.id.clone(),
            reason,
        };
        if file.subgroup != sub.id || file.supergroup != sup.id {
            return Err(err(format!("tables {} < {} do not match the file", sub.id, sup.id)));
        }
        if sub.kind != TableKind::Ordinary || sup.kind != TableKind::Ordinary {
            return Err(err("both tables must be ordinary".into()));
        }
        let n = file.degree;
        let mut generators = BTreeMap::new();
        for (name, cycles) in &file.generators {
            if name.chars().count() != 1 || name == "e" {
                return Err(err(format!("generator name `{name}` must be one letter other than e")));
            }
            generators.insert(name.clone(), Perm::parse(cycles, n)?);
        }
        for rel in &file.relations {
            if !perm::eval_word(rel, &generators, n)?.is_identity() {
                return Err(err(format!("relation {rel} does not hold")));
            }
        }
        let gens: Vec<Perm> = generators.values().cloned().collect();
        let elements = perm::closure(&gens, n);
        if elements.len() as u64 != sub.order {
            return Err(err(format!("generators give a group of order {}, expected {}", elements.len(), sub.order)));
        }
        let index: BTreeMap<&Perm, usize> = elements.iter().enumerate().map(|(k, p)| (p, k)).collect();
        let mut element_class = vec![usize::MAX; elements.len()];
        let mut class_map = vec![usize::MAX; sub.classes.len()];
        for entry in &file.classes {
            let c = sub.class_index(&entry.class)?;
            if class_map[c] != usize::MAX {
                return Err(err(format!("class {} mapped twice", entry.class)));
            }
            let image = sup.class_index(&entry.image)?;
            let rep = perm::eval_word(&entry.word, &generators, n)?;
            let sup_rep = Perm::parse(&sup.classes[image].rep, n)?;
            if rep.cycle_type() != sup_rep.cycle_type() {
                return Err(err(format!(
                    "class {} (word {} = {rep}) does not lie in class {}",
                    entry.class, entry.word, entry.image
                )));
            }
            let conj: BTreeSet<Perm> = elements
                .iter()
                .map(|h| h.compose(&rep).compose(&h.inverse()))
                .collect();
            if conj.len() as u64 != sub.classes[c].size {
                return Err(err(format!(
                    "class {} has {} elements, table says {}",
                    entry.class,
                    conj.len(),
                    sub.classes[c].size
                )));
            }
            for g in &conj {
                let k = index[g];
                if element_class[k] != usize::MAX {
                    return Err(err(format!("classes overlap at {g}")));
                }
                element_class[k] = c;
            }
            class_map[c] = image;
        }
        if let Some(c) = class_map.iter().position(|&x| x == usize::MAX) {
            return Err(Error::UnmappedClass(format!("{} in embedding {}", sub.classes[c].label, file.id)));
        }
        Ok(Embedding {
            id: file.id,
            subgroup: file.subgroup,
            supergroup: file.supergroup,
            degree: n,
            generators,
            class_map,
            elements,
            element_class,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element_index(&self, g: &Perm) -> Option<usize> {
        self.elements.iter().position(|h| h == g)
    }
}

/// Restriction of a supergroup class function: value at c is chi(class_map(c)).
pub fn restrict(emb: &Embedding, chi: &[Cyclotomic]) -> Result<ClassFunction> {
    emb.class_map
        .iter()
        .map(|&c| {
            chi.get(c)
                .cloned()
                .ok_or_else(|| Error::UnmappedClass(format!("supergroup class {c} of {}", emb.supergroup)))
        })
        .collect()
}

fn ring_characters<'a>(ring: &FusionRing, g: &'a CharacterTable) -> Result<Vec<&'a ClassFunction>> {
    ring.labels()
        .iter()
        .map(|l| Ok(&g.character(l)?.values))
        .collect()
}

/// Decomposes `f` over the characters `basis` of `table`, asserting that the
/// listed characters reproduce `f` exactly.
fn decompose_exact(table: &CharacterTable, f: &[Cyclotomic], basis: &[usize], context: &str) -> Result<Vec<u32>> {
    let mut mults = Vec::with_capacity(basis.len());
    let mut rebuilt = vec![Cyclotomic::zero(table.conductor); f.len()];
    for &l in basis {
        let m = multiplicity(table, f, &table.characters[l].values, context)?;
        let scale = BigRational::from_integer(BigInt::from(m));
        for (r, v) in rebuilt.iter_mut().zip(&table.characters[l].values) {
            *r = &*r + &v.scale(&scale);
        }
        mults.push(m);
    }
    if rebuilt != f {
        return Err(Error::SpinClosureViolation(format!("{context} is not spanned by the chosen characters")));
    }
    Ok(mults)
}

/// The module r(H) over r(G): entry (M_i)_{lk} = <Res(chi_i) phi_k, phi_l>_H.
pub fn restriction_module(
    ring: &Arc<FusionRing>,
    g: &CharacterTable,
    h: &CharacterTable,
    emb: &Embedding,
) -> Result<BasedModule> {
    if h.kind != TableKind::Ordinary || !h.is_complete() {
        return Err(Error::PreconditionViolated(format!("{} must be a complete ordinary table", h.id)));
    }
    let basis: Vec<usize> = (0..h.characters.len()).collect();
    let chis = ring_characters(ring, g)?;
    let n = basis.len();
    let mut matrices = Vec::new();
    for (i, chi) in chis.iter().enumerate() {
        let res = restrict(emb, chi)?;
        let mut m = IntMatrix::zeros(n);
        for k in 0..n {
            let f = product(&res, &h.characters[k].values)?;
            let ctx = format!("Res {} * {} over {}", ring.label(i), h.characters[k].label, h.id);
            for (l, mult) in decompose_exact(h, &f, &basis, &ctx)?.into_iter().enumerate() {
                m.set(l, k, mult as i64);
            }
        }
        matrices.push(m);
    }
    BasedModule::new(ring.clone(), matrices)
}

/// The module r(H, alpha) over r(G) with basis the spin characters of the
/// double cover: entry = <lift(Res chi_i) xi_k, xi_l>.
pub fn projective_module(
    ring: &Arc<FusionRing>,
    g: &CharacterTable,
    h: &CharacterTable,
    cover: &CharacterTable,
    emb: &Embedding,
) -> Result<BasedModule> {
    if cover.kind != TableKind::DoubleCover || !cover.is_complete() {
        return Err(Error::PreconditionViolated(format!("{} must be a complete double-cover table", cover.id)));
    }
    let spin = cover.spin_indices();
    if spin.is_empty() {
        return Err(Error::PreconditionViolated(format!("{} has no spin characters", cover.id)));
    }
    let chis = ring_characters(ring, g)?;
    let n = spin.len();
    let mut matrices = Vec::new();
    for (i, chi) in chis.iter().enumerate() {
        let lifted = lift(cover, h, &restrict(emb, chi)?)?;
        let mut m = IntMatrix::zeros(n);
        for (k, &sk) in spin.iter().enumerate() {
            let f = product(&lifted, &cover.characters[sk].values)?;
            let ctx = format!("lift Res {} * {} over {}", ring.label(i), cover.characters[sk].label, cover.id);
            for &o in &cover.ordinary_indices() {
                if multiplicity(cover, &f, &cover.characters[o].values, &ctx)? != 0 {
                    return Err(Error::SpinClosureViolation(format!(
                        "{ctx} contains the non-spin character {}",
                        cover.characters[o].label
                    )));
                }
            }
            for (l, mult) in decompose_exact(cover, &f, &spin, &ctx)?.into_iter().enumerate() {
                m.set(l, k, mult as i64);
            }
        }
        matrices.push(m);
    }
    BasedModule::new(ring.clone(), matrices)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TensorDiscrepancy {
    pub table: String,
    pub factor: String,
    pub spin: String,
    pub listed: BTreeMap<String, u32>,
    pub computed: BTreeMap<String, u32>,
}

impl fmt::Display for TensorDiscrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |m: &BTreeMap<String, u32>| {
            if m.is_empty() {
                return "0".to_string();
            }
            m.iter()
                .map(|(k, v)| if *v == 1 { k.clone() } else { format!("{v}{k}") })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        write!(
            f,
            "{}: {} x {} listed as {}, computed {}",
            self.table,
            self.factor,
            self.spin,
            show(&self.listed),
            show(&self.computed)
        )
    }
}

/// Recomputes each listed tensor rule of a double cover from its table and
/// returns every rule whose decomposition differs.
pub fn tensor_rule_discrepancies(cover: &CharacterTable) -> Result<Vec<TensorDiscrepancy>> {
    let spin = cover.spin_indices();
    let mut out = Vec::new();
    for (a, b, listed) in &cover.tensor {
        let f = product(&cover.character(a)?.values, &cover.character(b)?.values)?;
        let ctx = format!("{a} x {b} over {}", cover.id);
        let mut computed = BTreeMap::new();
        for &l in &spin {
            let m = multiplicity(cover, &f, &cover.characters[l].values, &ctx)?;
            if m > 0 {
                computed.insert(cover.characters[l].label.clone(), m);
            }
        }
        let listed: BTreeMap<String, u32> = listed.iter().filter(|(_, &v)| v > 0).map(|(k, v)| (k.clone(), *v)).collect();
        if listed != computed {
            out.push(TensorDiscrepancy {
                table: cover.id.clone(),
                factor: a.clone(),
                spin: b.clone(),
                listed,
                computed,
            });
        }
    }
    Ok(out)
}

/// Square matrix over a cyclotomic field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycMatrix {
    rows: Vec<Vec<Cyclotomic>>,
}

impl CycMatrix {
    pub fn from_rows(rows: Vec<Vec<Cyclotomic>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::PreconditionViolated("matrix must be square and nonempty".into()));
        }
        Ok(CycMatrix { rows })
    }

    pub fn identity(n: usize, conductor: u32) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Cyclotomic::one(conductor) } else { Cyclotomic::zero(conductor) })
                    .collect()
            })
            .collect();
        CycMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclotomic {
        &self.rows[i][j]
    }

    pub fn mul(&self, rhs: &CycMatrix) -> CycMatrix {
        let n = self.dim();
        let conductor = self.rows[0][0].conductor();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Cyclotomic::zero(conductor), |acc, k| &acc + &(&self.rows[i][k] * &rhs.rows[k][j]))
                    })
                    .collect()
            })
            .collect();
        CycMatrix { rows }
    }

    pub fn scale(&self, c: &Cyclotomic) -> CycMatrix {
        CycMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(|x| c * x).collect()).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> CycMatrix {
        let conductor = self.rows[0][0].conductor();
        (0..e).fold(CycMatrix::identity(self.dim(), conductor), |acc, _| acc.mul(self))
    }

    pub fn trace(&self) -> Cyclotomic {
        let conductor = self.rows[0][0].conductor();
        (0..self.dim()).fold(Cyclotomic::zero(conductor), |acc, i| &acc + &self.rows[i][i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ProjectiveViolation {
    Product { g: usize, h: usize },
    Cocycle { g: usize, h: usize, k: usize },
}

impl fmt::Display for ProjectiveViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectiveViolation::Product { g, h } => {
                write!(f, "pi(g{g}) pi(g{h}) != alpha(g{g}, g{h}) pi(g{g} g{h})")
            }
            ProjectiveViolation::Cocycle { g, h, k } => {
                write!(f, "cocycle identity fails at (g{g}, g{h}, g{k})")
            }
        }
    }
}

/// Checks pi(g) pi(h) = alpha(g, h) pi(gh) for all pairs and the cocycle
/// identity for all triples. `mult[g][h]` is the index of gh.
pub fn verify_projective_rep(
    mult: &[Vec<usize>],
    matrices: &[CycMatrix],
    cocycle: &dyn Fn(usize, usize) -> Cyclotomic,
) -> ValidationReport<ProjectiveViolation> {
    let n = mult.len();
    let mut report = ValidationReport::new();
    for g in 0..n {
        for h in 0..n {
            let lhs = matrices[g].mul(&matrices[h]);
            let rhs = matrices[mult[g][h]].scale(&cocycle(g, h));
            if lhs != rhs {
                report.push(ProjectiveViolation::Product { g, h });
            }
        }
    }
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                let left = &cocycle(g, h) * &cocycle(mult[g][h], k);
                let right = &cocycle(h, k) * &cocycle(g, mult[h][k]);
                if left != right {
                    report.push(ProjectiveViolation::Cocycle { g, h, k });
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleFile {
    /// alpha(g, h) = root^(Σ form[a][b] e_a(g) e_b(h)) on normal-form exponents.
    pub root: String,
    pub form: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectiveRepFile {
    pub label: String,
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectiveFile {
    pub id: String,
    pub group: String,
    pub embedding: String,
    pub conductor: u32,
    pub normal_form: Vec<(String, u32)>,
    pub cocycle: CocycleFile,
    pub reps: Vec<ProjectiveRepFile>,
    #[serde(default)]
    pub tensor: Vec<TensorRule>,
}

/// Explicit projective representations of a permutation group, indexed by
/// normal-form words g_1^{e_1} ... g_m^{e_m}.
#[derive(Debug, Clone)]
pub struct ProjectiveData {
    pub id: String,
    pub group: String,
    pub embedding: String,
    pub conductor: u32,
    pub exponents: Vec<Vec<u32>>,
    pub mult: Vec<Vec<usize>>,
    /// Subgroup class of each element.
    pub element_class: Vec<usize>,
    pub alpha: Vec<Vec<Cyclotomic>>,
    pub reps: Vec<(String, Vec<CycMatrix>)>,
    pub tensor: Vec<TensorRule>,
}

impl ProjectiveData {
    pub fn from_file(file: ProjectiveFile, h: &CharacterTable, emb: &Embedding) -> Result<Self> {
        let err = |reason: String| Error::InvalidProjective {
            data: file.id.clone(),
            reason,
        };
        if file.group != h.id || emb.subgroup != h.id || file.embedding != emb.id {
            return Err(err(format!("group {} does not match table {} / embedding {}", file.group, h.id, emb.id)));
        }
        let m = file.normal_form.len();
        let mut gen_perms = Vec::new();
        for (name, _) in &file.normal_form {
            gen_perms.push(
                emb.generators
                    .get(name)
                    .cloned()
                    .ok_or_else(|| err(format!("unknown generator `{name}`")))?,
            );
        }
        let mut exponents: Vec<Vec<u32>> = vec![vec![]];
        for (_, ord) in &file.normal_form {
            exponents = exponents
                .into_iter()
                .flat_map(|e| {
                    (0..*ord).map(move |x| {
                        let mut v = e.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        let perms: Vec<Perm> = exponents
            .iter()
            .map(|e| {
                e.iter()
                    .zip(&gen_perms)
                    .fold(Perm::identity(emb.degree), |acc, (&x, p)| acc.compose(&p.pow(x)))
            })
            .collect();
        if perms.iter().collect::<BTreeSet<_>>().len() != perms.len() || perms.len() != emb.order() {
            return Err(err("normal form does not enumerate the group exactly once".into()));
        }
        let find = |p: &Perm| perms.iter().position(|q| q == p).expect("closed under products");
        let mult: Vec<Vec<usize>> = perms
            .iter()
            .map(|g| perms.iter().map(|h| find(&g.compose(h))).collect())
            .collect();
        let element_class = perms
            .iter()
            .map(|p| emb.element_index(p).map(|k| emb.element_class[k]).ok_or_else(|| err(format!("{p} outside the group"))))
            .collect::<Result<Vec<_>>>()?;
        let root = Cyclotomic::parse(&file.cocycle.root, file.conductor)?;
        let form = &file.cocycle.form;
        if form.len() != m || form.iter().any(|r| r.len() != m) {
            return Err(err("cocycle form must be square in the number of generators".into()));
        }
        let alpha = exponents
            .iter()
            .map(|eg| {
                exponents
                    .iter()
                    .map(|eh| {
                        let mut k: i64 = 0;
                        for a in 0..m {
                            for b in 0..m {
                                k += form[a][b] * eg[a] as i64 * eh[b] as i64;
                            }
                        }
                        root.pow(k as u32)
                    })
                    .collect()
            })
            .collect();
        let mut reps = Vec::new();
        for rep in &file.reps {
            let mut gens = Vec::new();
            for (name, _) in &file.normal_form {
                let rows = rep
                    .matrices
                    .get(name)
                    .ok_or_else(|| err(format!("rep {} lacks a matrix for `{name}`", rep.label)))?;
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|v| Cyclotomic::parse(v, file.conductor)).collect())
                    .collect::<Result<Vec<_>>>()?;
                gens.push(CycMatrix::from_rows(rows)?);
            }
            let d = gens[0].dim();
            if gens.iter().any(|g| g.dim() != d) {
                return Err(err(format!("rep {} mixes matrix sizes", rep.label)));
            }
            let mats = exponents
                .iter()
                .map(|e| {
                    e.iter()
                        .zip(&gens)
                        .fold(CycMatrix::identity(d, file.conductor), |acc, (&x, a)| acc.mul(&a.pow(x)))
                })
                .collect();
            reps.push((rep.label.clone(), mats));
        }
        let labels: BTreeSet<&str> = reps.iter().map(|(l, _)| l.as_str()).collect();
        for (a, b, terms) in &file.tensor {
            h.character(a)?;
            if !labels.contains(b.as_str()) || terms.keys().any(|t| !labels.contains(t.as_str())) {
                return Err(err(format!("tensor rule {a} x {b} names an unknown representation")));
            }
        }
        Ok(ProjectiveData {
            id: file.id,
            group: file.group,
            embedding: file.embedding,
            conductor: file.conductor,
            exponents,
            mult,
            element_class,
            alpha,
            reps,
            tensor: file.tensor,
        })
    }

    pub fn order(&self) -> usize {
        self.exponents.len()
    }

    /// Runs [`verify_projective_rep`] on every listed representation.
    pub fn verify(&self) -> Vec<(String, ValidationReport<ProjectiveViolation>)> {
        let alpha = |g: usize, h: usize| self.alpha[g][h].clone();
        self.reps
            .iter()
            .map(|(label, mats)| (label.clone(), verify_projective_rep(&self.mult, mats, &alpha)))
            .collect()
    }

    /// tr pi_l(g) for each element.
    pub fn trace_character(&self, l: usize) -> Vec<Cyclotomic> {
        self.reps[l].1.iter().map(|m| m.trace()).collect()
    }

    /// Multiplicity of pi_m in W_k ⊗ pi_l computed from traces over all elements.
    pub fn trace_multiplicity(&self, h: &CharacterTable, k: usize, l: usize, m: usize) -> Result<u32> {
        let chi_l = self.trace_character(l);
        let chi_m = self.trace_character(m);
        let mut acc = Cyclotomic::zero(self.conductor);
        for g in 0..self.order() {
            let w = &h.characters[k].values[self.element_class[g]];
            acc = &acc + &(&(w * &chi_l[g]) * &chi_m[g].conj());
        }
        let ctx = format!("{} x {} over {}", h.characters[k].label, self.reps[l].0, self.id);
        let q = acc.as_rational().ok_or_else(|| Error::NotRational(ctx.clone()))?
            / BigRational::from_integer(BigInt::from(self.order()));
        if !q.is_integer() || q.is_negative() {
            return Err(Error::NonIntegralMultiplicity {
                value: q.to_string(),
                context: ctx,
            });
        }
        Ok(q.to_integer().to_u32().unwrap_or(u32::MAX))
    }

    fn listed_multiplicity(&self, k: &str, l: &str, m: &str) -> Option<u32> {
        self.tensor
            .iter()
            .find(|(a, b, _)| a == k && b == l)
            .map(|(_, _, t)| t.get(m).copied().unwrap_or(0))
    }
}

/// The module r(H, alpha) built from the listed tensor rules of explicit
/// projective data composed with restriction to H. Each listed rule is
/// cross-checked against the trace computation; missing rules are an error.
pub fn explicit_twisted_module(
    ring: &Arc<FusionRing>,
    g: &CharacterTable,
    h: &CharacterTable,
    emb: &Embedding,
    data: &ProjectiveData,
) -> Result<BasedModule> {
    let n = data.reps.len();
    let hk = h.characters.len();
    // rules[k][l][m] = multiplicity of pi_m in W_k ⊗ pi_l
    let mut rules = vec![vec![vec![0u32; n]; n]; hk];
    for k in 0..hk {
        for l in 0..n {
            for m in 0..n {
                let label = &h.characters[k].label;
                let listed = data.listed_multiplicity(label, &data.reps[l].0, &data.reps[m].0).ok_or_else(|| {
                    Error::InvalidProjective {
                        data: data.id.clone(),
                        reason: format!("no tensor rule for {label} x {}", data.reps[l].0),
                    }
                })?;
                let traced = data.trace_multiplicity(h, k, l, m)?;
                if listed != traced {
                    return Err(Error::CrossCheck(format!(
                        "{label} x {} contains {} with multiplicity {listed} by the listed rule, {traced} by traces",
                        data.reps[l].0, data.reps[m].0
                    )));
                }
                rules[k][l][m] = listed;
            }
        }
    }
    let chis = ring_characters(ring, g)?;
    let mut matrices = Vec::new();
    for (i, chi) in chis.iter().enumerate() {
        let res = restrict(emb, chi)?;
        let mut m = IntMatrix::zeros(n);
        for k in 0..hk {
            let ctx = format!("Res {} over {}", ring.label(i), h.id);
            let r = multiplicity(h, &res, &h.characters[k].values, &ctx)? as i64;
            if r == 0 {
                continue;
            }
            for l in 0..n {
                for row in 0..n {
                    m.set(row, l, m.get(row, l) + r * rules[k][l][row] as i64);
                }
            }
        }
        matrices.push(m);
    }
    BasedModule::new(ring.clone(), matrices)
}
