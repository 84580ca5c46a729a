//! The shipped data: the r(S4) ring, its solve plan, character tables,
//! subgroup embeddings, explicit projective data, and golden fixtures.
//!
//! Everything is validated at load. A catalog comes either from the copy
//! compiled into the binary or from a directory laid out like `data/`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chars::{
    self, CharacterTable, Embedding, EmbeddingFile, ProjectiveData, ProjectiveFile, TableKind,
};
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::ring::{validate_ring, FusionRing};
use crate::solver::SolvePlan;
use crate::zmodule::{self, BasedModule, CanonicalKey};

/// Environment variable naming a data directory that replaces the built-in catalog.
pub const DATA_ENV: &str = "FUSIONMOD_DATA";

pub const MANIFEST: &str = "catalog.toml";

macro_rules! builtin {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!("../../../data/", $path)))),*]
    };
}

static BUILTIN: &[(&str, &str)] = builtin![
    "catalog.toml",
    "rings/s4.toml",
    "plans/s4.toml",
    "tables/s4.toml",
    "tables/trivial.toml",
    "tables/z2.toml",
    "tables/z3.toml",
    "tables/z4.toml",
    "tables/k4.toml",
    "tables/s3.toml",
    "tables/a4.toml",
    "tables/d4.toml",
    "tables/q8.toml",
    "tables/2a4.toml",
    "tables/2s4.toml",
    "embeddings/trivial.toml",
    "embeddings/z2.toml",
    "embeddings/z2_double.toml",
    "embeddings/z3.toml",
    "embeddings/z4.toml",
    "embeddings/k4.toml",
    "embeddings/k4_normal.toml",
    "embeddings/s3.toml",
    "embeddings/a4.toml",
    "embeddings/d4.toml",
    "embeddings/s4.toml",
    "projective/d4_alpha.toml",
    "projective/k4_alpha.toml",
    "fixtures/m_1_1.json",
    "fixtures/m_2_1.json",
    "fixtures/m_2_2.json",
    "fixtures/m_2_3.json",
    "fixtures/m_3_1.json",
    "fixtures/m_3_2.json",
    "fixtures/m_3_3.json",
    "fixtures/m_4_1.json",
    "fixtures/m_4_2.json",
    "fixtures/m_4_3.json",
    "fixtures/m_4_4.json",
    "fixtures/m_4_5.json",
    "fixtures/m_4_6.json",
    "fixtures/m_4_7.json",
    "fixtures/m_5_1.json",
    "fixtures/m_5_2.json",
];

#[derive(Debug, Clone)]
pub enum Source {
    Builtin,
    Dir(PathBuf),
}

impl Source {
    /// `$FUSIONMOD_DATA` if set, otherwise the built-in copy.
    pub fn from_env() -> Self {
        match std::env::var_os(DATA_ENV) {
            Some(dir) if !dir.is_empty() => Source::Dir(PathBuf::from(dir)),
            _ => Source::Builtin,
        }
    }

    pub fn read(&self, rel: &str) -> Result<String> {
        match self {
            Source::Builtin => BUILTIN
                .iter()
                .find(|(p, _)| *p == rel)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::MissingFile(rel.to_string())),
            Source::Dir(dir) => {
                let path = dir.join(rel);
                std::fs::read_to_string(&path).map_err(|e| {
                    if e.kind() == std::io::ErrorKind::NotFound {
                        Error::MissingFile(path.display().to_string())
                    } else {
                        Error::Io {
                            path: path.display().to_string(),
                            source: e,
                        }
                    }
                })
            }
        }
    }

    pub fn describe(&self, rel: &str) -> String {
        match self {
            Source::Builtin => format!("<builtin>/{rel}"),
            Source::Dir(dir) => dir.join(rel).display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub ring: String,
    pub ring_table: String,
    pub plan: String,
    pub tables: Vec<String>,
    pub embeddings: Vec<String>,
    #[serde(default)]
    pub projective: Vec<String>,
    pub fixtures: Vec<String>,
    #[serde(default)]
    pub categorify: Vec<CategorifyJob>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JobKind {
    /// r(H) from ordinary characters of H.
    Restriction { embedding: String },
    /// r(H, alpha) from the spin characters of a double cover of H.
    DoubleCover { embedding: String, cover: String },
    /// r(H, alpha) from explicit projective matrices and tensor rules.
    Explicit { projective: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorifyJob {
    pub name: String,
    #[serde(flatten)]
    pub kind: JobKind,
    /// Counts toward the comparison with the fixture categorification lists.
    #[serde(default)]
    pub counted: bool,
    /// The rho2 <-> rho3 relabeled module also counts.
    #[serde(default)]
    pub swap: bool,
    #[serde(default)]
    pub note: Option<String>,
}

impl CategorifyJob {
    pub fn describe(&self) -> String {
        let route = match &self.kind {
            JobKind::Restriction { embedding } => format!("restriction to {embedding}"),
            JobKind::DoubleCover { embedding, cover } => format!("spin characters of {cover} over {embedding}"),
            JobKind::Explicit { projective } => format!("explicit data {projective}"),
        };
        match &self.note {
            Some(n) => format!("{route} ({n})"),
            None => route,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureFile {
    pub schema: u32,
    pub ring: String,
    pub label: String,
    pub rank: usize,
    pub matrices: BTreeMap<String, IntMatrix>,
    #[serde(default)]
    pub categorifications: Vec<String>,
    pub canonical_key: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub label: String,
    pub module: BasedModule,
    pub categorifications: Vec<String>,
    pub key: CanonicalKey,
    pub file: String,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub source: Source,
    pub ring: Arc<FusionRing>,
    pub ring_table: String,
    pub plan: SolvePlan,
    pub tables: BTreeMap<String, CharacterTable>,
    pub embeddings: BTreeMap<String, Embedding>,
    pub projective: BTreeMap<String, ProjectiveData>,
    pub fixtures: Vec<Fixture>,
    pub jobs: Vec<CategorifyJob>,
}

fn invalid(file: &str, reason: impl std::fmt::Display) -> Error {
    Error::Validation {
        file: file.to_string(),
        reason: reason.to_string(),
    }
}

fn decode<T: serde::de::DeserializeOwned>(text: &str, name: &str) -> Result<T> {
    if name.ends_with(".json") {
        serde_json::from_str(text).map_err(|e| Error::FileFormat {
            path: name.to_string(),
            reason: e.to_string(),
        })
    } else {
        toml::from_str(text).map_err(|e| Error::FileFormat {
            path: name.to_string(),
            reason: e.to_string(),
        })
    }
}

/// Loads the catalog named by `$FUSIONMOD_DATA`, or the built-in one.
pub fn load_catalog() -> Result<Catalog> {
    Catalog::load(Source::from_env())
}

impl Catalog {
    pub fn builtin() -> Result<Self> {
        Self::load(Source::Builtin)
    }

    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        Self::load(Source::Dir(dir.as_ref().to_path_buf()))
    }

    pub fn load(source: Source) -> Result<Self> {
        let manifest: Manifest = decode(&source.read(MANIFEST)?, &source.describe(MANIFEST))?;
        let name = |rel: &str| source.describe(rel);

        let ring_text = source.read(&manifest.ring)?;
        let ring = FusionRing::from_str_with_format(&ring_text, &name(&manifest.ring))
            .map_err(|e| invalid(&name(&manifest.ring), e))?;
        let report = validate_ring(&ring);
        if !report.is_ok() {
            return Err(invalid(&name(&manifest.ring), report));
        }
        let ring = Arc::new(ring);

        let plan_text = source.read(&manifest.plan)?;
        let plan = SolvePlan::from_str_with_format(&plan_text, &name(&manifest.plan), ring.clone())
            .map_err(|e| invalid(&name(&manifest.plan), e))?;

        let mut tables = BTreeMap::new();
        for rel in &manifest.tables {
            let text = source.read(rel)?;
            let t = CharacterTable::from_str_with_format(&text, &name(rel)).map_err(|e| invalid(&name(rel), e))?;
            let report = chars::check_orthogonality(&t);
            if !report.is_ok() {
                return Err(invalid(&name(rel), format!("orthogonality fails: {report}")));
            }
            if tables.insert(t.id.clone(), t).is_some() {
                return Err(invalid(&name(rel), "duplicate table id"));
            }
        }
        for t in tables.values() {
            if t.kind == TableKind::DoubleCover {
                let base_id = t.covers.as_deref().unwrap_or_default();
                let base = tables
                    .get(base_id)
                    .ok_or_else(|| invalid(&t.id, format!("covered table {base_id} is not loaded")))?;
                chars::check_cover(t, base).map_err(|e| invalid(&t.id, e))?;
            }
        }

        let g = tables
            .get(&manifest.ring_table)
            .ok_or_else(|| invalid(&name(MANIFEST), format!("ring table {} is not loaded", manifest.ring_table)))?;
        check_ring_table(&ring, g).map_err(|e| invalid(&name(&manifest.ring), e))?;

        let mut embeddings = BTreeMap::new();
        for rel in &manifest.embeddings {
            let file: EmbeddingFile = decode(&source.read(rel)?, &name(rel))?;
            let lookup = |id: &str| {
                tables
                    .get(id)
                    .ok_or_else(|| invalid(&name(rel), format!("table {id} is not loaded")))
            };
            let (sub, sup) = (lookup(&file.subgroup)?, lookup(&file.supergroup)?);
            let e = Embedding::from_file(file, sub, sup).map_err(|e| invalid(&name(rel), e))?;
            if embeddings.insert(e.id.clone(), e).is_some() {
                return Err(invalid(&name(rel), "duplicate embedding id"));
            }
        }

        let mut projective = BTreeMap::new();
        for rel in &manifest.projective {
            let file: ProjectiveFile = decode(&source.read(rel)?, &name(rel))?;
            let h = tables
                .get(&file.group)
                .ok_or_else(|| invalid(&name(rel), format!("table {} is not loaded", file.group)))?;
            let emb = embeddings
                .get(&file.embedding)
                .ok_or_else(|| invalid(&name(rel), format!("embedding {} is not loaded", file.embedding)))?;
            let data = ProjectiveData::from_file(file, h, emb).map_err(|e| invalid(&name(rel), e))?;
            for (label, report) in data.verify() {
                if !report.is_ok() {
                    return Err(invalid(&name(rel), format!("{label} is not projective for the cocycle: {report}")));
                }
            }
            if projective.insert(data.id.clone(), data).is_some() {
                return Err(invalid(&name(rel), "duplicate projective id"));
            }
        }

        let mut fixtures: Vec<Fixture> = Vec::new();
        for rel in &manifest.fixtures {
            let file: FixtureFile = decode(&source.read(rel)?, &name(rel))?;
            let f = load_fixture(file, &plan, &name(rel))?;
            if fixtures.iter().any(|x| x.label == f.label) {
                return Err(invalid(&name(rel), format!("duplicate fixture label {}", f.label)));
            }
            if let Some(x) = fixtures.iter().find(|x| x.key == f.key) {
                return Err(invalid(&name(rel), format!("{} is equivalent to {}", f.label, x.label)));
            }
            fixtures.push(f);
        }

        for job in &manifest.categorify {
            let ok = match &job.kind {
                JobKind::Restriction { embedding } => embeddings.contains_key(embedding),
                JobKind::DoubleCover { embedding, cover } => {
                    embeddings.contains_key(embedding)
                        && tables.get(cover).is_some_and(|t| {
                            t.kind == TableKind::DoubleCover
                                && t.covers.as_deref() == Some(embeddings[embedding].subgroup.as_str())
                        })
                }
                JobKind::Explicit { projective: p } => projective.contains_key(p),
            };
            if !ok {
                return Err(invalid(&name(MANIFEST), format!("job {} ({}) references missing data", job.name, job.describe())));
            }
        }

        Ok(Catalog {
            source,
            ring,
            ring_table: manifest.ring_table,
            plan,
            tables,
            embeddings,
            projective,
            fixtures,
            jobs: manifest.categorify,
        })
    }

    pub fn table(&self, id: &str) -> Result<&CharacterTable> {
        self.tables.get(id).ok_or_else(|| Error::UnknownLabel(format!("table {id}")))
    }

    pub fn embedding(&self, id: &str) -> Result<&Embedding> {
        self.embeddings.get(id).ok_or_else(|| Error::UnknownLabel(format!("embedding {id}")))
    }

    pub fn ring_table(&self) -> &CharacterTable {
        &self.tables[&self.ring_table]
    }

    pub fn fixture(&self, label: &str) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| f.label == label)
    }

    pub fn lookup_fixture(&self, key: &CanonicalKey) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| &f.key == key)
    }

    pub fn restriction_module(&self, embedding: &str) -> Result<BasedModule> {
        let emb = self.embedding(embedding)?;
        chars::restriction_module(&self.ring, self.table(&emb.supergroup)?, self.table(&emb.subgroup)?, emb)
    }

    pub fn projective_module(&self, embedding: &str, cover: &str) -> Result<BasedModule> {
        let emb = self.embedding(embedding)?;
        chars::projective_module(
            &self.ring,
            self.table(&emb.supergroup)?,
            self.table(&emb.subgroup)?,
            self.table(cover)?,
            emb,
        )
    }

    pub fn explicit_module(&self, projective: &str) -> Result<BasedModule> {
        let data = self
            .projective
            .get(projective)
            .ok_or_else(|| Error::UnknownLabel(format!("projective data {projective}")))?;
        let emb = self.embedding(&data.embedding)?;
        chars::explicit_twisted_module(
            &self.ring,
            self.table(&emb.supergroup)?,
            self.table(&data.group)?,
            emb,
            data,
        )
    }

    /// The rank-2 module of the twisted D4 group algebra.
    pub fn d4_twisted_module(&self) -> Result<BasedModule> {
        self.explicit_module("D4-alpha")
    }

    pub fn run_job(&self, job: &CategorifyJob) -> Result<BasedModule> {
        match &job.kind {
            JobKind::Restriction { embedding } => self.restriction_module(embedding),
            JobKind::DoubleCover { embedding, cover } => self.projective_module(embedding, cover),
            JobKind::Explicit { projective } => self.explicit_module(projective),
        }
    }

    /// Listed-versus-recomputed tensor rules for every double cover.
    pub fn tensor_discrepancies(&self) -> Result<Vec<chars::TensorDiscrepancy>> {
        let mut out = Vec::new();
        for t in self.tables.values().filter(|t| t.kind == TableKind::DoubleCover) {
            out.extend(chars::tensor_rule_discrepancies(t)?);
        }
        Ok(out)
    }
}

/// The ring's structure constants must be the tensor decompositions of the
/// characters carrying its labels.
fn check_ring_table(ring: &FusionRing, g: &CharacterTable) -> Result<()> {
    let chis = ring
        .labels()
        .iter()
        .map(|l| Ok(&g.character(l)?.values))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..ring.rank() {
        for j in 0..ring.rank() {
            let f = chars::product(chis[i], chis[j])?;
            for k in 0..ring.rank() {
                let ctx = format!("{} x {}", ring.label(i), ring.label(j));
                let m = chars::multiplicity(g, &f, chis[k], &ctx)?;
                if m != ring.c(i, j, k) {
                    return Err(Error::CrossCheck(format!(
                        "{ctx} contains {} {m} times by characters, {} times by the ring",
                        ring.label(k),
                        ring.c(i, j, k)
                    )));
                }
            }
        }
    }
    Ok(())
}

fn load_fixture(file: FixtureFile, plan: &SolvePlan, name: &str) -> Result<Fixture> {
    let label = file.label.clone();
    let fail = |reason: String| invalid(name, format!("{label}: {reason}"));
    if file.schema != 1 {
        return Err(fail(format!("unsupported schema {}", file.schema)));
    }
    let ring = plan.ring();
    if file.ring != ring.id() {
        return Err(fail(format!("fixture is over {}, catalog ring is {}", file.ring, ring.id())));
    }
    let mut solved = Vec::new();
    for st in plan.stages() {
        let l = ring.label(st.target);
        let m = file
            .matrices
            .get(l)
            .ok_or_else(|| fail(format!("no matrix for {l}")))?;
        if m.dim() != file.rank {
            return Err(fail(format!("matrix for {l} is not {0}x{0}", file.rank)));
        }
        solved.push(m.clone());
    }
    let module = plan.assemble(&solved).map_err(|e| fail(e.to_string()))?;
    for (l, m) in &file.matrices {
        let idx = ring.index_of(l).map_err(|e| fail(e.to_string()))?;
        if module.matrix(idx) != m {
            return Err(fail(format!("listed matrix for {l} differs from the derived one")));
        }
    }
    let report = zmodule::check_representation(&module);
    if !report.is_ok() {
        return Err(fail(format!("not a representation: {report}")));
    }
    let report = zmodule::check_based(&module);
    if !report.is_ok() {
        return Err(fail(format!("not based: {report}")));
    }
    if !zmodule::is_irreducible(&module)? {
        return Err(fail("not irreducible".into()));
    }
    let key = zmodule::canonical_key(&module);
    if key.flat != file.canonical_key {
        return Err(fail("stored canonical key differs from the computed one".into()));
    }
    Ok(Fixture {
        label: file.label,
        module,
        categorifications: file.categorifications,
        key,
        file: name.to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub convention: &'static str,
    #[serde(skip)]
    pub module: BasedModule,
    pub rank: usize,
    /// Fixture label of the equivalent module, if any.
    pub fixture: Option<String>,
    pub is_representation: bool,
    pub is_based: bool,
    pub irreducible: bool,
}

impl Outcome {
    pub fn passes(&self) -> bool {
        self.is_representation && self.is_based
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JobResult {
    pub name: String,
    pub route: String,
    pub counted: bool,
    pub swap: bool,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureComparison {
    pub label: String,
    pub expected: Vec<String>,
    pub computed: Vec<String>,
}

impl FixtureComparison {
    pub fn matches(&self) -> bool {
        self.expected == self.computed
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CategorificationReport {
    pub jobs: Vec<JobResult>,
    pub comparison: Vec<FixtureComparison>,
    pub tensor_discrepancies: Vec<String>,
}

impl CategorificationReport {
    pub fn all_match(&self) -> bool {
        self.comparison.iter().all(FixtureComparison::matches)
    }

    pub fn all_pass(&self) -> bool {
        self.jobs.iter().flat_map(|j| &j.outcomes).all(Outcome::passes)
    }
}

fn outcome(catalog: &Catalog, convention: &'static str, module: BasedModule) -> Result<Outcome> {
    let is_representation = zmodule::check_representation(&module).is_ok();
    let is_based = zmodule::check_based(&module).is_ok();
    let irreducible = is_based && zmodule::is_irreducible(&module)?;
    let fixture = catalog
        .lookup_fixture(&zmodule::canonical_key(&module))
        .map(|f| f.label.clone());
    Ok(Outcome {
        convention,
        rank: module.rank(),
        module,
        fixture,
        is_representation,
        is_based,
        irreducible,
    })
}

/// Runs every job in both labelings of rho2/rho3 and compares the counted rows
/// with the fixture categorification lists.
pub fn categorify(catalog: &Catalog) -> Result<CategorificationReport> {
    let ring = &catalog.ring;
    let (r2, r3) = (ring.index_of("rho2")?, ring.index_of("rho3")?);
    let mut jobs = Vec::new();
    let mut computed: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for job in &catalog.jobs {
        let module = catalog.run_job(job)?;
        let swapped = zmodule::swap_rho(&module, r2, r3)?;
        let outcomes = vec![outcome(catalog, "standard", module)?, outcome(catalog, "swapped", swapped)?];
        if job.counted {
            for (o, counts) in outcomes.iter().zip([true, job.swap]) {
                if let (true, Some(label)) = (counts, &o.fixture) {
                    computed.entry(label.clone()).or_default().insert(job.name.clone());
                }
            }
        }
        jobs.push(JobResult {
            name: job.name.clone(),
            route: job.describe(),
            counted: job.counted,
            swap: job.swap,
            outcomes,
        });
    }
    let comparison = catalog
        .fixtures
        .iter()
        .map(|f| {
            let mut expected = f.categorifications.clone();
            expected.sort();
            FixtureComparison {
                label: f.label.clone(),
                expected,
                computed: computed.remove(&f.label).unwrap_or_default().into_iter().collect(),
            }
        })
        .collect();
    let tensor_discrepancies = catalog.tensor_discrepancies()?.iter().map(|d| d.to_string()).collect();
    Ok(CategorificationReport {
        jobs,
        comparison,
        tensor_discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_loads() {
        let c = Catalog::builtin().unwrap();
        assert_eq!(c.fixtures.len(), 16);
        assert!(c.tables.len() >= 10);
        assert_eq!(c.ring.rank(), 5);
    }

    #[test]
    fn every_builtin_file_is_listed() {
        let m: Manifest = toml::from_str(BUILTIN[0].1).unwrap();
        let mut listed: BTreeSet<&str> = BTreeSet::from([MANIFEST, m.ring.as_str(), m.plan.as_str()]);
        for v in [&m.tables, &m.embeddings, &m.projective, &m.fixtures] {
            listed.extend(v.iter().map(String::as_str));
        }
        let shipped: BTreeSet<&str> = BUILTIN.iter().map(|(p, _)| *p).collect();
        assert_eq!(listed, shipped);
    }
}
