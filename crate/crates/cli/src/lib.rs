//! Command implementations behind the `fusionmod` binary.
//!
//! Exit codes: 0 success, 1 a check or comparison failed, 2 usage or I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fusionmod::catalog::{categorify, load_catalog, CategorificationReport, Catalog};
use fusionmod::chars::{check_cover, check_orthogonality, TableKind};
use fusionmod::solver::{classify, ClassificationResult, SolvePlan};
use fusionmod::zmodule::{check_based, check_representation, is_irreducible};
use fusionmod::{BasedModule, FusionRing, IntMatrix};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "fusionmod", version, about = "Classify based modules over r(S4) and check their categorifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate irreducible based modules rank by rank.
    Classify(ClassifyArgs),
    /// Build restriction and projective modules and match them to fixtures.
    Categorify(CategorifyArgs),
    /// Verify the data catalog.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    S4,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Use the cataloged ring and plan.
    #[arg(long, value_enum, conflicts_with_all = ["ring", "plan"])]
    pub builtin: Option<Builtin>,
    #[arg(long, requires = "plan")]
    pub ring: Option<PathBuf>,
    #[arg(long, requires = "ring")]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub max_rank: usize,
    /// Include per-stage solution counts.
    #[arg(long)]
    pub trace: bool,
    /// Fail unless the modules found are exactly the cataloged fixtures.
    #[arg(long)]
    pub expect_fixtures: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CategorifyArgs {
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Fail unless every fixture's categorification list is reproduced.
    #[arg(long)]
    pub check_paper: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Catalog,
    Orthogonality,
    Cocycle,
    Based,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub only: Option<Suite>,
}

/// A failed command: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn check(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<fusionmod::Error> for Failure {
    fn from(e: fusionmod::Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 1 };
        Failure { code, message: e.to_string() }
    }
}

pub type Outcome = std::result::Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Classify(a) => cmd_classify(&a),
        Command::Categorify(a) => cmd_categorify(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Failure::usage(format!("file not found: {}", path.display()))
        } else {
            Failure::usage(format!("{}: {e}", path.display()))
        }
    })
}

fn hint(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn write_reports<T: Serialize>(out: &Path, stem: &str, report: &T, markdown: &str) -> Outcome {
    std::fs::create_dir_all(out).map_err(|e| Failure::usage(format!("{}: {e}", out.display())))?;
    let json = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    for (ext, body) in [("json", json.as_str()), ("md", markdown)] {
        let path = out.join(format!("{stem}.{ext}"));
        std::fs::write(&path, body).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn rows(m: &IntMatrix) -> Vec<Vec<i64>> {
    m.rows()
}

fn inline(m: &IntMatrix) -> String {
    let r: Vec<String> = m
        .rows()
        .iter()
        .map(|row| row.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", r.join("; "))
}

// classify -------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct NamedMatrix {
    pub label: String,
    pub rows: Vec<Vec<i64>>,
}

#[derive(Debug, Serialize)]
pub struct ModuleRow {
    pub label: String,
    pub fixture: Option<String>,
    pub irreducible: bool,
    pub verified: bool,
    pub matrices: Vec<NamedMatrix>,
}

#[derive(Debug, Serialize)]
pub struct RankSection {
    pub rank: usize,
    pub count: usize,
    pub assembled: usize,
    pub modules: Vec<ModuleRow>,
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub rank: usize,
    pub stage: String,
    pub inputs: Vec<NamedMatrix>,
    pub solutions: usize,
    pub classes: Option<usize>,
    pub irreducible: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct FixtureCheck {
    pub missing: Vec<String>,
    pub unexpected: Vec<String>,
}

impl FixtureCheck {
    pub fn ok(&self) -> bool {
        self.missing.is_empty() && self.unexpected.is_empty()
    }
}

#[derive(Debug, Serialize)]
pub struct ClassificationReport {
    pub schema: u32,
    pub ring: String,
    pub max_rank: usize,
    pub counts: Vec<usize>,
    pub ranks: Vec<RankSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture_check: Option<FixtureCheck>,
}

impl ClassificationReport {
    pub fn all_verified(&self) -> bool {
        self.ranks.iter().flat_map(|r| &r.modules).all(|m| m.verified && m.irreducible)
    }
}

fn module_row(m: &BasedModule, label: String, fixture: Option<String>) -> Result<ModuleRow, Failure> {
    let ring = m.ring();
    Ok(ModuleRow {
        label,
        fixture,
        irreducible: is_irreducible(m)?,
        verified: check_representation(m).is_ok() && check_based(m).is_ok(),
        matrices: m
            .matrices()
            .iter()
            .enumerate()
            .map(|(i, x)| NamedMatrix { label: ring.label(i).to_string(), rows: rows(x) })
            .collect(),
    })
}

pub fn classification_report(
    ring: &Arc<FusionRing>,
    results: &[ClassificationResult],
    catalog: Option<&Catalog>,
    trace: bool,
    expect_fixtures: bool,
) -> Result<ClassificationReport, Failure> {
    let mut ranks = Vec::new();
    for res in results {
        let mut modules = Vec::new();
        for (i, (m, key)) in res.modules.iter().zip(&res.keys).enumerate() {
            let fixture = catalog.and_then(|c| c.lookup_fixture(key)).map(|f| f.label.clone());
            let label = fixture.clone().unwrap_or_else(|| format!("N_{}_{}", res.rank, i + 1));
            modules.push(module_row(m, label, fixture)?);
        }
        ranks.push(RankSection {
            rank: res.rank,
            count: modules.len(),
            assembled: res.assembled,
            modules,
        });
    }
    let trace = trace.then(|| {
        results
            .iter()
            .flat_map(|res| {
                res.trace.iter().map(|r| TraceRow {
                    rank: res.rank,
                    stage: r.stage.clone(),
                    inputs: r
                        .inputs
                        .iter()
                        .map(|(s, m)| NamedMatrix { label: s.clone(), rows: rows(m) })
                        .collect(),
                    solutions: r.solutions,
                    classes: r.classes,
                    irreducible: r.irreducible,
                })
            })
            .collect()
    });
    let fixture_check = match (expect_fixtures, catalog) {
        (false, _) => None,
        (true, None) => return Err(Failure::usage("--expect-fixtures needs the cataloged ring")),
        (true, Some(c)) => {
            let found: std::collections::BTreeSet<&str> = ranks
                .iter()
                .flat_map(|r| &r.modules)
                .filter_map(|m| m.fixture.as_deref())
                .collect();
            let max = results.len();
            Some(FixtureCheck {
                missing: c
                    .fixtures
                    .iter()
                    .filter(|f| f.module.rank() <= max && !found.contains(f.label.as_str()))
                    .map(|f| f.label.clone())
                    .collect(),
                unexpected: ranks
                    .iter()
                    .flat_map(|r| &r.modules)
                    .filter(|m| m.fixture.is_none())
                    .map(|m| m.label.clone())
                    .collect(),
            })
        }
    };
    Ok(ClassificationReport {
        schema: SCHEMA,
        ring: ring.id().to_string(),
        max_rank: results.len(),
        counts: ranks.iter().map(|r| r.count).collect(),
        ranks,
        trace,
        fixture_check,
    })
}

pub fn classification_markdown(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Based modules over {}\n", r.ring);
    let _ = writeln!(s, "| rank | modules | assembled |\n|---|---|---|");
    for sec in &r.ranks {
        let _ = writeln!(s, "| {} | {} | {} |", sec.rank, sec.count, sec.assembled);
    }
    let total: usize = r.counts.iter().sum();
    let _ = writeln!(s, "\nTotal: {total}\n");
    for sec in &r.ranks {
        let _ = writeln!(s, "## Rank {}\n", sec.rank);
        for m in &sec.modules {
            let _ = writeln!(
                s,
                "### {}\n\nirreducible: {}, verified: {}\n",
                m.label, m.irreducible, m.verified
            );
            let _ = writeln!(s, "```");
            for nm in &m.matrices {
                let _ = writeln!(s, "{}:", nm.label);
                for row in &nm.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
                    let _ = writeln!(s, "  {}", cells.join(" "));
                }
            }
            let _ = writeln!(s, "```\n");
        }
    }
    if let Some(fc) = &r.fixture_check {
        let _ = writeln!(s, "## Fixture comparison\n");
        let _ = writeln!(s, "missing: {:?}\n\nunexpected: {:?}\n", fc.missing, fc.unexpected);
    }
    if let Some(trace) = &r.trace {
        let _ = writeln!(s, "## Solver trace\n");
        let _ = writeln!(s, "| rank | stage | inputs | solutions | classes | irreducible |\n|---|---|---|---|---|---|");
        for t in trace {
            let inputs: Vec<String> = t
                .inputs
                .iter()
                .map(|nm| format!("{}={}", nm.label, inline(&IntMatrix::from_rows(&nm.rows).expect("square"))))
                .collect();
            let opt = |o: Option<usize>| o.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                t.rank,
                t.stage,
                inputs.join(", "),
                t.solutions,
                opt(t.classes),
                opt(t.irreducible)
            );
        }
    }
    s
}

fn ring_and_plan(args: &ClassifyArgs) -> Result<(Arc<FusionRing>, SolvePlan, Option<Catalog>), Failure> {
    match (&args.ring, &args.plan, args.builtin) {
        (Some(ring_path), Some(plan_path), None) => {
            let ring = FusionRing::from_str_with_format(&read(ring_path)?, hint(ring_path))
                .map_err(|e| Failure::usage(format!("{}: {e}", ring_path.display())))?;
            let ring = Arc::new(ring);
            let plan = SolvePlan::from_str_with_format(&read(plan_path)?, hint(plan_path), ring.clone())
                .map_err(|e| Failure::usage(format!("{}: {e}", plan_path.display())))?;
            // Fixture labels only make sense for the cataloged ring.
            let catalog = load_catalog().ok().filter(|c| *c.ring == *ring);
            Ok((ring, plan, catalog))
        }
        (None, None, _) => {
            let catalog = load_catalog()?;
            Ok((catalog.ring.clone(), catalog.plan.clone(), Some(catalog)))
        }
        _ => Err(Failure::usage("give --builtin s4 or both --ring and --plan")),
    }
}

pub fn cmd_classify(args: &ClassifyArgs) -> Outcome {
    let (ring, plan, catalog) = ring_and_plan(args)?;
    let results = classify(&ring, args.max_rank, &plan)?;
    let report = classification_report(&ring, &results, catalog.as_ref(), args.trace, args.expect_fixtures)?;
    write_reports(&args.out, "classification", &report, &classification_markdown(&report))?;
    println!(
        "{}: counts {:?} (total {})",
        report.ring,
        report.counts,
        report.counts.iter().sum::<usize>()
    );
    if !report.all_verified() {
        return Err(Failure::check("an emitted module failed verification"));
    }
    if let Some(fc) = &report.fixture_check {
        if !fc.ok() {
            return Err(Failure::check(format!(
                "fixture mismatch: missing {:?}, unexpected {:?}",
                fc.missing, fc.unexpected
            )));
        }
        println!("all fixtures matched");
    }
    Ok(())
}

// categorify ----------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CategorifyOutput<'a> {
    pub schema: u32,
    #[serde(flatten)]
    pub report: &'a CategorificationReport,
    pub all_match: bool,
}

pub fn categorification_markdown(r: &CategorificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Categorification matrix\n");
    let _ = writeln!(s, "| module category | route | standard | swapped | counted |\n|---|---|---|---|---|");
    for job in &r.jobs {
        let cell = |i: usize| {
            let o = &job.outcomes[i];
            let verdict = if o.passes() { "" } else { " (fails checks)" };
            format!("{}{verdict}", o.fixture.as_deref().unwrap_or("reducible"))
        };
        let counted = match (job.counted, job.swap) {
            (false, _) => "no",
            (true, false) => "standard",
            (true, true) => "both",
        };
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", job.name, job.route, cell(0), cell(1), counted);
    }
    let _ = writeln!(s, "\n## Fixtures\n\n| fixture | expected | computed | match |\n|---|---|---|---|");
    for c in &r.comparison {
        let list = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(", ") };
        let mark = if c.matches() { "yes" } else { "NO" };
        let _ = writeln!(s, "| {} | {} | {} | {mark} |", c.label, list(&c.expected), list(&c.computed));
    }
    let _ = writeln!(s, "\n## Tensor rules\n");
    if r.tensor_discrepancies.is_empty() {
        let _ = writeln!(s, "All listed tensor rules agree with the character products.");
    } else {
        for d in &r.tensor_discrepancies {
            let _ = writeln!(s, "- {d}");
        }
    }
    s
}

pub fn cmd_categorify(args: &CategorifyArgs) -> Outcome {
    let catalog = load_catalog()?;
    let report = categorify(&catalog)?;
    let out = CategorifyOutput {
        schema: SCHEMA,
        report: &report,
        all_match: report.all_match(),
    };
    write_reports(&args.out, "categorification", &out, &categorification_markdown(&report))?;
    for job in &report.jobs {
        let o = &job.outcomes[0];
        println!("{} [{}] -> {}", job.name, job.route, o.fixture.as_deref().unwrap_or("reducible"));
    }
    if !report.all_pass() {
        return Err(Failure::check("a computed module is not a based module"));
    }
    if args.check_paper {
        if let Some(c) = report.comparison.iter().find(|c| !c.matches()) {
            return Err(Failure::check(format!(
                "{}: expected {:?}, computed {:?}",
                c.label, c.expected, c.computed
            )));
        }
        if let Some(d) = report.tensor_discrepancies.first() {
            return Err(Failure::check(format!("tensor rule: {d}")));
        }
        println!("categorification matrix matches all fixture lists");
    }
    Ok(())
}

// check ---------------------------------------------------------------------

fn suite_catalog(c: &Catalog) -> Result<String, String> {
    let d = c.tensor_discrepancies().map_err(|e| e.to_string())?;
    if let Some(first) = d.first() {
        return Err(format!("tensor rule: {first}"));
    }
    Ok(format!(
        "{} tables, {} embeddings, {} projective data, {} fixtures",
        c.tables.len(),
        c.embeddings.len(),
        c.projective.len(),
        c.fixtures.len()
    ))
}

fn suite_orthogonality(c: &Catalog) -> Result<String, String> {
    for t in c.tables.values() {
        let r = check_orthogonality(t);
        if !r.is_ok() {
            return Err(format!("{}: {r}", t.id));
        }
        if t.kind == TableKind::DoubleCover {
            let base = t.covers.as_deref().ok_or_else(|| format!("{}: no base group", t.id))?;
            let base = c.table(base).map_err(|e| e.to_string())?;
            check_cover(t, base).map_err(|e| e.to_string())?;
        }
    }
    Ok(format!("{} tables", c.tables.len()))
}

fn suite_cocycle(c: &Catalog) -> Result<String, String> {
    let mut parts = Vec::new();
    for d in c.projective.values() {
        for (label, r) in d.verify() {
            if !r.is_ok() {
                return Err(format!("{} {label}: {r}", d.id));
            }
        }
        let n = d.order();
        parts.push(format!("{}: {} pairs x {} reps", d.id, n * n, d.reps.len()));
    }
    Ok(parts.join(", "))
}

fn suite_based(c: &Catalog) -> Result<String, String> {
    let report = categorify(c).map_err(|e| e.to_string())?;
    let mut n = 0;
    for job in &report.jobs {
        for o in &job.outcomes {
            if !o.passes() {
                return Err(format!("{} ({}) fails", job.name, o.convention));
            }
            n += 1;
        }
    }
    for f in &c.fixtures {
        if !check_representation(&f.module).is_ok() || !check_based(&f.module).is_ok() {
            return Err(format!("fixture {} fails", f.label));
        }
    }
    Ok(format!("{n} computed modules and {} fixtures", c.fixtures.len()))
}

pub fn cmd_check(args: &CheckArgs) -> Outcome {
    let catalog = match load_catalog() {
        Ok(c) => c,
        Err(e) if e.is_input_error() => return Err(e.into()),
        Err(e) => {
            println!("FAIL catalog: {e}");
            return Err(Failure::check(format!("catalog: {e}")));
        }
    };
    let suites: Vec<Suite> = match args.only {
        Some(s) => vec![s],
        None => vec![Suite::Catalog, Suite::Orthogonality, Suite::Cocycle, Suite::Based],
    };
    let mut first = None;
    for s in suites {
        let (name, res) = match s {
            Suite::Catalog => ("catalog", suite_catalog(&catalog)),
            Suite::Orthogonality => ("orthogonality", suite_orthogonality(&catalog)),
            Suite::Cocycle => ("cocycle", suite_cocycle(&catalog)),
            Suite::Based => ("based", suite_based(&catalog)),
        };
        match res {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                println!("FAIL {name}: {msg}");
                first.get_or_insert(format!("{name}: {msg}"));
            }
        }
    }
    match first {
        Some(msg) => Err(Failure::check(msg)),
        None => Ok(()),
    }
}
