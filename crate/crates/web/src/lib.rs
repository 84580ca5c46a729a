//! Browser bindings. Every export takes and returns JSON strings so the page
//! needs no generated types.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use fusionmod::catalog::{categorify, Catalog};
use fusionmod::solver::classify;
use fusionmod::zmodule::{canonical_key, check_based, check_representation, decompose, is_irreducible};
use fusionmod::{BasedModule, IntMatrix};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest rank the page will enumerate.
pub const MAX_RANK: usize = 5;

fn catalog() -> Result<&'static Catalog, String> {
    static CATALOG: OnceLock<Result<Catalog, String>> = OnceLock::new();
    CATALOG
        .get_or_init(|| Catalog::builtin().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

#[derive(Serialize)]
struct ModuleView {
    label: Option<String>,
    rank: usize,
    matrices: BTreeMap<String, Vec<Vec<i64>>>,
}

fn view(m: &BasedModule, label: Option<String>) -> ModuleView {
    let ring = m.ring();
    ModuleView {
        label,
        rank: m.rank(),
        matrices: m
            .matrices()
            .iter()
            .enumerate()
            .map(|(i, x)| (ring.label(i).to_string(), x.rows()))
            .collect(),
    }
}

#[derive(Serialize)]
struct ClassifyView {
    counts: Vec<usize>,
    modules: Vec<ModuleView>,
}

pub fn classify_json(max_rank: usize) -> Result<String, String> {
    if !(1..=MAX_RANK).contains(&max_rank) {
        return Err(format!("rank must be between 1 and {MAX_RANK}"));
    }
    let c = catalog()?;
    let results = classify(&c.ring, max_rank, &c.plan).map_err(|e| e.to_string())?;
    let out = ClassifyView {
        counts: results.iter().map(|r| r.modules.len()).collect(),
        modules: results
            .iter()
            .flat_map(|r| r.modules.iter().zip(&r.keys))
            .map(|(m, k)| view(m, c.lookup_fixture(k).map(|f| f.label.clone())))
            .collect(),
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

/// Input for `analyze_module`: matrices keyed by basis label. The unit may be
/// omitted, and so may rho3, which is then derived as psi * rho2.
#[derive(Deserialize)]
struct ModuleInput {
    matrices: BTreeMap<String, IntMatrix>,
}

#[derive(Serialize)]
struct Analysis {
    module: ModuleView,
    representation: Vec<String>,
    based: Vec<String>,
    irreducible: Option<bool>,
    components: Vec<usize>,
    fixture: Option<String>,
    key: Vec<i64>,
}

fn assemble(input: ModuleInput) -> Result<BasedModule, String> {
    let c = catalog()?;
    let ring = &c.ring;
    let mut mats = input.matrices;
    for label in mats.keys() {
        ring.index_of(label).map_err(|e| e.to_string())?;
    }
    let rank = mats.values().next().ok_or("no matrices given")?.dim();
    if mats.values().any(|m| m.dim() != rank) {
        return Err("matrices must all have the same size".into());
    }
    let unit = ring.label(ring.unit()).to_string();
    mats.entry(unit).or_insert_with(|| IntMatrix::identity(rank));
    let missing: Vec<&str> = ring.labels().iter().filter(|l| !mats.contains_key(*l)).map(String::as_str).collect();
    if missing == ["rho3"] {
        let solved: Vec<IntMatrix> = ["psi", "rho1", "rho2"].iter().map(|l| mats[*l].clone()).collect();
        return c.plan.assemble(&solved).map_err(|e| e.to_string());
    }
    if !missing.is_empty() {
        return Err(format!("missing matrices: {}", missing.join(", ")));
    }
    let ordered = ring.labels().iter().map(|l| mats[l].clone()).collect();
    BasedModule::new(ring.clone(), ordered).map_err(|e| e.to_string())
}

pub fn analyze_json(input: &str) -> Result<String, String> {
    let parsed: ModuleInput = serde_json::from_str(input).map_err(|e| format!("bad JSON: {e}"))?;
    let m = assemble(parsed)?;
    let rep = check_representation(&m);
    let based = check_based(&m);
    let lines = |s: String| if s == "ok" { Vec::new() } else { s.lines().map(str::to_string).collect() };
    let valid = rep.is_ok() && based.is_ok();
    let (irreducible, components) = if valid {
        let parts = decompose(&m).map_err(|e| e.to_string())?;
        (
            Some(is_irreducible(&m).map_err(|e| e.to_string())?),
            parts.iter().map(BasedModule::rank).collect(),
        )
    } else {
        (None, Vec::new())
    };
    let key = canonical_key(&m);
    let fixture = catalog()?.lookup_fixture(&key).map(|f| f.label.clone());
    let out = Analysis {
        module: view(&m, fixture.clone()),
        representation: lines(rep.to_string()),
        based: lines(based.to_string()),
        irreducible,
        components,
        fixture,
        key: key.flat,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct Row {
    name: String,
    route: String,
    standard: Option<String>,
    swapped: Option<String>,
    counted: bool,
}

#[derive(Serialize)]
struct CategorifyView {
    rows: Vec<Row>,
    fixtures: Vec<(String, Vec<String>, bool)>,
    all_match: bool,
}

pub fn categorify_json() -> Result<String, String> {
    let report = categorify(catalog()?).map_err(|e| e.to_string())?;
    let out = CategorifyView {
        rows: report
            .jobs
            .iter()
            .map(|j| Row {
                name: j.name.clone(),
                route: j.route.clone(),
                standard: j.outcomes[0].fixture.clone(),
                swapped: j.outcomes[1].fixture.clone(),
                counted: j.counted,
            })
            .collect(),
        fixtures: report
            .comparison
            .iter()
            .map(|c| (c.label.clone(), c.computed.clone(), c.matches()))
            .collect(),
        all_match: report.all_match(),
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[wasm_bindgen(js_name = classify)]
pub fn classify_js(max_rank: usize) -> Result<String, JsValue> {
    classify_json(max_rank).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = analyzeModule)]
pub fn analyze_module_js(input: &str) -> Result<String, JsValue> {
    analyze_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = categorify)]
pub fn categorify_js() -> Result<String, JsValue> {
    categorify_json().map_err(|e| JsValue::from_str(&e))
}
