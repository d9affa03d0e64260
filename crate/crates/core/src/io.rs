//! JSON model files.
//!
//! Every file is `{"format_version": 1, "kind": ..., "model": {...}}`.
//! Rationals are `"num/den"` strings, contexts are comma-joined measurement
//! names, and events are `m=o` pairs joined by commas.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ontomodel::OntologicalModel;
use crate::prepscen::{PreparationModel, PreparationScenario};
use crate::probcore::{Assignment, Context, Dist, EmpiricalModel, Label, MeasurementScenario};
use crate::properties::Property;
use crate::quantum::{Basis, DEFAULT_MAX_DENOMINATOR};
use crate::rational::RationalStr;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid model: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoBasis {
    Z,
    X,
}

impl From<DemoBasis> for Basis {
    fn from(b: DemoBasis) -> Basis {
        match b {
            DemoBasis::Z => Basis::Z,
            DemoBasis::X => Basis::X,
        }
    }
}

fn default_max_denominator() -> u64 {
    DEFAULT_MAX_DENOMINATOR
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "demo", rename_all = "lowercase", deny_unknown_fields)]
pub enum DemoConfig {
    Epr,
    Steering {
        basis: DemoBasis,
    },
    Chsh {
        #[serde(default = "default_max_denominator")]
        max_denominator: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Empirical(EmpiricalModel),
    Ontological(OntologicalModel),
    Preparation(PreparationModel),
    Property(Property),
    QuantumDemoConfig(DemoConfig),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Empirical(_) => "empirical",
            Model::Ontological(_) => "ontological",
            Model::Preparation(_) => "preparation",
            Model::Property(_) => "property",
            Model::QuantumDemoConfig(_) => "quantum-demo-config",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFile {
    format_version: u64,
    kind: String,
    model: Value,
}

type Table = BTreeMap<String, RationalStr>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireScenario {
    outcomes: BTreeMap<Label, Vec<Label>>,
    cover: Vec<Vec<Label>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEmpirical {
    scenario: WireScenario,
    tables: BTreeMap<String, Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireOntological {
    scenario: WireScenario,
    preparations: Vec<Label>,
    ontic_space: Vec<Label>,
    prep_dists: BTreeMap<Label, Table>,
    responses: BTreeMap<Label, BTreeMap<String, Table>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireProperty {
    ontic_space: Vec<Label>,
    values: Vec<Label>,
    f: BTreeMap<Label, Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePreparation {
    sites: Vec<Label>,
    preparations: BTreeMap<Label, Vec<Label>>,
    ontic_spaces: BTreeMap<Label, Vec<Label>>,
    tables: BTreeMap<String, Table>,
}

fn invariant(e: impl std::fmt::Display) -> IoError {
    IoError::InvariantViolation(e.to_string())
}

fn typed<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, IoError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{inner}")
        };
        IoError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

fn dist<T: Ord + Clone>(
    table: Table,
    mut key: impl FnMut(&str) -> Result<T, IoError>,
    what: &str,
) -> Result<Dist<T>, IoError> {
    let mut cells = Vec::new();
    for (k, v) in table {
        cells.push((key(&k)?, v.0));
    }
    Dist::new(cells).map_err(|e| IoError::InvariantViolation(format!("{what}: {e}")))
}

fn label_dist(table: Table, what: &str) -> Result<Dist<Label>, IoError> {
    dist(table, |k| Ok(k.to_string()), what)
}

fn event_dist(table: Table, what: &str) -> Result<Dist<Assignment>, IoError> {
    dist(
        table,
        |k| Assignment::parse(k).map_err(|e| invariant(format!("{what}: event {k:?}: {e}"))),
        what,
    )
}

fn context(s: &str) -> Result<Context, IoError> {
    Context::parse(s).map_err(|e| invariant(format!("context {s:?}: {e}")))
}

fn scenario(w: WireScenario) -> Result<MeasurementScenario, IoError> {
    let cover = w
        .cover
        .into_iter()
        .map(|c| Context::new(c).map_err(invariant))
        .collect::<Result<Vec<_>, _>>()?;
    MeasurementScenario::new(w.outcomes, cover).map_err(invariant)
}

fn empirical(w: WireEmpirical) -> Result<EmpiricalModel, IoError> {
    let s = scenario(w.scenario)?;
    let mut tables = BTreeMap::new();
    for (c, t) in w.tables {
        let ctx = context(&c)?;
        tables.insert(ctx, event_dist(t, &format!("table {c}"))?);
    }
    EmpiricalModel::new(s, tables).map_err(invariant)
}

fn ontological(w: WireOntological) -> Result<OntologicalModel, IoError> {
    let s = scenario(w.scenario)?;
    let mut prep_dists = BTreeMap::new();
    for (p, t) in w.prep_dists {
        let d = label_dist(t, &format!("preparation {p}"))?;
        prep_dists.insert(p, d);
    }
    let mut responses = BTreeMap::new();
    for (state, per_ctx) in w.responses {
        for (c, t) in per_ctx {
            let d = event_dist(t, &format!("response of {state} in {c}"))?;
            responses.insert((state.clone(), context(&c)?), d);
        }
    }
    OntologicalModel::new(s, w.preparations, w.ontic_space, prep_dists, responses).map_err(invariant)
}

fn property(w: WireProperty) -> Result<Property, IoError> {
    let mut f = BTreeMap::new();
    for (s, t) in w.f {
        let d = label_dist(t, &format!("state {s}"))?;
        f.insert(s, d);
    }
    Property::new(w.ontic_space, w.values, f).map_err(invariant)
}

fn split(s: &str) -> Vec<Label> {
    s.split(',').map(str::to_string).collect()
}

fn preparation(w: WirePreparation) -> Result<PreparationModel, IoError> {
    let sc = PreparationScenario::new(w.sites, w.preparations, w.ontic_spaces).map_err(invariant)?;
    let mut tables = BTreeMap::new();
    for (jp, t) in w.tables {
        let d = dist(t, |k| Ok(split(k)), &format!("joint preparation {jp}"))?;
        tables.insert(split(&jp), d);
    }
    PreparationModel::new(sc, tables).map_err(invariant)
}

/// Parses and validates a model file.
pub fn parse_model_file(bytes: &[u8]) -> Result<Model, IoError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| {
        if e.is_syntax() || e.is_eof() || e.is_io() {
            IoError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            IoError::Schema {
                path: ".".into(),
                message: e.to_string(),
            }
        }
    })?;
    let file: WireFile = typed(value, "")?;
    if file.format_version != FORMAT_VERSION {
        return Err(IoError::Schema {
            path: "format_version".into(),
            message: format!("unsupported version {}, expected {FORMAT_VERSION}", file.format_version),
        });
    }
    match file.kind.as_str() {
        "empirical" => empirical(typed(file.model, "model")?).map(Model::Empirical),
        "ontological" => ontological(typed(file.model, "model")?).map(Model::Ontological),
        "preparation" => preparation(typed(file.model, "model")?).map(Model::Preparation),
        "property" => property(typed(file.model, "model")?).map(Model::Property),
        "quantum-demo-config" => typed(file.model, "model").map(Model::QuantumDemoConfig),
        other => Err(IoError::Schema {
            path: "kind".into(),
            message: format!(
                "unknown kind {other:?}; expected empirical, ontological, preparation, property or quantum-demo-config"
            ),
        }),
    }
}

fn rational_table<K: std::fmt::Display + Ord + Clone>(d: &Dist<K>) -> Value {
    Value::Object(
        d.iter()
            .map(|(k, w)| (k.to_string(), Value::String(w.to_string())))
            .collect(),
    )
}

pub fn scenario_json(s: &MeasurementScenario) -> Value {
    json!({
        "outcomes": s.outcome_map(),
        "cover": s.cover().iter().map(|c| c.measurements().to_vec()).collect::<Vec<_>>(),
    })
}

pub fn empirical_json(e: &EmpiricalModel) -> Value {
    let tables: serde_json::Map<String, Value> = e
        .scenario()
        .cover()
        .iter()
        .map(|c| (c.to_string(), rational_table(e.table(c).expect("every context"))))
        .collect();
    json!({ "scenario": scenario_json(e.scenario()), "tables": tables })
}

pub fn ontological_json(h: &OntologicalModel) -> Value {
    let prep_dists: serde_json::Map<String, Value> = h
        .prep_dists()
        .iter()
        .map(|(p, d)| (p.clone(), rational_table(d)))
        .collect();
    let mut responses = serde_json::Map::new();
    for ((s, c), d) in h.responses() {
        responses
            .entry(s.clone())
            .or_insert_with(|| json!({}))
            .as_object_mut()
            .expect("object")
            .insert(c.to_string(), rational_table(d));
    }
    json!({
        "scenario": scenario_json(h.scenario()),
        "preparations": h.preparations(),
        "ontic_space": h.ontic_space(),
        "prep_dists": prep_dists,
        "responses": responses,
    })
}

pub fn property_json(p: &Property) -> Value {
    let f: serde_json::Map<String, Value> = p.map().iter().map(|(s, d)| (s.clone(), rational_table(d))).collect();
    json!({ "ontic_space": p.ontic_space(), "values": p.values(), "f": f })
}

pub fn preparation_json(m: &PreparationModel) -> Value {
    serde_json::to_value(m).expect("serializable")
}

pub fn model_json(m: &Model) -> Value {
    let body = match m {
        Model::Empirical(e) => empirical_json(e),
        Model::Ontological(h) => ontological_json(h),
        Model::Preparation(p) => preparation_json(p),
        Model::Property(p) => property_json(p),
        Model::QuantumDemoConfig(c) => serde_json::to_value(c).expect("serializable"),
    };
    json!({ "format_version": FORMAT_VERSION, "kind": m.kind(), "model": body })
}

/// Pretty-printed file contents with a trailing newline.
pub fn to_file_string(m: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&model_json(m)).expect("serializable");
    s.push('\n');
    s
}
