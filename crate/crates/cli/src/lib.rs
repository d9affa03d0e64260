//! The `ontolab` command line. [`run`] does everything except touching the
//! process streams, so tests can drive it directly.

#![allow(clippy::result_large_err)]

pub mod fixtures;
pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ontolab_core::io::{model_json, parse_model_file, to_file_string, DemoBasis, DemoConfig, IoError, Model};
use ontolab_core::localdecide::{decide_local_with, DecideError, DecideOptions, LocalDecision, DEFAULT_CAP};
use ontolab_core::ontomodel::{
    canonicalize, factorizes, is_deterministic, is_local, is_parameter_independent, onticity_report, Onticity,
    OntologicalModel,
};
use ontolab_core::prepscen::{
    is_no_preparation_signalling, is_preparation_independent, overlap_event_probability, PreparationModel,
};
use ontolab_core::probcore::{check_no_signalling, EmpiricalModel, Label};
use ontolab_core::properties::{bayes_invert, classify, supports_overlap, Classification, Property};
use ontolab_core::quantum::{
    born_ket, chsh_measurements, observable_epistemicity, quantum_empirical_model, rationalize, remote_state,
    schmidt_coefficients, steering_demo, Basis, DensityMatrix, Epistemicity, Ket, Observable, Povm, Tensor,
    DEFAULT_MAX_DENOMINATOR,
};
use ontolab_core::rational::{format_rational, parse_rational, to_f64, Rational};
use ontolab_core::zoo;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use report::{Report, Status, Verdict, EXIT_FAILED, EXIT_INPUT, EXIT_NONLOCAL, EXIT_OK};

/// Steering and EPR checks compare floats at this tolerance.
pub const STATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "ontolab",
    version,
    about = "Exact analysis of ontological models, locality and preparation scenarios"
)]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Omit witnesses and artifacts from text reports.
    #[arg(long, global = true)]
    brief: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Model file, or zoo:NAME for a built-in model.
    input: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model file.
    Validate(Input),
    /// No-signalling of an empirical model, of each preparation of an
    /// ontological model, or no-preparation-signalling.
    CheckNs(Input),
    /// Decide locality by LP feasibility; prints a witness or a certificate.
    DecideLocal {
        #[command(flatten)]
        input: Input,
        /// Refuse scenarios with more global assignments than this.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Ontic or epistemic, with the support-overlap cross-check.
    ClassifyProperty(Input),
    /// Determinism, parameter independence and per-measurement onticity.
    OntoReport(Input),
    /// Canonical local form of an ontological model.
    Canonicalize(Input),
    /// No-preparation-signalling, preparation independence and the overlap
    /// event probability.
    PrepCheck {
        #[command(flatten)]
        input: Input,
        /// Overlap region of one site, e.g. `A=Δ`. Defaults to the first
        /// ontic state of every site.
        #[arg(long = "region", value_name = "SITE=STATE,...")]
        regions: Vec<String>,
    },
    /// The two-site overlap model with site-wise overlap mass q, and its
    /// analysis.
    Pbr {
        #[arg(long, value_name = "NUM/DEN", value_parser = parse_q)]
        q: Option<Rational>,
    },
    /// Quantum demonstrations.
    Demo {
        #[command(subcommand)]
        demo: DemoCommand,
    },
    /// Built-in models.
    Zoo {
        #[command(subcommand)]
        zoo: ZooCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BasisArg {
    Z,
    X,
}

impl From<BasisArg> for DemoBasis {
    fn from(b: BasisArg) -> DemoBasis {
        match b {
            BasisArg::Z => DemoBasis::Z,
            BasisArg::X => DemoBasis::X,
        }
    }
}

#[derive(Debug, Subcommand)]
enum DemoCommand {
    /// Perfect Z and X correlations of |φ+⟩ and the remote states they imply.
    Epr,
    /// Remote ensembles steered by measuring the first qubit of |φ+⟩.
    Steering {
        #[arg(long, value_enum)]
        basis: BasisArg,
    },
    /// Rationalized CHSH statistics of |φ+⟩ and their locality verdict.
    Chsh {
        #[arg(long, default_value_t = DEFAULT_MAX_DENOMINATOR)]
        max_denominator: u64,
    },
    /// Run the demo described by a quantum-demo-config file.
    Run(Input),
}

#[derive(Debug, Subcommand)]
enum ZooCommand {
    /// Names and descriptions.
    List,
    /// Print a model file.
    Export {
        name: String,
        #[arg(long, value_name = "NUM/DEN", value_parser = parse_q)]
        q: Option<Rational>,
    },
}

fn parse_q(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{0}")]
    Read(String),
    #[error("{input}: {source}")]
    Parse { input: String, source: IoError },
    #[error("{command} does not accept {kind} models")]
    WrongKind { command: &'static str, kind: &'static str },
    #[error(transparent)]
    Zoo(#[from] zoo::ZooError),
    #[error(transparent)]
    Decide(DecideError),
    #[error("{0}")]
    Usage(String),
}

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_INPUT,
                }
            } else {
                Output {
                    stdout: text,
                    stderr: String::new(),
                    code: EXIT_OK,
                }
            };
        }
    };
    let json = cli.json;
    match dispatch(cli.command) {
        Ok(Done::Report(r)) => Output {
            stdout: if json { r.to_json() } else { r.to_text(cli.brief) },
            stderr: String::new(),
            code: r.exit_code,
        },
        Ok(Done::Raw(s)) => Output {
            stdout: s,
            stderr: String::new(),
            code: EXIT_OK,
        },
        Err(e) => Output {
            stdout: if json {
                let mut s = serde_json::to_string_pretty(&json!({"error": e.to_string(), "exit_code": EXIT_INPUT}))
                    .expect("serializable");
                s.push('\n');
                s
            } else {
                String::new()
            },
            stderr: format!("error: {e}\n"),
            code: EXIT_INPUT,
        },
    }
}

enum Done {
    Report(Report),
    Raw(String),
}

/// Reads a model from a path or a `zoo:NAME` pseudo-path.
pub fn load_model(input: &str) -> Result<Model, InputError> {
    let bytes = match input.strip_prefix("zoo:") {
        Some(name) => fixtures::load(name).map_err(InputError::Read)?,
        None => std::fs::read(input).map_err(|e| InputError::Read(format!("cannot read {input}: {e}")))?,
    };
    parse_model_file(&bytes).map_err(|source| InputError::Parse {
        input: input.to_string(),
        source,
    })
}

fn dispatch(cmd: Command) -> Result<Done, InputError> {
    let report = match cmd {
        Command::Validate(i) => validate(&i.input)?,
        Command::CheckNs(i) => check_ns(&i.input)?,
        Command::DecideLocal { input, cap } => decide_local_cmd(&input.input, cap)?,
        Command::ClassifyProperty(i) => classify_property(&i.input)?,
        Command::OntoReport(i) => onto_report(&i.input)?,
        Command::Canonicalize(i) => canonicalize_cmd(&i.input)?,
        Command::PrepCheck { input, regions } => prep_check(&input.input, &regions)?,
        Command::Pbr { q } => pbr(q)?,
        Command::Demo { demo } => match demo {
            DemoCommand::Epr => demo_report(&DemoConfig::Epr, None)?,
            DemoCommand::Steering { basis } => demo_report(&DemoConfig::Steering { basis: basis.into() }, None)?,
            DemoCommand::Chsh { max_denominator } => demo_report(&DemoConfig::Chsh { max_denominator }, None)?,
            DemoCommand::Run(i) => match load_model(&i.input)? {
                Model::QuantumDemoConfig(c) => demo_report(&c, Some(&i.input))?,
                m => return Err(wrong("demo run", &m)),
            },
        },
        Command::Zoo { zoo } => return zoo_cmd(zoo),
    };
    Ok(Done::Report(report.finish()))
}

fn wrong(command: &'static str, m: &Model) -> InputError {
    InputError::WrongKind {
        command,
        kind: m.kind(),
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn validate(input: &str) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let mut r = Report::new("validate", Some(input));
    let summary = match &m {
        Model::Empirical(e) => format!("empirical model, {} contexts", e.scenario().cover().len()),
        Model::Ontological(h) => format!(
            "ontological model, {} ontic states, {} preparations",
            h.ontic_space().len(),
            h.preparations().len()
        ),
        Model::Preparation(p) => format!("preparation model, {} sites", p.scenario().sites().len()),
        Model::Property(p) => format!(
            "property, {} ontic states, {} values",
            p.ontic_space().len(),
            p.values().len()
        ),
        Model::QuantumDemoConfig(_) => "quantum demo configuration".to_string(),
    };
    r.check("valid", || (Status::Pass, summary, json!({ "kind": m.kind() })));
    Ok(r)
}

fn no_signalling_check(r: &mut Report, name: String, e: &EmpiricalModel) {
    r.check(name, || match check_no_signalling(e) {
        Ok(()) => (
            Status::Pass,
            "every marginal is context-independent".into(),
            Value::Null,
        ),
        Err(w) => (
            Status::Fail,
            format!(
                "marginal of {} differs between {} and {}",
                w.measurement, w.contexts.0, w.contexts.1
            ),
            to_value(&w),
        ),
    });
}

fn nps_check(r: &mut Report, m: &PreparationModel) {
    r.check("no-preparation-signalling", || match is_no_preparation_signalling(m) {
        Ok(()) => (
            Status::Pass,
            "site marginals ignore the other sites' preparations".into(),
            Value::Null,
        ),
        Err(w) => (
            Status::Fail,
            format!(
                "site {} prepared in {} depends on the other sites",
                w.site, w.preparation
            ),
            to_value(&w),
        ),
    });
}

fn check_ns(input: &str) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let mut r = Report::new("check-ns", Some(input));
    match &m {
        Model::Empirical(e) => no_signalling_check(&mut r, "no-signalling".into(), e),
        Model::Ontological(h) => {
            for p in h.preparations() {
                let e = operational(h, p);
                no_signalling_check(&mut r, format!("no-signalling[{p}]"), &e);
            }
        }
        Model::Preparation(p) => nps_check(&mut r, p),
        _ => return Err(wrong("check-ns", &m)),
    }
    Ok(r)
}

fn operational(h: &OntologicalModel, p: &str) -> EmpiricalModel {
    h.operational_probabilities(p).expect("preparation of the model")
}

fn locality_check(r: &mut Report, name: String, e: &EmpiricalModel, opts: &DecideOptions) -> Result<(), InputError> {
    if let Err(w) = check_no_signalling(e) {
        let summary = format!("signalling on {}; locality is moot", w.measurement);
        r.check(name, || (Status::Fail, summary, to_value(&w)));
        return Ok(());
    }
    let mut result = Ok(());
    r.check(name, || match decide_local_with(e, opts) {
        Ok(d) => {
            let detail = to_value(&d);
            match d {
                LocalDecision::Local { witness } => {
                    let n = witness.dist.support_size();
                    (
                        Status::Pass,
                        format!("local: mixture of {n} global assignments"),
                        detail,
                    )
                }
                LocalDecision::Nonlocal { certificate } => {
                    let summary = format!(
                        "non-local: inequality value {} exceeds local bound {}",
                        format_rational(&certificate.model_value),
                        format_rational(&certificate.local_bound)
                    );
                    (Status::NonLocal, summary, detail)
                }
            }
        }
        Err(e) => {
            let summary = e.to_string();
            result = Err(InputError::Decide(e));
            (Status::Fail, summary, Value::Null)
        }
    });
    result
}

fn decide_local_cmd(input: &str, cap: u128) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let opts = DecideOptions { cap };
    let mut r = Report::new("decide-local", Some(input));
    match &m {
        Model::Empirical(e) => locality_check(&mut r, "locality".into(), e, &opts)?,
        Model::Ontological(h) => {
            for p in h.preparations() {
                locality_check(&mut r, format!("locality[{p}]"), &operational(h, p), &opts)?;
            }
        }
        _ => return Err(wrong("decide-local", &m)),
    }
    Ok(r)
}

fn property_checks(r: &mut Report, p: &Property) {
    let class = classify(p);
    let ontic = class.is_ontic();
    r.check("classification", || match &class {
        Classification::Ontic { .. } => (
            Status::Pass,
            "ontic: every state fixes the value".into(),
            to_value(&class),
        ),
        Classification::Epistemic { state, values } => (
            Status::Fail,
            format!("epistemic: {state} is compatible with {} and {}", values.0, values.1),
            to_value(&class),
        ),
    });
    let overlap = bayes_invert(p, None).map(|fam| supports_overlap(&fam));
    r.check("support-overlap", || match &overlap {
        Ok(None) => (Status::Pass, "posterior supports are disjoint".into(), Value::Null),
        Ok(Some(o)) => (
            Status::Fail,
            format!("posteriors of {} and {} share {}", o.values.0, o.values.1, o.state),
            to_value(o),
        ),
        Err(e) => (Status::Fail, e.to_string(), Value::Null),
    });
    let agree = matches!(&overlap, Ok(o) if o.is_none() == ontic);
    r.check("criteria-agree", || {
        if agree {
            (
                Status::Pass,
                "classification matches support disjointness".into(),
                Value::Null,
            )
        } else {
            (
                Status::Fail,
                "classification and support overlap disagree".into(),
                Value::Null,
            )
        }
    });
}

fn classify_property(input: &str) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let Model::Property(p) = &m else {
        return Err(wrong("classify-property", &m));
    };
    let mut r = Report::new("classify-property", Some(input));
    property_checks(&mut r, p);
    Ok(r)
}

fn onto_report(input: &str) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let Model::Ontological(h) = &m else {
        return Err(wrong("onto-report", &m));
    };
    let mut r = Report::new("onto-report", Some(input));
    r.check("deterministic", || match is_deterministic(h) {
        Ok(()) => (Status::Pass, "every response is a point mass".into(), Value::Null),
        Err(w) => (
            Status::Fail,
            format!("response at ({}, {}) is spread", w.state, w.context),
            to_value(&w),
        ),
    });
    r.check("parameter-independent", || match is_parameter_independent(h) {
        Ok(()) => (
            Status::Pass,
            "per-state marginals are context-independent".into(),
            Value::Null,
        ),
        Err(w) => (
            Status::Fail,
            format!("marginal of {} at {} depends on the context", w.measurement, w.state),
            to_value(&w),
        ),
    });
    r.check("factorizes", || match factorizes(h) {
        Ok(()) => (
            Status::Pass,
            "every response is a product of its marginals".into(),
            Value::Null,
        ),
        Err(w) => (
            Status::Fail,
            format!(
                "({}, {}) at {}: {} vs product {}",
                w.state,
                w.context,
                w.event,
                format_rational(&w.actual),
                format_rational(&w.product)
            ),
            to_value(&w),
        ),
    });
    r.check("local", || match is_local(h) {
        Ok(()) => (
            Status::Pass,
            "deterministic and parameter-independent".into(),
            Value::Null,
        ),
        Err(w) => (Status::Fail, w.to_string(), to_value(&w)),
    });
    for (meas, o) in onticity_report(h) {
        let summary = match &o {
            Onticity::Ontic { .. } => "ontic".to_string(),
            Onticity::Epistemic { state, values } => {
                format!("epistemic: {state} is compatible with {} and {}", values.0, values.1)
            }
            Onticity::Undefined { witness } => {
                format!("undefined: marginal at {} depends on the context", witness.state)
            }
        };
        let status = if o.is_ontic() { Status::Pass } else { Status::Fail };
        r.check(format!("onticity[{meas}]"), || (status, summary, to_value(&o)));
    }
    Ok(r)
}

fn canonicalize_cmd(input: &str) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let Model::Ontological(h) = &m else {
        return Err(wrong("canonicalize", &m));
    };
    let mut r = Report::new("canonicalize", Some(input));
    let c = match canonicalize(h) {
        Ok(c) => c,
        Err(e) => {
            let detail = match is_local(h) {
                Err(w) => to_value(&w),
                Ok(()) => Value::Null,
            };
            r.check("canonical-form", || (Status::Fail, e.to_string(), detail));
            return Ok(r);
        }
    };
    let weights: BTreeMap<&Label, Value> = c.weights().iter().map(|(p, d)| (p, to_value(d))).collect();
    let n: usize = c.weights().values().map(|d| d.support_size()).sum();
    r.check("canonical-form", || {
        (Status::Pass, format!("{n} weighted global assignments"), Value::Null)
    });
    r.check("statistics-preserved", || {
        let bad = h
            .preparations()
            .iter()
            .find(|p| c.operational_probabilities(p).ok().as_ref() != Some(&operational(h, p)));
        match bad {
            None => (Status::Pass, "operational tables agree exactly".into(), Value::Null),
            Some(p) => (Status::Fail, format!("tables differ for preparation {p}"), Value::Null),
        }
    });
    r.artifact("canonical", json!({ "weights": weights }));
    Ok(r)
}

fn parse_regions(m: &PreparationModel, args: &[String]) -> Result<BTreeMap<Label, Vec<Label>>, InputError> {
    let sc = m.scenario();
    let mut regions: BTreeMap<Label, Vec<Label>> = sc
        .sites()
        .iter()
        .map(|s| (s.clone(), vec![sc.ontic_space(s).expect("site")[0].clone()]))
        .collect();
    for a in args {
        let (site, states) = a
            .split_once('=')
            .ok_or_else(|| InputError::Usage(format!("--region {a:?}: expected SITE=STATE,...")))?;
        if !regions.contains_key(site) {
            return Err(InputError::Usage(format!("--region: unknown site {site}")));
        }
        regions.insert(site.to_string(), states.split(',').map(str::to_string).collect());
    }
    Ok(regions)
}

fn preparation_checks(
    r: &mut Report,
    m: &PreparationModel,
    regions: &BTreeMap<Label, Vec<Label>>,
) -> Result<(), InputError> {
    nps_check(r, m);
    r.check("preparation-independence", || match is_preparation_independent(m) {
        Ok(()) => (
            Status::Pass,
            "every joint table is a product of site marginals".into(),
            Value::Null,
        ),
        Err(w) => {
            let summary = match &w {
                ontolab_core::prepscen::IndependenceFailure::Signalling(s) => {
                    format!("site {} signals; marginals undefined", s.site)
                }
                ontolab_core::prepscen::IndependenceFailure::NotFactorizable {
                    joint_preparation,
                    joint_state,
                    actual,
                    product,
                } => format!(
                    "at ({}) under ({}): {} vs product {}",
                    joint_state.join(","),
                    joint_preparation.join(","),
                    format_rational(actual),
                    format_rational(product)
                ),
            };
            (Status::Fail, summary, to_value(&w))
        }
    });
    let probs = overlap_event_probability(m, regions).map_err(|e| InputError::Usage(e.to_string()))?;
    let region_text: Vec<String> = regions
        .iter()
        .map(|(s, r)| format!("{s}∈{{{}}}", r.join(",")))
        .collect();
    let max = probs.values().max().cloned().unwrap_or_default();
    let detail: BTreeMap<String, String> = probs.iter().map(|(jp, p)| (jp.join(","), format_rational(p))).collect();
    r.check("overlap-event", || {
        (
            Status::Info,
            format!(
                "P({}) is at most {} over joint preparations",
                region_text.join(" and "),
                format_rational(&max)
            ),
            json!({ "regions": regions, "probabilities": detail }),
        )
    });
    Ok(())
}

fn prep_check(input: &str, regions: &[String]) -> Result<Report, InputError> {
    let m = load_model(input)?;
    let Model::Preparation(p) = &m else {
        return Err(wrong("prep-check", &m));
    };
    let regions = parse_regions(p, regions)?;
    let mut r = Report::new("prep-check", Some(input));
    preparation_checks(&mut r, p, &regions)?;
    Ok(r)
}

/// Every joint table with all joint states listed, zeros included.
pub fn full_tables(m: &PreparationModel) -> BTreeMap<String, BTreeMap<String, String>> {
    let states = m.scenario().joint_states();
    m.tables()
        .iter()
        .map(|(jp, d)| {
            let row = states
                .iter()
                .map(|st| (st.join(","), format_rational(&d.weight(st))))
                .collect();
            (jp.join(","), row)
        })
        .collect()
}

fn pbr(q: Option<Rational>) -> Result<Report, InputError> {
    let q = q.unwrap_or_else(zoo::default_q);
    let m = match zoo::model("pbr-q", Some(&q))? {
        Model::Preparation(m) => m,
        _ => unreachable!("pbr-q is a preparation model"),
    };
    let mut r = Report::new("pbr", None);
    let regions = parse_regions(&m, &[])?;
    preparation_checks(&mut r, &m, &regions)?;
    r.artifact("q", Value::String(format_rational(&q)));
    r.artifact("tables", to_value(&full_tables(&m)));
    r.artifact("model", model_json(&Model::Preparation(m)));
    Ok(r)
}

fn rationalized(probs: &[(Label, f64)], max_den: u64) -> Value {
    match rationalize(probs, max_den) {
        Ok(d) => to_value(&d),
        Err(e) => Value::String(e.to_string()),
    }
}

fn correlation_check(r: &mut Report, name: &str, m: &Povm) {
    let probs = born_ket(&Ket::phi_plus(), &m.tensor(m)).expect("two-qubit measurement");
    let same: f64 = probs
        .iter()
        .filter(|(l, _)| {
            let (a, b) = l.split_once(',').expect("joint label");
            a.split_once('=').map(|x| x.1) == b.split_once('=').map(|x| x.1)
        })
        .map(|(_, p)| p)
        .sum();
    r.check(name, || {
        let status = if (same - 1.0).abs() <= STATE_TOLERANCE {
            Status::Pass
        } else {
            Status::Fail
        };
        (
            status,
            format!("P(equal outcomes) = {same}"),
            rationalized(&probs, DEFAULT_MAX_DENOMINATOR),
        )
    });
}

fn steering_checks(r: &mut Report, basis: Basis) {
    let branches = steering_demo(basis);
    let (tag, expected) = match basis {
        Basis::Z => ("z", [Ket::zero(), Ket::one()]),
        Basis::X => ("x", [Ket::plus(), Ket::minus()]),
    };
    let worst = branches
        .iter()
        .zip(&expected)
        .map(|(b, k)| b.remote.fidelity(k))
        .fold(f64::INFINITY, f64::min);
    r.check(format!("remote-fidelity[{tag}]"), || {
        let status = if worst >= 1.0 - STATE_TOLERANCE {
            Status::Pass
        } else {
            Status::Fail
        };
        (
            status,
            format!("minimum fidelity to the expected remote states {worst}"),
            to_value(&branches),
        )
    });
    let rho = remote_state(&branches).expect("branch probabilities sum to one");
    let d = rho.distance(&DensityMatrix::maximally_mixed(2));
    r.check(format!("reduced-state[{tag}]"), || {
        let status = if d <= STATE_TOLERANCE {
            Status::Pass
        } else {
            Status::Fail
        };
        (status, format!("distance to I/2 is {d:e}"), Value::Null)
    });
}

fn demo_report(config: &DemoConfig, input: Option<&str>) -> Result<Report, InputError> {
    Ok(match config {
        DemoConfig::Epr => {
            let mut r = Report::new("demo epr", input);
            let phi = Ket::phi_plus();
            let schmidt = schmidt_coefficients(&phi, 2, 2).expect("two qubits");
            r.check("schmidt", || {
                (
                    Status::Info,
                    format!("Schmidt coefficients {schmidt:?}"),
                    to_value(&schmidt),
                )
            });
            correlation_check(&mut r, "correlation[z]", &Povm::z("m"));
            correlation_check(&mut r, "correlation[x]", &Povm::x("m"));
            steering_checks(&mut r, Basis::Z);
            steering_checks(&mut r, Basis::X);
            let e = observable_epistemicity(&Ket::plus(), &Observable::pauli_z());
            r.check("epistemicity[+,Z]", || epistemicity_verdict(&e));
            r
        }
        DemoConfig::Steering { basis } => {
            let mut r = Report::new("demo steering", input);
            steering_checks(&mut r, (*basis).into());
            r
        }
        DemoConfig::Chsh { max_denominator } => {
            let mut r = Report::new("demo chsh", input);
            let e = quantum_empirical_model(&Ket::phi_plus(), &chsh_measurements(), *max_denominator)
                .map_err(|e| InputError::Usage(e.to_string()))?;
            let value = chsh_value(&e);
            r.check("chsh-value", || {
                let status = if value > 2.0 { Status::Pass } else { Status::Fail };
                (status, format!("E00 + E01 + E10 - E11 = {value}"), json!(value))
            });
            locality_check(&mut r, "locality".into(), &e, &DecideOptions::default())?;
            r.artifact("model", model_json(&Model::Empirical(e)));
            r
        }
    })
}

fn epistemicity_verdict(e: &Epistemicity) -> (Status, String, Value) {
    match e {
        Epistemicity::Ontic { value } => (
            Status::Info,
            format!("ontic: eigenvalue {value} with certainty"),
            to_value(e),
        ),
        Epistemicity::Epistemic { values, probs } => {
            let exact = rationalized(
                &[(values.0.to_string(), probs.0), (values.1.to_string(), probs.1)],
                DEFAULT_MAX_DENOMINATOR,
            );
            (
                Status::Info,
                format!("epistemic: eigenvalues {} and {} both possible", values.0, values.1),
                json!({ "result": "epistemic", "probabilities": exact }),
            )
        }
    }
}

/// `E(a0,b0) + E(a0,b1) + E(a1,b0) − E(a1,b1)` in floating point, with
/// `E = Σ (−1)^(a+b) p(a,b)`.
pub fn chsh_value(e: &EmpiricalModel) -> f64 {
    let mut total = 0.0;
    for ctx in e.scenario().cover() {
        let ms = ctx.measurements();
        let sign = if ms[0].ends_with('1') && ms[1].ends_with('1') {
            -1.0
        } else {
            1.0
        };
        let corr: f64 = e
            .table(ctx)
            .expect("context in cover")
            .iter()
            .map(|(ev, p)| {
                let same = ev.get(&ms[0]) == ev.get(&ms[1]);
                if same {
                    to_f64(p)
                } else {
                    -to_f64(p)
                }
            })
            .sum();
        total += sign * corr;
    }
    total
}

fn zoo_cmd(cmd: ZooCommand) -> Result<Done, InputError> {
    match cmd {
        ZooCommand::List => {
            let entries = zoo::entries();
            let width = entries.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0);
            let mut out = String::new();
            for (name, desc) in entries {
                out.push_str(&format!("{name:<width$}  {desc}\n"));
            }
            Ok(Done::Raw(out))
        }
        ZooCommand::Export { name, q } => {
            let m = zoo::model(&name, q.as_ref())?;
            Ok(Done::Raw(to_file_string(&m)))
        }
    }
}
