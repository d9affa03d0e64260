//! Ontological models over a finite ontic space.
//!
//! Preparations induce distributions over ontic states; each ontic state
//! induces a distribution over joint outcomes of every context. The checkers
//! here return the failing cell rather than a bare boolean.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::probcore::{
    check_label, marginalize, Assignment, Context, Dist, EmpiricalModel, Label, MeasurementScenario, ProbError,
};
use crate::properties::{classify, Classification, Property, PropertyError};
use crate::rational::{ser, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntoError {
    #[error("unknown preparation {0}")]
    UnknownPreparation(String),
    #[error("unknown measurement {0}")]
    UnknownMeasurement(String),
    #[error("no preparation distribution for {0}")]
    MissingPreparation(String),
    #[error("preparation {preparation} puts weight on {state}, which is not an ontic state")]
    UnknownState { preparation: String, state: String },
    #[error("no response for ontic state {state} in context {context}")]
    MissingResponse { state: String, context: String },
    #[error("response given for unknown cell ({state}, {context})")]
    UnknownResponse { state: String, context: String },
    #[error("{0} listed twice")]
    DuplicateLabel(String),
    #[error("marginal of {} is ill-defined: it depends on the context at ontic state {}", .0.measurement, .0.state)]
    MarginalIllDefined(ParameterDependence),
    #[error("model is not local: {0}")]
    NotLocal(NotLocal),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Property(#[from] PropertyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologicalModel {
    scenario: MeasurementScenario,
    preparations: Vec<Label>,
    ontic_space: Vec<Label>,
    prep_dists: BTreeMap<Label, Dist<Label>>,
    responses: BTreeMap<(Label, Context), Dist<Assignment>>,
}

impl OntologicalModel {
    pub fn new(
        scenario: MeasurementScenario,
        preparations: Vec<Label>,
        ontic_space: Vec<Label>,
        prep_dists: BTreeMap<Label, Dist<Label>>,
        responses: BTreeMap<(Label, Context), Dist<Assignment>>,
    ) -> Result<Self, OntoError> {
        distinct(&preparations)?;
        distinct(&ontic_space)?;
        for p in &preparations {
            let d = prep_dists
                .get(p)
                .ok_or_else(|| OntoError::MissingPreparation(p.clone()))?;
            if let Some(s) = d.support().find(|s| !ontic_space.contains(s)) {
                return Err(OntoError::UnknownState {
                    preparation: p.clone(),
                    state: s.clone(),
                });
            }
        }
        if let Some(p) = prep_dists.keys().find(|p| !preparations.contains(p)) {
            return Err(OntoError::UnknownPreparation(p.clone()));
        }
        for s in &ontic_space {
            for ctx in scenario.cover() {
                let d = responses
                    .get(&(s.clone(), ctx.clone()))
                    .ok_or_else(|| OntoError::MissingResponse {
                        state: s.clone(),
                        context: ctx.to_string(),
                    })?;
                for ev in d.support() {
                    scenario.check_event(ctx, ev)?;
                }
            }
        }
        if let Some((s, c)) = responses
            .keys()
            .find(|(s, c)| !ontic_space.contains(s) || !scenario.has_context(c))
        {
            return Err(OntoError::UnknownResponse {
                state: s.clone(),
                context: c.to_string(),
            });
        }
        Ok(OntologicalModel {
            scenario,
            preparations,
            ontic_space,
            prep_dists,
            responses,
        })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn preparations(&self) -> &[Label] {
        &self.preparations
    }

    pub fn ontic_space(&self) -> &[Label] {
        &self.ontic_space
    }

    pub fn prep_dist(&self, p: &str) -> Option<&Dist<Label>> {
        self.prep_dists.get(p)
    }

    pub fn prep_dists(&self) -> &BTreeMap<Label, Dist<Label>> {
        &self.prep_dists
    }

    pub fn response(&self, state: &str, ctx: &Context) -> Option<&Dist<Assignment>> {
        self.responses.get(&(state.to_string(), ctx.clone()))
    }

    pub fn responses(&self) -> &BTreeMap<(Label, Context), Dist<Assignment>> {
        &self.responses
    }

    fn resp(&self, state: &Label, ctx: &Context) -> &Dist<Assignment> {
        &self.responses[&(state.clone(), ctx.clone())]
    }

    /// Predicted statistics for preparation `p`: the mixture of the response
    /// tables weighted by `h(λ|p)`.
    pub fn operational_probabilities(&self, p: &str) -> Result<EmpiricalModel, OntoError> {
        let prep = self
            .prep_dists
            .get(p)
            .ok_or_else(|| OntoError::UnknownPreparation(p.to_string()))?;
        let mut tables = BTreeMap::new();
        for ctx in self.scenario.cover() {
            let parts = prep.iter().map(|(s, w)| (w.clone(), self.resp(s, ctx)));
            tables.insert(ctx.clone(), Dist::mixture(parts)?);
        }
        Ok(EmpiricalModel::new(self.scenario.clone(), tables)?)
    }

    /// Single-measurement marginal at `state`, if every context agrees.
    fn marginal(&self, state: &Label, m: &str) -> Result<Dist<Assignment>, ParameterDependence> {
        let single = Context::singleton(m);
        let mut first: Option<(&Context, Dist<Assignment>)> = None;
        for ctx in self.scenario.contexts_containing(m) {
            let marg = marginalize(self.resp(state, ctx), &single).expect("context contains m");
            match &first {
                None => first = Some((ctx, marg)),
                Some((c0, m0)) if *m0 != marg => {
                    return Err(ParameterDependence {
                        measurement: m.to_string(),
                        state: state.clone(),
                        contexts: ((*c0).clone(), ctx.clone()),
                        marginals: (m0.clone(), marg),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(first.expect("every measurement is covered").1)
    }
}

fn distinct(labels: &[Label]) -> Result<(), OntoError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        check_label(l)?;
        if !seen.insert(l) {
            return Err(OntoError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// A response that is not a point mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonDeterministic {
    pub state: Label,
    pub context: Context,
    pub response: Dist<Assignment>,
}

/// The marginal of `measurement` at `state` differs between two contexts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParameterDependence {
    pub measurement: Label,
    pub state: Label,
    pub contexts: (Context, Context),
    pub marginals: (Dist<Assignment>, Dist<Assignment>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum NotLocal {
    #[error("response at ({}, {}) is not deterministic", .0.state, .0.context)]
    NotDeterministic(NonDeterministic),
    #[error("marginal of {} at {} depends on the context ({} vs {})", .0.measurement, .0.state, .0.contexts.0, .0.contexts.1)]
    ParameterDependent(ParameterDependence),
}

/// A response cell that differs from the product of its own marginals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationFailure {
    pub state: Label,
    pub context: Context,
    pub event: Assignment,
    #[serde(serialize_with = "ser::rational")]
    pub actual: Rational,
    #[serde(serialize_with = "ser::rational")]
    pub product: Rational,
}

pub fn is_deterministic(h: &OntologicalModel) -> Result<(), NonDeterministic> {
    for ((s, ctx), d) in &h.responses {
        if d.is_delta().is_none() {
            return Err(NonDeterministic {
                state: s.clone(),
                context: ctx.clone(),
                response: d.clone(),
            });
        }
    }
    Ok(())
}

pub fn is_parameter_independent(h: &OntologicalModel) -> Result<(), ParameterDependence> {
    for s in &h.ontic_space {
        for m in h.scenario.measurements() {
            h.marginal(s, m)?;
        }
    }
    Ok(())
}

/// Deterministic and parameter-independent.
pub fn is_local(h: &OntologicalModel) -> Result<(), NotLocal> {
    is_deterministic(h).map_err(NotLocal::NotDeterministic)?;
    is_parameter_independent(h).map_err(NotLocal::ParameterDependent)
}

/// Every response equals the product of its own single-measurement marginals.
pub fn factorizes(h: &OntologicalModel) -> Result<(), FactorizationFailure> {
    for ((s, ctx), d) in &h.responses {
        let margs: Vec<Dist<Assignment>> = ctx
            .measurements()
            .iter()
            .map(|m| marginalize(d, &Context::singleton(m)).expect("m in context"))
            .collect();
        for ev in h.scenario.events(ctx) {
            let product: Rational = ctx
                .measurements()
                .iter()
                .zip(&margs)
                .map(|(m, marg)| marg.weight(&ev.restrict(&Context::singleton(m))))
                .product();
            let actual = d.weight(&ev);
            if actual != product {
                return Err(FactorizationFailure {
                    state: s.clone(),
                    context: ctx.clone(),
                    event: ev,
                    actual,
                    product,
                });
            }
        }
    }
    Ok(())
}

/// The outcome-valued property `λ ↦ h(·|m, λ)`, defined when the marginal of
/// `m` is context-independent at every ontic state.
pub fn observable_property(h: &OntologicalModel, m: &str) -> Result<Property, OntoError> {
    let outcomes = h
        .scenario
        .outcomes(m)
        .ok_or_else(|| OntoError::UnknownMeasurement(m.to_string()))?
        .to_vec();
    let mut f = BTreeMap::new();
    for s in &h.ontic_space {
        let marg = h.marginal(s, m).map_err(OntoError::MarginalIllDefined)?;
        f.insert(s.clone(), marg.map(|ev| ev.get(m).expect("single measurement").clone()));
    }
    Ok(Property::new(h.ontic_space.clone(), outcomes, f)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Onticity {
    Ontic { assignment: BTreeMap<Label, Label> },
    Epistemic { state: Label, values: (Label, Label) },
    Undefined { witness: ParameterDependence },
}

impl Onticity {
    pub fn is_ontic(&self) -> bool {
        matches!(self, Onticity::Ontic { .. })
    }
}

/// Per-measurement onticity of the observable properties. All-ontic exactly
/// when the model is local.
pub fn onticity_report(h: &OntologicalModel) -> BTreeMap<Label, Onticity> {
    h.scenario
        .measurements()
        .map(|m| {
            let verdict = match observable_property(h, m) {
                Ok(p) => match classify(&p) {
                    Classification::Ontic { assignment } => Onticity::Ontic { assignment },
                    Classification::Epistemic { state, values } => Onticity::Epistemic { state, values },
                },
                Err(OntoError::MarginalIllDefined(witness)) => Onticity::Undefined { witness },
                Err(e) => unreachable!("measurement from scenario: {e}"),
            };
            (m.clone(), verdict)
        })
        .collect()
}

/// Local model expressed as distributions over global assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalLocalModel {
    scenario: MeasurementScenario,
    weights: BTreeMap<Label, Dist<Assignment>>,
}

impl CanonicalLocalModel {
    pub fn new(scenario: MeasurementScenario, weights: BTreeMap<Label, Dist<Assignment>>) -> Result<Self, OntoError> {
        let all: Vec<Label> = scenario.measurements().cloned().collect();
        let full = Context::new(all)?;
        for d in weights.values() {
            for w in d.support() {
                scenario.check_event(&full, w)?;
            }
        }
        Ok(CanonicalLocalModel { scenario, weights })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn weights(&self) -> &BTreeMap<Label, Dist<Assignment>> {
        &self.weights
    }

    /// `h(ō|m̄,p) = Σ_ω weights(p)(ω) · Π_{m∈m̄} δ(ω(m), ō(m))`.
    pub fn operational_probabilities(&self, p: &str) -> Result<EmpiricalModel, OntoError> {
        let d = self
            .weights
            .get(p)
            .ok_or_else(|| OntoError::UnknownPreparation(p.to_string()))?;
        let mut tables = BTreeMap::new();
        for ctx in self.scenario.cover() {
            tables.insert(ctx.clone(), d.map(|omega| omega.restrict(ctx)));
        }
        Ok(EmpiricalModel::new(self.scenario.clone(), tables)?)
    }
}

/// Maps each ontic state of a local model to the global assignment of its
/// certain outcomes and pushes the preparation distributions forward.
pub fn canonicalize(h: &OntologicalModel) -> Result<CanonicalLocalModel, OntoError> {
    is_local(h).map_err(OntoError::NotLocal)?;
    let mut omega_of: BTreeMap<&Label, Assignment> = BTreeMap::new();
    for s in &h.ontic_space {
        let mut pairs = Vec::new();
        for m in h.scenario.measurements() {
            let marg = h.marginal(s, m).expect("parameter independent");
            let ev = marg.is_delta().expect("deterministic");
            pairs.push((m.clone(), ev.get(m).expect("single").clone()));
        }
        omega_of.insert(s, Assignment::new(pairs)?);
    }
    let weights = h
        .prep_dists
        .iter()
        .map(|(p, d)| (p.clone(), d.map(|s| omega_of[s].clone())))
        .collect();
    Ok(CanonicalLocalModel {
        scenario: h.scenario.clone(),
        weights,
    })
}

/// Builds a model with a single preparation from per-state responses given as
/// functions of the context and event.
pub fn single_preparation(
    scenario: MeasurementScenario,
    prep: Dist<Label>,
    ontic_space: Vec<Label>,
    mut response: impl FnMut(&Label, &Context, &Assignment) -> Rational,
) -> Result<OntologicalModel, OntoError> {
    let mut responses = BTreeMap::new();
    for s in &ontic_space {
        for ctx in scenario.cover() {
            let d = Dist::new(scenario.events(ctx).into_iter().map(|e| {
                let w = response(s, ctx, &e);
                (e, w)
            }))?;
            responses.insert((s.clone(), ctx.clone()), d);
        }
    }
    OntologicalModel::new(
        scenario,
        vec!["p".to_string()],
        ontic_space,
        BTreeMap::from([("p".to_string(), prep)]),
        responses,
    )
}

/// Deterministic, parameter-independent model in which ontic state `i` answers
/// according to `assignments[i]`.
pub fn from_assignments(
    scenario: MeasurementScenario,
    prep: Vec<Rational>,
    assignments: &[Assignment],
) -> Result<OntologicalModel, OntoError> {
    let states: Vec<Label> = (0..assignments.len()).map(|i| format!("l{i}")).collect();
    let prep = Dist::new(states.iter().cloned().zip(prep))?;
    let index: BTreeMap<&Label, &Assignment> = states.iter().zip(assignments).collect();
    single_preparation(scenario, prep, states.clone(), |s, ctx, ev| {
        if index[s].restrict(ctx) == *ev {
            Rational::from_integer(1.into())
        } else {
            Rational::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localdecide::{decide_local, LocalDecision};
    use crate::probcore::check_no_signalling;
    use crate::rational::{int, ratio};

    fn ctx(s: &str) -> Context {
        Context::parse(s).unwrap()
    }
    fn ev(s: &str) -> Assignment {
        Assignment::parse(s).unwrap()
    }
    fn bit(e: &Assignment, m: &str) -> u8 {
        e.get(m).unwrap().parse().unwrap()
    }

    fn two_state_local() -> OntologicalModel {
        let s = MeasurementScenario::bell_222();
        from_assignments(
            s,
            vec![ratio(1, 2), ratio(1, 2)],
            &[ev("a0=0,a1=0,b0=0,b1=0"), ev("a0=1,a1=0,b0=1,b1=1")],
        )
        .unwrap()
    }

    fn all_uniform() -> OntologicalModel {
        single_preparation(
            MeasurementScenario::bell_222(),
            Dist::delta("l".to_string()),
            vec!["l".to_string()],
            |_, _, _| ratio(1, 4),
        )
        .unwrap()
    }

    fn prbox_response() -> OntologicalModel {
        single_preparation(
            MeasurementScenario::bell_222(),
            Dist::delta("l".to_string()),
            vec!["l".to_string()],
            |_, c, e| {
                let x = c.contains("a1") as u8;
                let y = c.contains("b1") as u8;
                let (ma, mb) = (&c.measurements()[0], &c.measurements()[1]);
                if bit(e, ma) ^ bit(e, mb) == x & y {
                    ratio(1, 2)
                } else {
                    int(0)
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn operational_probabilities_examples() {
        let h = two_state_local();
        let e = h.operational_probabilities("p").unwrap();
        // half/half mixture of the two assignment tables
        assert_eq!(e.entry(&ctx("a0,b0"), &ev("a0=0,b0=0")), ratio(1, 2));
        assert_eq!(e.entry(&ctx("a0,b0"), &ev("a0=1,b0=1")), ratio(1, 2));
        assert_eq!(e.entry(&ctx("a1,b1"), &ev("a1=0,b1=1")), ratio(1, 2));
        assert_eq!(e.entry(&ctx("a1,b1"), &ev("a1=0,b1=0")), ratio(1, 2));
        assert!(matches!(
            h.operational_probabilities("zzz"),
            Err(OntoError::UnknownPreparation(_))
        ));

        let u = all_uniform().operational_probabilities("p").unwrap();
        for c in u.scenario().cover() {
            for e in u.scenario().events(c) {
                assert_eq!(u.entry(c, &e), ratio(1, 4));
            }
        }
        // one ontic state: the response table itself
        let pr = prbox_response();
        let e = pr.operational_probabilities("p").unwrap();
        assert_eq!(e.table(&ctx("a1,b1")), pr.response("l", &ctx("a1,b1")));
    }

    #[test]
    fn determinism_checks() {
        assert_eq!(is_deterministic(&two_state_local()), Ok(()));
        let w = is_deterministic(&all_uniform()).unwrap_err();
        assert_eq!(w.state, "l");
        assert_eq!(is_local(&two_state_local()), Ok(()));
        assert!(matches!(is_local(&all_uniform()), Err(NotLocal::NotDeterministic(_))));
    }

    // deterministic, but b0 answers the partner's setting
    fn parameter_dependent() -> OntologicalModel {
        single_preparation(
            MeasurementScenario::bell_222(),
            Dist::delta("l".to_string()),
            vec!["l".to_string()],
            |_, c, e| {
                let x = if c.contains("a1") { "1" } else { "0" };
                let want = c.measurements().iter().map(|m| {
                    (
                        m.clone(),
                        if m.starts_with('b') {
                            x.to_string()
                        } else {
                            "0".to_string()
                        },
                    )
                });
                if *e == Assignment::new(want).unwrap() {
                    int(1)
                } else {
                    int(0)
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn parameter_independence_checks() {
        assert_eq!(is_parameter_independent(&all_uniform()), Ok(()));
        let w = is_parameter_independent(&parameter_dependent()).unwrap_err();
        assert_eq!(w.measurement, "b0");
        assert_eq!(w.contexts, (ctx("a0,b0"), ctx("a1,b0")));
        assert!(matches!(
            is_local(&parameter_dependent()),
            Err(NotLocal::ParameterDependent(_))
        ));
        assert!(matches!(
            observable_property(&parameter_dependent(), "b0"),
            Err(OntoError::MarginalIllDefined(_))
        ));

        // one measurement, one context: vacuous
        let s = MeasurementScenario::new(
            BTreeMap::from([("z".to_string(), vec!["0".to_string(), "1".to_string()])]),
            vec![ctx("z")],
        )
        .unwrap();
        let h = single_preparation(s, Dist::delta("l".into()), vec!["l".into()], |_, _, _| ratio(1, 2)).unwrap();
        assert_eq!(is_parameter_independent(&h), Ok(()));
    }

    #[test]
    fn factorization_checks() {
        assert_eq!(factorizes(&two_state_local()), Ok(()));
        assert_eq!(factorizes(&all_uniform()), Ok(()));
        let w = factorizes(&prbox_response()).unwrap_err();
        // (0,0) cell: 1/2 against (1/2)(1/2)
        assert_eq!(w.actual, ratio(1, 2));
        assert_eq!(w.product, ratio(1, 4));
    }

    #[test]
    fn onticity_report_examples() {
        let r = onticity_report(&two_state_local());
        assert!(r.values().all(Onticity::is_ontic));
        let r = onticity_report(&all_uniform());
        assert!(r.values().all(|o| matches!(o, Onticity::Epistemic { .. })));
        let r = onticity_report(&parameter_dependent());
        assert!(matches!(r["b0"], Onticity::Undefined { .. }));
        assert!(r["a0"].is_ontic());

        // a0 deterministic, everything else noisy
        let mixed = single_preparation(
            MeasurementScenario::bell_222(),
            Dist::delta("l".to_string()),
            vec!["l".to_string()],
            |_, c, e| {
                if c.contains("a0") {
                    if e.get("a0").unwrap() == "0" {
                        ratio(1, 2)
                    } else {
                        int(0)
                    }
                } else {
                    ratio(1, 4)
                }
            },
        )
        .unwrap();
        let r = onticity_report(&mixed);
        assert!(r["a0"].is_ontic());
        assert!(matches!(r["a1"], Onticity::Epistemic { .. }));
        assert!(matches!(r["b0"], Onticity::Epistemic { .. }));
    }

    #[test]
    fn canonical_form() {
        let single = from_assignments(
            MeasurementScenario::bell_222(),
            vec![int(1)],
            &[ev("a0=1,a1=0,b0=0,b1=1")],
        )
        .unwrap();
        let c = canonicalize(&single).unwrap();
        assert_eq!(c.weights()["p"], Dist::delta(ev("a0=1,a1=0,b0=0,b1=1")));

        let h = two_state_local();
        let c = canonicalize(&h).unwrap();
        assert_eq!(
            c.weights()["p"],
            Dist::new([
                (ev("a0=0,a1=0,b0=0,b1=0"), ratio(1, 2)),
                (ev("a0=1,a1=0,b0=1,b1=1"), ratio(1, 2))
            ])
            .unwrap()
        );
        assert_eq!(
            c.operational_probabilities("p").unwrap(),
            h.operational_probabilities("p").unwrap()
        );
        assert!(matches!(canonicalize(&prbox_response()), Err(OntoError::NotLocal(_))));
    }

    #[test]
    fn local_models_give_local_no_signalling_statistics() {
        let e = two_state_local().operational_probabilities("p").unwrap();
        assert_eq!(check_no_signalling(&e), Ok(()));
        assert!(matches!(decide_local(&e).unwrap(), LocalDecision::Local { .. }));
    }
}
