//! Exact distributions, measurement scenarios and empirical models.

mod dist;
mod empirical;
mod scenario;

use std::fmt::Display;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use dist::{product_all, Dist};
pub use empirical::{check_no_signalling, marginalize, EmpiricalModel, SignallingWitness};
pub use scenario::{check_label, Assignment, Context, GlobalAssignment, JointOutcome, Label, MeasurementScenario};

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error("negative weight {weight}")]
    NegativeWeight { weight: Rational },
    #[error("weights do not sum to 1 (sum ≠ 1, deficit {deficit})")]
    SumNotOne { deficit: Rational },
    #[error("{0:?} is not a sub-context of the distribution's context")]
    NotASubcontext(String),
    #[error("invalid label {0:?}: labels must be non-empty without ',', '=' or whitespace")]
    InvalidLabel(String),
    #[error("measurement {0} listed twice")]
    DuplicateMeasurement(String),
    #[error("outcome {outcome} listed twice for measurement {measurement}")]
    DuplicateOutcome { measurement: String, outcome: String },
    #[error("measurement {0} has no outcomes")]
    NoOutcomes(String),
    #[error("contexts must be non-empty")]
    EmptyContext,
    #[error("context {0} appears twice in the cover")]
    DuplicateContext(String),
    #[error("context {inner} is strictly contained in {outer}; the cover must list maximal contexts")]
    NonMaximalContext { inner: String, outer: String },
    #[error("unknown measurement {0}")]
    UnknownMeasurement(String),
    #[error("measurement {0} belongs to no context")]
    UncoveredMeasurement(String),
    #[error("unknown outcome {outcome} for measurement {measurement}")]
    UnknownOutcome { measurement: String, outcome: String },
    #[error("malformed event {0:?}: expected m=o,m'=o'")]
    MalformedEvent(String),
    #[error("event {event} is not a joint outcome of context {context}")]
    EventDomain { event: String, context: String },
    #[error("no table for context {0}")]
    MissingTable(String),
    #[error("context {0} is not in the cover")]
    UnknownContext(String),
    #[error("models are over different scenarios")]
    ScenarioMismatch,
    #[error("table for context {context}: {source}")]
    InTable {
        context: String,
        #[source]
        source: Box<ProbError>,
    },
}

// Witnesses and reports serialize distributions as `event -> "num/den"` maps.
impl<T: Ord + Clone + Display> Serialize for Dist<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.support_size()))?;
        for (t, w) in self.iter() {
            map.serialize_entry(&t.to_string(), &format_rational(w))?;
        }
        map.end()
    }
}

impl Serialize for Context {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
