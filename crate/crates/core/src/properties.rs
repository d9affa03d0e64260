//! Value-assigning properties over a finite ontic space.
//!
//! A property sends each ontic state to a distribution over values. It is
//! ontic when every such distribution is a point mass, and epistemic when some
//! ontic state is compatible with two distinct values. Inverting the property
//! with Bayes' rule gives one distribution over ontic states per value; the
//! property is ontic exactly when those distributions have pairwise disjoint
//! supports.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::probcore::{check_label, Dist, Label, ProbError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("no value distribution for ontic state {0}")]
    MissingState(String),
    #[error("{0} is not in the ontic space")]
    UnknownState(String),
    #[error("value {value} at state {state} is not in the value set")]
    UnknownValue { state: String, value: String },
    #[error("prior must give positive weight to every ontic state (missing {0})")]
    PriorNotFullSupport(String),
    #[error("{0} listed twice")]
    DuplicateLabel(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// `f: Λ → D(V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    ontic_space: Vec<Label>,
    values: Vec<Label>,
    f: BTreeMap<Label, Dist<Label>>,
}

impl Property {
    pub fn new(
        ontic_space: Vec<Label>,
        values: Vec<Label>,
        f: BTreeMap<Label, Dist<Label>>,
    ) -> Result<Self, PropertyError> {
        check_distinct(&ontic_space)?;
        check_distinct(&values)?;
        for s in &ontic_space {
            let d = f.get(s).ok_or_else(|| PropertyError::MissingState(s.clone()))?;
            for v in d.support() {
                if !values.contains(v) {
                    return Err(PropertyError::UnknownValue {
                        state: s.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        if let Some(extra) = f.keys().find(|k| !ontic_space.contains(k)) {
            return Err(PropertyError::UnknownState(extra.clone()));
        }
        Ok(Property { ontic_space, values, f })
    }

    /// Property generated by a function `Λ → V`.
    pub fn from_function(
        ontic_space: Vec<Label>,
        values: Vec<Label>,
        f: impl Fn(&str) -> Label,
    ) -> Result<Self, PropertyError> {
        let map = ontic_space.iter().map(|s| (s.clone(), Dist::delta(f(s)))).collect();
        Property::new(ontic_space, values, map)
    }

    pub fn ontic_space(&self) -> &[Label] {
        &self.ontic_space
    }

    pub fn values(&self) -> &[Label] {
        &self.values
    }

    pub fn at(&self, state: &str) -> Option<&Dist<Label>> {
        self.f.get(state)
    }

    pub fn map(&self) -> &BTreeMap<Label, Dist<Label>> {
        &self.f
    }
}

fn check_distinct(labels: &[Label]) -> Result<(), PropertyError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        check_label(l)?;
        if !seen.insert(l) {
            return Err(PropertyError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Classification {
    /// The generating map `Λ → V`.
    Ontic { assignment: BTreeMap<Label, Label> },
    /// An ontic state with two distinct values in its support.
    Epistemic { state: Label, values: (Label, Label) },
}

impl Classification {
    pub fn is_ontic(&self) -> bool {
        matches!(self, Classification::Ontic { .. })
    }
}

pub fn classify(p: &Property) -> Classification {
    let mut assignment = BTreeMap::new();
    for s in &p.ontic_space {
        let d = &p.f[s];
        match d.is_delta() {
            Some(v) => {
                assignment.insert(s.clone(), v.clone());
            }
            None => {
                let mut it = d.support();
                let v1 = it.next().expect("non-empty support").clone();
                let v2 = it.next().expect("support size ≥ 2").clone();
                return Classification::Epistemic {
                    state: s.clone(),
                    values: (v1, v2),
                };
            }
        }
    }
    Classification::Ontic { assignment }
}

/// Posterior distributions over ontic states, one per value with non-zero
/// total mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvertedFamily {
    pub mu: BTreeMap<Label, Dist<Label>>,
    pub prior: Dist<Label>,
}

/// `μ_v(λ) = f(λ)(v)·prior(λ) / Σ_λ' f(λ')(v)·prior(λ')`, uniform prior by default.
pub fn bayes_invert(p: &Property, prior: Option<&Dist<Label>>) -> Result<InvertedFamily, PropertyError> {
    let prior = match prior {
        Some(d) => {
            for s in &p.ontic_space {
                if !d.weight(s).is_positive() {
                    return Err(PropertyError::PriorNotFullSupport(s.clone()));
                }
            }
            if let Some(extra) = d.support().find(|s| !p.ontic_space.contains(s)) {
                return Err(PropertyError::UnknownState(extra.clone()));
            }
            d.clone()
        }
        None => Dist::uniform(p.ontic_space.iter().cloned())?,
    };
    let mut mu = BTreeMap::new();
    for v in &p.values {
        let joint: BTreeMap<Label, Rational> = p
            .ontic_space
            .iter()
            .map(|s| (s.clone(), p.f[s].weight(v) * prior.weight(s)))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        let total: Rational = joint.values().sum();
        if total.is_zero() {
            continue;
        }
        let posterior = Dist::new(joint.into_iter().map(|(s, w)| (s, w / &total)))?;
        mu.insert(v.clone(), posterior);
    }
    Ok(InvertedFamily { mu, prior })
}

/// Two distinct values whose posteriors share an ontic state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub values: (Label, Label),
    pub state: Label,
}

/// First overlapping pair in label order, or `None` when supports are disjoint.
pub fn supports_overlap(fam: &InvertedFamily) -> Option<Overlap> {
    let entries: Vec<(&Label, &Dist<Label>)> = fam.mu.iter().collect();
    for (i, (v1, d1)) in entries.iter().enumerate() {
        for (v2, d2) in &entries[i + 1..] {
            if let Some(s) = d1.support().find(|s| d2.weight(s).is_positive()) {
                return Some(Overlap {
                    values: ((*v1).clone(), (*v2).clone()),
                    state: s.clone(),
                });
            }
        }
    }
    None
}

/// Ontic classification agrees with disjointness of the inverted supports
/// (uniform prior). Always true; used as a self-check.
pub fn hs_equivalence(p: &Property) -> bool {
    let fam = bayes_invert(p, None).expect("uniform prior has full support");
    classify(p).is_ontic() == supports_overlap(&fam).is_none()
}

/// Two coins, each green or white; drawing one reports its colour.
pub fn fuzzy_coin() -> Property {
    let states = ["GG", "GW", "WG", "WW"].map(String::from).to_vec();
    let values = ["G", "W"].map(String::from).to_vec();
    let f = states
        .iter()
        .map(|s| {
            let d = Dist::uniform(s.chars().map(|c| c.to_string())).expect("non-empty");
            (s.clone(), d)
        })
        .collect();
    Property::new(states, values, f).expect("valid property")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn l(s: &str) -> Label {
        s.to_string()
    }

    fn two_state(d1: Dist<Label>, d2: Dist<Label>) -> Property {
        Property::new(
            vec![l("s1"), l("s2")],
            vec![l("a"), l("b")],
            BTreeMap::from([(l("s1"), d1), (l("s2"), d2)]),
        )
        .unwrap()
    }

    #[test]
    fn fuzzy_coin_is_epistemic() {
        let p = fuzzy_coin();
        assert_eq!(p.at("GG"), Some(&Dist::delta(l("G"))));
        assert_eq!(
            classify(&p),
            Classification::Epistemic {
                state: l("GW"),
                values: (l("G"), l("W"))
            }
        );
        let fam = bayes_invert(&p, None).unwrap();
        assert_eq!(
            supports_overlap(&fam),
            Some(Overlap {
                values: (l("G"), l("W")),
                state: l("GW")
            })
        );
        // μ_G ∝ (1, 1/2, 1/2, 0)
        assert_eq!(fam.mu["G"].weight(&l("GG")), ratio(1, 2));
        assert_eq!(fam.mu["G"].weight(&l("GW")), ratio(1, 4));
        assert!(hs_equivalence(&p));
    }

    #[test]
    fn function_generated_is_ontic() {
        let states: Vec<Label> = (0..5).map(|i| format!("x{i}")).collect();
        let p = Property::from_function(
            states,
            vec![l("lo"), l("hi")],
            |s| {
                if s < "x3" {
                    l("lo")
                } else {
                    l("hi")
                }
            },
        )
        .unwrap();
        let c = classify(&p);
        assert!(c.is_ontic());
        assert!(supports_overlap(&bayes_invert(&p, None).unwrap()).is_none());
        assert!(hs_equivalence(&p));

        let single = Property::from_function(vec![l("s")], vec![l("v")], |_| l("v")).unwrap();
        assert_eq!(
            classify(&single),
            Classification::Ontic {
                assignment: BTreeMap::from([(l("s"), l("v"))])
            }
        );
        assert!(supports_overlap(&bayes_invert(&single, None).unwrap()).is_none());
    }

    #[test]
    fn invert_deltas_and_noisy() {
        let p = two_state(Dist::delta(l("a")), Dist::delta(l("b")));
        let fam = bayes_invert(&p, None).unwrap();
        assert_eq!(fam.mu["a"], Dist::delta(l("s1")));
        assert_eq!(fam.mu["b"], Dist::delta(l("s2")));

        let d1 = Dist::new([(l("a"), ratio(3, 4)), (l("b"), ratio(1, 4))]).unwrap();
        let d2 = Dist::new([(l("a"), ratio(1, 4)), (l("b"), ratio(3, 4))]).unwrap();
        let fam = bayes_invert(&two_state(d1, d2), None).unwrap();
        // (3/4·1/2) / (3/4·1/2 + 1/4·1/2) = 3/4
        assert_eq!(fam.mu["a"].weight(&l("s1")), ratio(3, 4));
        assert_eq!(fam.mu["a"].weight(&l("s2")), ratio(1, 4));
    }

    #[test]
    fn constant_property_inverts_to_prior() {
        let d = Dist::new([(l("a"), ratio(2, 5)), (l("b"), ratio(3, 5))]).unwrap();
        let p = two_state(d.clone(), d);
        let prior = Dist::new([(l("s1"), ratio(1, 3)), (l("s2"), ratio(2, 3))]).unwrap();
        let fam = bayes_invert(&p, Some(&prior)).unwrap();
        assert_eq!(fam.mu["a"], prior);
        assert_eq!(fam.mu["b"], prior);
    }

    #[test]
    fn zero_mass_values_are_absent() {
        let p = two_state(Dist::delta(l("a")), Dist::delta(l("a")));
        let fam = bayes_invert(&p, None).unwrap();
        assert!(!fam.mu.contains_key("b"));
        assert!(supports_overlap(&fam).is_none());
    }

    #[test]
    fn prior_must_cover_everything() {
        let p = two_state(Dist::delta(l("a")), Dist::delta(l("b")));
        let prior = Dist::delta(l("s1"));
        assert_eq!(
            bayes_invert(&p, Some(&prior)),
            Err(PropertyError::PriorNotFullSupport(l("s2")))
        );
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Property::new(vec![l("s")], vec![l("v")], BTreeMap::new()),
            Err(PropertyError::MissingState(_))
        ));
        assert!(matches!(
            Property::new(
                vec![l("s")],
                vec![l("v")],
                BTreeMap::from([(l("s"), Dist::delta(l("w")))])
            ),
            Err(PropertyError::UnknownValue { .. })
        ));
    }
}
