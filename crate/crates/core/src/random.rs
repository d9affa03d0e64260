//! Seedable generators of random models with small rational weights, for
//! property tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ontomodel::{from_assignments, OntologicalModel};
use crate::probcore::{
    check_no_signalling, product_all, Assignment, Context, Dist, EmpiricalModel, Label, MeasurementScenario,
};
use crate::properties::Property;
use crate::rational::{ratio, Rational};
use crate::zoo::{deterministic_box, global_assignment, prbox_variant};

/// Random distribution over `items` whose weights share a denominator of at
/// most `max_den`. Items may receive zero weight.
pub fn rational_dist<T: Ord + Clone, R: Rng + ?Sized>(rng: &mut R, items: &[T], max_den: i64) -> Dist<T> {
    assert!(!items.is_empty() && max_den >= 1);
    let d = rng.gen_range(1..=max_den);
    let mut cuts: Vec<i64> = (0..items.len() - 1).map(|_| rng.gen_range(0..=d)).collect();
    cuts.push(0);
    cuts.push(d);
    cuts.sort_unstable();
    let weights = cuts.windows(2).map(|w| ratio(w[1] - w[0], d));
    Dist::new(items.iter().cloned().zip(weights)).expect("weights sum to one")
}

fn labels(prefix: &str, n: usize) -> Vec<Label> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Property with `|Λ| ≤ 6`, `|V| ≤ 4` and denominators at most 20. One call in
/// ten yields a property that is a function `Λ → V`.
pub fn property<R: Rng + ?Sized>(rng: &mut R) -> Property {
    let states = labels("s", rng.gen_range(1..=6));
    let values = labels("v", rng.gen_range(1..=4));
    let forced = rng.gen_bool(0.1);
    let f = states
        .iter()
        .map(|s| {
            let d = if forced {
                Dist::delta(values.choose(rng).expect("non-empty").clone())
            } else {
                rational_dist(rng, &values, 20)
            };
            (s.clone(), d)
        })
        .collect();
    Property::new(states, values, f).expect("valid property")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Each ontic state answers by a fixed global assignment.
    DeterministicLocal,
    /// Per-context products of fixed per-measurement distributions.
    Factorizing,
    /// A deterministic local model with one response cell smeared.
    NearDeterministic,
    /// Deterministic, but each context picks its outcomes independently.
    ContextDependent,
    /// Every response an unrelated random distribution.
    Arbitrary,
}

pub const FAMILIES: [Family; 5] = [
    Family::DeterministicLocal,
    Family::Factorizing,
    Family::NearDeterministic,
    Family::ContextDependent,
    Family::Arbitrary,
];

fn preparations<R: Rng + ?Sized>(rng: &mut R, states: &[Label]) -> (Vec<Label>, BTreeMap<Label, Dist<Label>>) {
    let preps = labels("p", rng.gen_range(1..=2));
    let dists = preps
        .iter()
        .map(|p| (p.clone(), rational_dist(rng, states, 12)))
        .collect();
    (preps, dists)
}

fn outcome_dist<R: Rng + ?Sized>(rng: &mut R, s: &MeasurementScenario, m: &str) -> Dist<Assignment> {
    let evs = s.events(&Context::singleton(m));
    if rng.gen_bool(0.3) {
        Dist::delta(evs.choose(rng).expect("outcomes").clone())
    } else {
        rational_dist(rng, &evs, 6)
    }
}

fn merge(parts: &[Assignment]) -> Assignment {
    Assignment::new(
        parts
            .iter()
            .flat_map(|a| a.iter().map(|(m, o)| (m.clone(), o.clone())).collect::<Vec<_>>()),
    )
    .expect("disjoint measurements")
}

/// Random model over the (2,2,2) scenario with one to four ontic states and
/// one or two preparations.
pub fn ontological_model<R: Rng + ?Sized>(rng: &mut R, family: Family) -> OntologicalModel {
    let s = MeasurementScenario::bell_222();
    let n = rng.gen_range(1..=4);
    let states = labels("l", n);
    if family == Family::DeterministicLocal || family == Family::NearDeterministic {
        let omegas: Vec<Assignment> = (0..n).map(|_| global_assignment(rng.gen_range(0..16))).collect();
        let h = from_assignments(s.clone(), vec![ratio(1, n as i64); n], &omegas).expect("valid");
        let mut responses = h.responses().clone();
        if family == Family::NearDeterministic {
            let keys: Vec<_> = responses.keys().cloned().collect();
            let key = keys.choose(rng).expect("cells").clone();
            let from = responses[&key].is_delta().expect("deterministic").clone();
            let others: Vec<Assignment> = s.events(&key.1).into_iter().filter(|e| *e != from).collect();
            let to = others.choose(rng).expect("two or more events").clone();
            let eps = ratio(1, rng.gen_range(2..=20));
            let smeared = Dist::new([(from, Rational::from_integer(1.into()) - &eps), (to, eps)]).expect("valid");
            responses.insert(key, smeared);
        }
        let (preps, dists) = preparations(rng, &states);
        return OntologicalModel::new(s, preps, states, dists, responses).expect("valid");
    }
    let mut responses = BTreeMap::new();
    for l in &states {
        let per_m: BTreeMap<Label, Dist<Assignment>> = s
            .measurements()
            .map(|m| (m.clone(), outcome_dist(rng, &s, m)))
            .collect();
        for ctx in s.cover() {
            let d = match family {
                Family::Factorizing => {
                    let factors: Vec<Dist<Assignment>> = ctx.measurements().iter().map(|m| per_m[m].clone()).collect();
                    product_all(&factors).map(|parts| merge(parts))
                }
                Family::ContextDependent => {
                    let evs = s.events(ctx);
                    Dist::delta(evs.choose(rng).expect("events").clone())
                }
                _ => rational_dist(rng, &s.events(ctx), 8),
            };
            responses.insert((l.clone(), ctx.clone()), d);
        }
    }
    let (preps, dists) = preparations(rng, &states);
    OntologicalModel::new(s, preps, states, dists, responses).expect("valid")
}

/// Convex mixture of one to four deterministic (2,2,2) boxes.
pub fn local_empirical<R: Rng + ?Sized>(rng: &mut R) -> EmpiricalModel {
    let boxes: Vec<EmpiricalModel> = (0..rng.gen_range(1..=4))
        .map(|_| deterministic_box(&global_assignment(rng.gen_range(0..16))))
        .collect();
    let idx: Vec<usize> = (0..boxes.len()).collect();
    let w = rational_dist(rng, &idx, 12);
    let parts: Vec<(Rational, &EmpiricalModel)> = idx.iter().map(|i| (w.weight(i), &boxes[*i])).collect();
    EmpiricalModel::mixture(&parts).expect("valid mixture")
}

/// No-signalling mixture of a PR-box variant with a local model; non-local
/// whenever the PR weight is large enough.
pub fn no_signalling_empirical<R: Rng + ?Sized>(rng: &mut R) -> EmpiricalModel {
    let pr = prbox_variant(rng.gen_range(0..8));
    let local = local_empirical(rng);
    let w = ratio(rng.gen_range(0..=10), 10);
    let rest = Rational::from_integer(1.into()) - &w;
    EmpiricalModel::mixture(&[(w, &pr), (rest, &local)]).expect("valid mixture")
}

/// Arbitrary per-context tables, redrawn until some marginal differs.
pub fn signalling_empirical<R: Rng + ?Sized>(rng: &mut R) -> EmpiricalModel {
    let s = MeasurementScenario::bell_222();
    loop {
        let tables = s
            .cover()
            .iter()
            .map(|c| (c.clone(), rational_dist(rng, &s.events(c), 8)))
            .collect();
        let e = EmpiricalModel::new(s.clone(), tables).expect("valid tables");
        if check_no_signalling(&e).is_err() {
            return e;
        }
    }
}
