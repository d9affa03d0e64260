use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::{Assignment, Context, Dist, MeasurementScenario, ProbError};
use crate::rational::Rational;

/// Per-context outcome distributions over a measurement scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    tables: BTreeMap<Context, Dist<Assignment>>,
}

impl EmpiricalModel {
    /// One table per context of the cover; every event must be a joint outcome
    /// of its context.
    pub fn new(scenario: MeasurementScenario, tables: BTreeMap<Context, Dist<Assignment>>) -> Result<Self, ProbError> {
        for ctx in scenario.cover() {
            if !tables.contains_key(ctx) {
                return Err(ProbError::MissingTable(ctx.to_string()));
            }
        }
        for (ctx, table) in &tables {
            if !scenario.has_context(ctx) {
                return Err(ProbError::UnknownContext(ctx.to_string()));
            }
            for ev in table.support() {
                scenario.check_event(ctx, ev)?;
            }
        }
        Ok(EmpiricalModel { scenario, tables })
    }

    /// Builds every table by evaluating `entry` on the full event set.
    pub fn from_fn(
        scenario: MeasurementScenario,
        mut entry: impl FnMut(&Context, &Assignment) -> Rational,
    ) -> Result<Self, ProbError> {
        let mut tables = BTreeMap::new();
        for ctx in scenario.cover() {
            let events = scenario.events(ctx);
            let d = Dist::new(events.into_iter().map(|e| {
                let w = entry(ctx, &e);
                (e, w)
            }))
            .map_err(|e| ProbError::InTable {
                context: ctx.to_string(),
                source: Box::new(e),
            })?;
            tables.insert(ctx.clone(), d);
        }
        Ok(EmpiricalModel { scenario, tables })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn table(&self, ctx: &Context) -> Option<&Dist<Assignment>> {
        self.tables.get(ctx)
    }

    pub fn tables(&self) -> &BTreeMap<Context, Dist<Assignment>> {
        &self.tables
    }

    /// Exact table entry; zero when absent.
    pub fn entry(&self, ctx: &Context, event: &Assignment) -> Rational {
        self.tables
            .get(ctx)
            .map(|t| t.weight(event))
            .unwrap_or_else(Rational::zero)
    }

    /// Context-wise convex combination of models over the same scenario.
    pub fn mixture(parts: &[(Rational, &EmpiricalModel)]) -> Result<Self, ProbError> {
        let first = parts.first().ok_or(ProbError::SumNotOne {
            deficit: num_traits::One::one(),
        })?;
        if parts.iter().any(|(_, m)| m.scenario != first.1.scenario) {
            return Err(ProbError::ScenarioMismatch);
        }
        let mut tables = BTreeMap::new();
        for ctx in first.1.scenario.cover() {
            let d = Dist::mixture(parts.iter().map(|(c, m)| (c.clone(), &m.tables[ctx])))?;
            tables.insert(ctx.clone(), d);
        }
        Ok(EmpiricalModel {
            scenario: first.1.scenario.clone(),
            tables,
        })
    }
}

/// Restriction of a joint-outcome distribution to a sub-context.
pub fn marginalize(d: &Dist<Assignment>, sub: &Context) -> Result<Dist<Assignment>, ProbError> {
    if sub.is_empty() {
        return Err(ProbError::NotASubcontext(String::new()));
    }
    for ev in d.support() {
        if !sub.measurements().iter().all(|m| ev.get(m).is_some()) {
            return Err(ProbError::NotASubcontext(sub.to_string()));
        }
    }
    Ok(d.map(|ev| ev.restrict(sub)))
}

/// Two contexts that disagree on the marginal of a shared measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignallingWitness {
    pub measurement: String,
    pub contexts: (Context, Context),
    pub marginals: (Dist<Assignment>, Dist<Assignment>),
}

/// Passes iff every single-measurement marginal is the same from every
/// context containing it.
pub fn check_no_signalling(e: &EmpiricalModel) -> Result<(), SignallingWitness> {
    for m in e.scenario.measurements() {
        let single = Context::singleton(m);
        let mut first: Option<(&Context, Dist<Assignment>)> = None;
        for ctx in e.scenario.contexts_containing(m) {
            let marg = marginalize(&e.tables[ctx], &single).expect("context contains m");
            match &first {
                None => first = Some((ctx, marg)),
                Some((c0, m0)) if *m0 != marg => {
                    return Err(SignallingWitness {
                        measurement: m.clone(),
                        contexts: ((*c0).clone(), ctx.clone()),
                        marginals: (m0.clone(), marg),
                    })
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ev(s: &str) -> Assignment {
        Assignment::parse(s).unwrap()
    }
    fn ctx(s: &str) -> Context {
        Context::parse(s).unwrap()
    }

    // PR box written out cell by cell
    fn prbox() -> EmpiricalModel {
        EmpiricalModel::from_fn(MeasurementScenario::bell_222(), |c, e| {
            let x = (c.measurements()[0] == "a1") as u8;
            let y = (c.measurements()[1] == "b1") as u8;
            let a: u8 = e.get(&c.measurements()[0]).unwrap().parse().unwrap();
            let b: u8 = e.get(&c.measurements()[1]).unwrap().parse().unwrap();
            if a ^ b == x & y {
                ratio(1, 2)
            } else {
                int(0)
            }
        })
        .unwrap()
    }

    #[test]
    fn marginalize_examples() {
        let d = Dist::delta(ev("a=0,b=0"));
        assert_eq!(marginalize(&d, &ctx("a")).unwrap(), Dist::delta(ev("a=0")));

        let pr = prbox();
        let t = pr.table(&ctx("a0,b0")).unwrap();
        // hand sum: (0,0)+(0,1) = 1/2 + 0, (1,0)+(1,1) = 0 + 1/2
        assert_eq!(
            marginalize(t, &ctx("a0")).unwrap(),
            Dist::new([(ev("a0=0"), ratio(1, 2)), (ev("a0=1"), ratio(1, 2))]).unwrap()
        );

        let u = Dist::uniform([ev("a=0,b=0"), ev("a=0,b=1"), ev("a=1,b=0"), ev("a=1,b=1")]).unwrap();
        assert_eq!(
            marginalize(&u, &ctx("b")).unwrap(),
            Dist::uniform([ev("b=0"), ev("b=1")]).unwrap()
        );
        assert!(matches!(marginalize(&u, &ctx("c")), Err(ProbError::NotASubcontext(_))));
    }

    #[test]
    fn prbox_is_no_signalling() {
        assert_eq!(check_no_signalling(&prbox()), Ok(()));
    }

    #[test]
    fn copied_setting_signals() {
        // b's outcome equals Alice's setting x
        let m = EmpiricalModel::from_fn(MeasurementScenario::bell_222(), |c, e| {
            let x = if c.measurements()[0] == "a1" { "1" } else { "0" };
            let b = e.get(&c.measurements()[1]).unwrap();
            let a = e.get(&c.measurements()[0]).unwrap();
            if b == x && a == "0" {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        let w = check_no_signalling(&m).unwrap_err();
        assert_eq!(w.measurement, "b0");
        assert_eq!(w.contexts, (ctx("a0,b0"), ctx("a1,b0")));
        assert_eq!(w.marginals.0, Dist::delta(ev("b0=0")));
        assert_eq!(w.marginals.1, Dist::delta(ev("b0=1")));
    }

    #[test]
    fn rejects_missing_table_and_bad_event() {
        let s = MeasurementScenario::bell_222();
        assert!(matches!(
            EmpiricalModel::new(s.clone(), BTreeMap::new()),
            Err(ProbError::MissingTable(_))
        ));
        let mut tables = prbox().tables().clone();
        tables.insert(ctx("a0,b0"), Dist::delta(ev("a0=0,b1=0")));
        assert!(matches!(
            EmpiricalModel::new(s, tables),
            Err(ProbError::EventDomain { .. })
        ));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::probcore::check_no_signalling;
    use crate::random::{local_empirical, no_signalling_empirical, rational_dist};
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pick(mask: u8) -> Context {
        let names = ["a0", "a1", "b0", "b1"];
        Context::new((0..4).filter(|i| mask >> i & 1 == 1).map(|i| names[i])).unwrap()
    }

    proptest! {
        #[test]
        fn marginalization_composes(seed in any::<u64>(), outer in 1u8..16, inner in 1u8..16) {
            prop_assume!(outer & inner != 0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = rational_dist(&mut rng, &MeasurementScenario::bell_222().global_assignments(), 20);
            let (s, s2) = (pick(outer), pick(outer & inner));
            let twice = marginalize(&marginalize(&d, &s).unwrap(), &s2).unwrap();
            prop_assert_eq!(twice, marginalize(&d, &s2).unwrap());
        }

        #[test]
        fn product_marginals_are_the_factors(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = MeasurementScenario::bell_222();
            let (ca, cb) = (Context::singleton("a0"), Context::singleton("b1"));
            let da = rational_dist(&mut rng, &s.events(&ca), 20);
            let db = rational_dist(&mut rng, &s.events(&cb), 20);
            let joint = da.product(&db).map(|(x, y)| {
                Assignment::new(x.iter().chain(y.iter()).map(|(m, o)| (m.clone(), o.clone()))).unwrap()
            });
            prop_assert_eq!(marginalize(&joint, &ca).unwrap(), da);
            prop_assert_eq!(marginalize(&joint, &cb).unwrap(), db);
        }

        #[test]
        fn mixtures_of_no_signalling_models_are_no_signalling(seed in any::<u64>(), w in 0i64..=12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e1 = no_signalling_empirical(&mut rng);
            let e2 = local_empirical(&mut rng);
            let mix = EmpiricalModel::mixture(&[(ratio(w, 12), &e1), (ratio(12 - w, 12), &e2)]).unwrap();
            prop_assert_eq!(check_no_signalling(&mix), Ok(()));
        }

        #[test]
        fn delta_iff_singleton_support(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = rational_dist(&mut rng, &MeasurementScenario::bell_222().global_assignments(), 3);
            prop_assert_eq!(d.is_delta().is_some(), d.support_size() == 1);
        }
    }
}
