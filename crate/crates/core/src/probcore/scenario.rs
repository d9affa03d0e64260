use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ProbError;

pub type Label = String;

/// Labels appear inside `a=0,b=1` style keys, so they may not contain the
/// separators or whitespace.
pub fn check_label(s: &str) -> Result<(), ProbError> {
    if s.is_empty() || s.chars().any(|c| c == ',' || c == '=' || c.is_whitespace()) {
        return Err(ProbError::InvalidLabel(s.to_string()));
    }
    Ok(())
}

/// A set of jointly performable measurements, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context(Vec<Label>);

impl Context {
    pub fn new<I, S>(measurements: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Label>,
    {
        let mut ms = Vec::new();
        for m in measurements {
            let m = m.into();
            check_label(&m)?;
            ms.push(m);
        }
        let set: BTreeSet<Label> = ms.iter().cloned().collect();
        if set.len() != ms.len() {
            return Err(ProbError::DuplicateMeasurement(ms.join(",")));
        }
        if set.is_empty() {
            return Err(ProbError::EmptyContext);
        }
        Ok(Context(set.into_iter().collect()))
    }

    /// Parses the `a,b,c` encoding.
    pub fn parse(s: &str) -> Result<Self, ProbError> {
        Context::new(s.split(','))
    }

    pub fn measurements(&self) -> &[Label] {
        &self.0
    }

    pub fn contains(&self, m: &str) -> bool {
        self.0.binary_search_by(|x| x.as_str().cmp(m)).is_ok()
    }

    pub fn is_subset_of(&self, other: &Context) -> bool {
        self.0.iter().all(|m| other.contains(m))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn singleton(m: &str) -> Self {
        Context(vec![m.to_string()])
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// A map from measurements to outcomes: a joint outcome over a context, or a
/// global assignment when the domain is every measurement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<Label, Label>);

pub type JointOutcome = Assignment;
pub type GlobalAssignment = Assignment;

impl Assignment {
    pub fn new<I, A, B>(pairs: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<Label>,
        B: Into<Label>,
    {
        let mut map = BTreeMap::new();
        for (m, o) in pairs {
            let (m, o) = (m.into(), o.into());
            check_label(&m)?;
            check_label(&o)?;
            if map.insert(m.clone(), o).is_some() {
                return Err(ProbError::DuplicateMeasurement(m));
            }
        }
        Ok(Assignment(map))
    }

    /// Parses the `m=o,m'=o'` encoding.
    pub fn parse(s: &str) -> Result<Self, ProbError> {
        let pairs = s
            .split(',')
            .map(|kv| {
                kv.split_once('=')
                    .ok_or_else(|| ProbError::MalformedEvent(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Assignment::new(pairs)
    }

    pub fn get(&self, m: &str) -> Option<&Label> {
        self.0.get(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Label)> + '_ {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Label> + '_ {
        self.0.keys()
    }

    pub fn domain_is(&self, ctx: &Context) -> bool {
        self.0.len() == ctx.len() && ctx.measurements().iter().all(|m| self.0.contains_key(m))
    }

    /// Restriction to `ctx`. Measurements of `ctx` outside the domain are skipped.
    pub fn restrict(&self, ctx: &Context) -> Assignment {
        Assignment(
            ctx.measurements()
                .iter()
                .filter_map(|m| self.0.get(m).map(|o| (m.clone(), o.clone())))
                .collect(),
        )
    }

    /// True when `self` and `other` agree wherever both are defined.
    pub fn agrees_with(&self, other: &Assignment) -> bool {
        other.0.iter().all(|(m, o)| self.0.get(m).is_none_or(|x| x == o))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, o) in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{m}={o}")?;
        }
        Ok(())
    }
}

/// Measurements, their outcome sets, and a cover by maximal contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    outcomes: BTreeMap<Label, Vec<Label>>,
    cover: Vec<Context>,
}

impl MeasurementScenario {
    /// Validates the cover: every context refers to known measurements, every
    /// measurement is covered, no context is repeated or strictly contained in
    /// another. Cover order is preserved.
    pub fn new(outcomes: BTreeMap<Label, Vec<Label>>, cover: Vec<Context>) -> Result<Self, ProbError> {
        for (m, os) in &outcomes {
            check_label(m)?;
            if os.is_empty() {
                return Err(ProbError::NoOutcomes(m.clone()));
            }
            let mut seen = BTreeSet::new();
            for o in os {
                check_label(o)?;
                if !seen.insert(o) {
                    return Err(ProbError::DuplicateOutcome {
                        measurement: m.clone(),
                        outcome: o.clone(),
                    });
                }
            }
        }
        for c in &cover {
            for m in c.measurements() {
                if !outcomes.contains_key(m) {
                    return Err(ProbError::UnknownMeasurement(m.clone()));
                }
            }
        }
        for m in outcomes.keys() {
            if !cover.iter().any(|c| c.contains(m)) {
                return Err(ProbError::UncoveredMeasurement(m.clone()));
            }
        }
        for (i, a) in cover.iter().enumerate() {
            for (j, b) in cover.iter().enumerate() {
                if i != j && a.is_subset_of(b) {
                    return Err(if a == b {
                        ProbError::DuplicateContext(a.to_string())
                    } else {
                        ProbError::NonMaximalContext {
                            inner: a.to_string(),
                            outer: b.to_string(),
                        }
                    });
                }
            }
        }
        Ok(MeasurementScenario { outcomes, cover })
    }

    /// Bipartite Bell scenario: every measurement of `left` is compatible with
    /// every measurement of `right`, all with outcomes `outcomes`.
    pub fn bipartite(left: &[&str], right: &[&str], outcomes: &[&str]) -> Result<Self, ProbError> {
        let os: Vec<Label> = outcomes.iter().map(|s| s.to_string()).collect();
        let map = left.iter().chain(right).map(|m| (m.to_string(), os.clone())).collect();
        let mut cover = Vec::new();
        for a in left {
            for b in right {
                cover.push(Context::new([*a, *b])?);
            }
        }
        MeasurementScenario::new(map, cover)
    }

    /// The (2,2,2) scenario with measurements `a0,a1,b0,b1` and outcomes `0,1`.
    pub fn bell_222() -> Self {
        Self::bipartite(&["a0", "a1"], &["b0", "b1"], &["0", "1"]).expect("valid scenario")
    }

    pub fn measurements(&self) -> impl Iterator<Item = &Label> + '_ {
        self.outcomes.keys()
    }

    pub fn outcome_map(&self) -> &BTreeMap<Label, Vec<Label>> {
        &self.outcomes
    }

    pub fn outcomes(&self, m: &str) -> Option<&[Label]> {
        self.outcomes.get(m).map(Vec::as_slice)
    }

    pub fn cover(&self) -> &[Context] {
        &self.cover
    }

    pub fn has_context(&self, c: &Context) -> bool {
        self.cover.contains(c)
    }

    pub fn contexts_containing<'a>(&'a self, m: &'a str) -> impl Iterator<Item = &'a Context> + 'a {
        self.cover.iter().filter(move |c| c.contains(m))
    }

    /// All joint outcomes of `ctx`, in mixed-radix order (measurements sorted,
    /// outcomes in declared order).
    pub fn events(&self, ctx: &Context) -> Vec<Assignment> {
        self.assignments_over(ctx.measurements())
    }

    /// All global assignments, same ordering convention as [`Self::events`].
    pub fn global_assignments(&self) -> Vec<Assignment> {
        let all: Vec<Label> = self.outcomes.keys().cloned().collect();
        self.assignments_over(&all)
    }

    /// Number of global assignments, saturating at `u128::MAX`.
    pub fn global_assignment_count(&self) -> u128 {
        self.outcomes
            .values()
            .fold(1u128, |acc, os| acc.saturating_mul(os.len() as u128))
    }

    fn assignments_over(&self, ms: &[Label]) -> Vec<Assignment> {
        let mut out = vec![BTreeMap::new()];
        for m in ms {
            let os = &self.outcomes[m];
            let mut next = Vec::with_capacity(out.len() * os.len());
            for partial in &out {
                for o in os {
                    let mut a: BTreeMap<Label, Label> = partial.clone();
                    a.insert(m.clone(), o.clone());
                    next.push(a);
                }
            }
            out = next;
        }
        out.into_iter().map(Assignment).collect()
    }

    /// Checks that `event` is a joint outcome of `ctx` in this scenario.
    pub fn check_event(&self, ctx: &Context, event: &Assignment) -> Result<(), ProbError> {
        if !event.domain_is(ctx) {
            return Err(ProbError::EventDomain {
                event: event.to_string(),
                context: ctx.to_string(),
            });
        }
        for (m, o) in event.iter() {
            if !self.outcomes[m].contains(o) {
                return Err(ProbError::UnknownOutcome {
                    measurement: m.clone(),
                    outcome: o.clone(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcomes(ms: &[&str]) -> BTreeMap<Label, Vec<Label>> {
        ms.iter()
            .map(|m| (m.to_string(), vec!["0".to_string(), "1".to_string()]))
            .collect()
    }

    #[test]
    fn bell_222_shape() {
        let s = MeasurementScenario::bell_222();
        assert_eq!(s.cover().len(), 4);
        assert_eq!(s.global_assignments().len(), 16);
        assert_eq!(s.events(&s.cover()[0]).len(), 4);
        assert_eq!(s.global_assignments()[0].to_string(), "a0=0,a1=0,b0=0,b1=0");
        assert_eq!(s.global_assignments()[1].to_string(), "a0=0,a1=0,b0=0,b1=1");
    }

    #[test]
    fn rejects_bad_covers() {
        let ctx = |s: &str| Context::parse(s).unwrap();
        assert!(matches!(
            MeasurementScenario::new(outcomes(&["a", "b"]), vec![ctx("a,b"), ctx("a")]),
            Err(ProbError::NonMaximalContext { .. })
        ));
        assert!(matches!(
            MeasurementScenario::new(outcomes(&["a", "b"]), vec![ctx("a")]),
            Err(ProbError::UncoveredMeasurement(_))
        ));
        assert!(matches!(
            MeasurementScenario::new(outcomes(&["a"]), vec![ctx("a,z")]),
            Err(ProbError::UnknownMeasurement(_))
        ));
        assert!(matches!(
            MeasurementScenario::new(outcomes(&["a"]), vec![ctx("a"), ctx("a")]),
            Err(ProbError::DuplicateContext(_))
        ));
        assert!(Context::new(Vec::<String>::new()).is_err());
        assert!(Context::parse("a,,b").is_err());
    }

    #[test]
    fn assignment_encoding() {
        let a = Assignment::parse("b=1,a=0").unwrap();
        assert_eq!(a.to_string(), "a=0,b=1");
        assert!(Assignment::parse("a=0,a=1").is_err());
        assert!(Assignment::parse("a0").is_err());
        let c = Context::parse("a").unwrap();
        assert_eq!(a.restrict(&c).to_string(), "a=0");
    }
}
