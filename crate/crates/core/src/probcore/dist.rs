use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::ProbError;
use crate::rational::{int, Rational};

/// Finite probability distribution with exact rational weights.
///
/// Only strictly positive weights are stored, so structural equality is
/// equality of distributions and absence means exactly zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dist<T: Ord> {
    weights: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> Dist<T> {
    /// Validates non-negativity and an exact unit sum. Repeated keys accumulate.
    pub fn new<I>(weights: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = (T, Rational)>,
    {
        let mut map: BTreeMap<T, Rational> = BTreeMap::new();
        for (t, w) in weights {
            if w.is_negative() {
                return Err(ProbError::NegativeWeight { weight: w });
            }
            if w.is_zero() {
                continue;
            }
            *map.entry(t).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = map.values().sum();
        if !total.is_one() {
            return Err(ProbError::SumNotOne {
                deficit: Rational::one() - total,
            });
        }
        Ok(Dist { weights: map })
    }

    pub fn delta(t: T) -> Self {
        Dist {
            weights: BTreeMap::from([(t, Rational::one())]),
        }
    }

    /// Uniform over the distinct items; fails on an empty carrier.
    pub fn uniform<I: IntoIterator<Item = T>>(items: I) -> Result<Self, ProbError> {
        let items: std::collections::BTreeSet<T> = items.into_iter().collect();
        if items.is_empty() {
            return Err(ProbError::SumNotOne {
                deficit: Rational::one(),
            });
        }
        let w = Rational::one() / int(items.len() as i64);
        Ok(Dist {
            weights: items.into_iter().map(|t| (t, w.clone())).collect(),
        })
    }

    pub(crate) fn from_positive(weights: BTreeMap<T, Rational>) -> Self {
        debug_assert!(weights.values().all(|w| w.is_positive()));
        debug_assert!(weights.values().sum::<Rational>().is_one());
        Dist { weights }
    }

    /// Drops zero entries from an already-normalized map.
    pub(crate) fn from_normalized(weights: BTreeMap<T, Rational>) -> Self {
        Self::from_positive(weights.into_iter().filter(|(_, w)| !w.is_zero()).collect())
    }

    pub fn weight(&self, t: &T) -> Rational {
        self.weights.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &T> + '_ {
        self.weights.keys()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> + '_ {
        self.weights.iter()
    }

    pub fn weights(&self) -> &BTreeMap<T, Rational> {
        &self.weights
    }

    /// The unique support element of a point mass.
    pub fn is_delta(&self) -> Option<&T> {
        if self.weights.len() == 1 {
            self.weights.keys().next()
        } else {
            None
        }
    }

    /// Push-forward along `f`.
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Dist<U> {
        let mut out: BTreeMap<U, Rational> = BTreeMap::new();
        for (t, w) in &self.weights {
            *out.entry(f(t)).or_insert_with(Rational::zero) += w;
        }
        Dist::from_positive(out)
    }

    /// Probability of the event `pred`.
    pub fn mass(&self, mut pred: impl FnMut(&T) -> bool) -> Rational {
        self.weights.iter().filter(|(t, _)| pred(t)).map(|(_, w)| w).sum()
    }

    pub fn product<U: Ord + Clone>(&self, other: &Dist<U>) -> Dist<(T, U)> {
        let mut out = BTreeMap::new();
        for (t, a) in &self.weights {
            for (u, b) in &other.weights {
                out.insert((t.clone(), u.clone()), a * b);
            }
        }
        Dist::from_positive(out)
    }

    /// Convex combination. Mixing weights must be non-negative and sum to one.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (Rational, &'a Dist<T>)>) -> Result<Self, ProbError>
    where
        T: 'a,
    {
        let mut out: BTreeMap<T, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (c, d) in parts {
            if c.is_negative() {
                return Err(ProbError::NegativeWeight { weight: c });
            }
            total += &c;
            for (t, w) in &d.weights {
                *out.entry(t.clone()).or_insert_with(Rational::zero) += &c * w;
            }
        }
        if !total.is_one() {
            return Err(ProbError::SumNotOne {
                deficit: Rational::one() - total,
            });
        }
        Ok(Dist::from_normalized(out))
    }
}

/// Product of a sequence of distributions, as a distribution over tuples.
pub fn product_all<T: Ord + Clone>(factors: &[Dist<T>]) -> Dist<Vec<T>> {
    let mut acc: BTreeMap<Vec<T>, Rational> = BTreeMap::from([(Vec::new(), Rational::one())]);
    for f in factors {
        let mut next = BTreeMap::new();
        for (prefix, w) in &acc {
            for (t, v) in f.iter() {
                let mut k = prefix.clone();
                k.push(t.clone());
                next.insert(k, w * v);
            }
        }
        acc = next;
    }
    Dist::from_positive(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn make_dist_examples() {
        let d = Dist::new([("a", ratio(1, 2)), ("b", ratio(1, 2))]).unwrap();
        assert_eq!(d.weight(&"a"), ratio(1, 2));
        assert_eq!(Dist::new([("a", int(1))]).unwrap(), Dist::delta("a"));
        assert_eq!(
            Dist::new([("a", ratio(1, 3)), ("b", ratio(1, 3))]),
            Err(ProbError::SumNotOne { deficit: ratio(1, 3) })
        );
        assert!(matches!(
            Dist::new([("a", ratio(3, 2)), ("b", ratio(-1, 2))]),
            Err(ProbError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn zero_weights_are_absent() {
        let d = Dist::new([("a", int(1)), ("b", int(0))]).unwrap();
        assert_eq!(d, Dist::delta("a"));
        assert_eq!(d.weight(&"b"), int(0));
    }

    #[test]
    fn is_delta_examples() {
        assert_eq!(Dist::delta("a").is_delta(), Some(&"a"));
        assert_eq!(Dist::uniform(["a", "b"]).unwrap().is_delta(), None);
        let near = Dist::new([("a", ratio(999, 1000)), ("b", ratio(1, 1000))]).unwrap();
        assert_eq!(near.is_delta(), None);
    }

    #[test]
    fn product_examples() {
        assert_eq!(Dist::delta("a").product(&Dist::delta("b")), Dist::delta(("a", "b")));
        let u2 = Dist::uniform([0, 1]).unwrap();
        assert_eq!(
            u2.product(&u2),
            Dist::uniform([(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap()
        );
        let q = ratio(1, 3);
        let d = Dist::new([("in", q.clone()), ("out", int(1) - &q)]).unwrap();
        let p = d.product(&d);
        assert_eq!(p.weight(&("in", "in")), &q * &q);
        assert_eq!(p.weight(&("in", "out")), &q * (int(1) - &q));
        assert_eq!(p.weight(&("out", "out")), (int(1) - &q) * (int(1) - &q));
    }

    #[test]
    fn mixture_and_map() {
        let a = Dist::delta(0);
        let b = Dist::delta(1);
        let m = Dist::mixture([(ratio(1, 4), &a), (ratio(3, 4), &b)]).unwrap();
        assert_eq!(m.weight(&1), ratio(3, 4));
        assert_eq!(m.map(|_| "x"), Dist::delta("x"));
        assert!(Dist::mixture([(ratio(1, 4), &a)]).is_err());
    }

    #[test]
    fn product_all_matches_pairwise() {
        let u = Dist::uniform(['x', 'y']).unwrap();
        let d = Dist::delta('z');
        let p = product_all(&[u.clone(), d.clone()]);
        let q = u.product(&d).map(|(a, b)| vec![*a, *b]);
        assert_eq!(p, q);
    }
}
