use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{QuantumError, Result};
use crate::probcore::Dist;
use crate::rational::{from_f64, limit_denominator, Rational};

pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

/// Exact distribution close to the float one: each entry is replaced by its
/// best approximation with denominator at most `max_den`, and the residual is
/// moved onto the largest entry so the total is exactly 1.
///
/// If that would push the largest entry negative or more than `1/max_den`
/// away from its float value, falls back to largest-remainder rounding at
/// denominator `max_den`. Either way every entry is within
/// `1/max_den + 1e-9` of its input.
pub fn rationalize<T: Ord + Clone>(p: &[(T, f64)], max_den: u64) -> Result<Dist<T>> {
    if max_den == 0 {
        return Err(QuantumError::NotADistribution(
            "max_denominator must be positive".into(),
        ));
    }
    if p.is_empty() {
        return Err(QuantumError::NotADistribution("no entries".into()));
    }
    if let Some((_, x)) = p.iter().find(|(_, x)| !(0.0..=1.0).contains(x)) {
        return Err(QuantumError::NotADistribution(format!("entry {x} outside [0, 1]")));
    }
    let total: f64 = p.iter().map(|(_, x)| x).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(QuantumError::NotADistribution(format!("entries sum to {total}")));
    }
    let big_den = BigInt::from(max_den);
    let mut r: Vec<Rational> = p
        .iter()
        .map(|(_, x)| limit_denominator(&from_f64(*x).expect("finite"), &big_den))
        .collect();
    let largest = (0..p.len())
        .reduce(|best, i| if p[i].1 > p[best].1 { i } else { best })
        .expect("non-empty");
    let residual = Rational::one() - r.iter().sum::<Rational>();
    r[largest] += residual;
    let err = (&r[largest] - from_f64(p[largest].1).expect("finite")).abs();
    let bound = Rational::new(BigInt::one(), big_den.clone()) + from_f64(1e-9).expect("finite");
    if r[largest].is_negative() || err > bound {
        r = largest_remainder(p, max_den);
    }
    Ok(Dist::new(p.iter().map(|(t, _)| t.clone()).zip(r))?)
}

fn largest_remainder<T>(p: &[(T, f64)], n: u64) -> Vec<Rational> {
    let scaled: Vec<f64> = p.iter().map(|(_, x)| x * n as f64).collect();
    let mut units: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let mut rem = n as i64 - units.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| (scaled[j] - scaled[j].floor()).total_cmp(&(scaled[i] - scaled[i].floor())));
    for &i in order.iter().cycle() {
        if rem == 0 {
            break;
        }
        if rem > 0 {
            units[i] += 1;
            rem -= 1;
        } else if units[i] > 0 {
            units[i] -= 1;
            rem += 1;
        }
    }
    units
        .into_iter()
        .map(|u| Rational::new(BigInt::from(u), BigInt::from(n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, to_f64};
    use proptest::prelude::*;

    #[test]
    fn halves_and_thirds() {
        let d = rationalize(&[("a", 0.5), ("b", 0.5)], DEFAULT_MAX_DENOMINATOR).unwrap();
        assert_eq!(d.weight(&"a"), ratio(1, 2));
        let d = rationalize(&[("a", 1.0 / 3.0), ("b", 2.0 / 3.0)], 3).unwrap();
        assert_eq!(d.weight(&"a"), ratio(1, 3));
        assert_eq!(d.weight(&"b"), ratio(2, 3));
    }

    #[test]
    fn chsh_cells() {
        let hi = (2.0 + 2f64.sqrt()) / 8.0;
        let lo = (2.0 - 2f64.sqrt()) / 8.0;
        let p = [("00", hi), ("01", lo), ("10", lo), ("11", hi)];
        let d = rationalize(&p, DEFAULT_MAX_DENOMINATOR).unwrap();
        assert_eq!(d.iter().map(|(_, w)| w.clone()).sum::<Rational>(), Rational::one());
        for (k, x) in p {
            assert!((to_f64(&d.weight(&k)) - x).abs() <= 1e-6);
        }
    }

    #[test]
    fn rejects_non_distributions() {
        assert!(rationalize(&[("a", 0.5)], 10).is_err());
        assert!(rationalize(&[("a", 1.5), ("b", -0.5)], 10).is_err());
        assert!(rationalize::<&str>(&[], 10).is_err());
        assert!(rationalize(&[("a", 1.0)], 0).is_err());
    }

    #[test]
    fn fallback_when_residual_is_large() {
        // ten entries of 0.1 at denominator 3: each rounds to 0, so the largest
        // would absorb all the mass
        let p: Vec<(usize, f64)> = (0..10).map(|i| (i, 0.1)).collect();
        let d = rationalize(&p, 3).unwrap();
        for i in 0..10 {
            assert!((to_f64(&d.weight(&i)) - 0.1).abs() <= 1.0 / 3.0 + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn error_bound_and_exact_sum(ws in prop::collection::vec(0u32..1000, 1..8), max_den in 1u64..2000) {
            let total: u32 = ws.iter().sum();
            prop_assume!(total > 0);
            let p: Vec<(usize, f64)> = ws.iter().enumerate().map(|(i, &w)| (i, w as f64 / total as f64)).collect();
            let d = rationalize(&p, max_den).unwrap();
            prop_assert_eq!(d.iter().map(|(_, w)| w.clone()).sum::<Rational>(), Rational::one());
            for (i, x) in &p {
                prop_assert!((to_f64(&d.weight(i)) - x).abs() <= 1.0 / max_den as f64 + 1e-9);
            }
        }
    }
}
