//! Exact rationals and their `"num/den"` string encoding.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `n/d` as a [`Rational`]. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational {0:?}: expected \"num/den\" with den > 0")]
pub struct ParseRationalError(pub String);

/// Parses `"num/den"` or a bare integer `"num"`.
///
/// Whitespace, signs on the denominator and zero denominators are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let parse_int = |t: &str, allow_sign: bool| -> Result<BigInt, ParseRationalError> {
        let digits = if allow_sign {
            t.strip_prefix('-').unwrap_or(t)
        } else {
            t
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        t.parse::<BigInt>().map_err(|_| err())
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n, true)?;
            let d = parse_int(d, false)?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s, true)?)),
    }
}

/// Canonical text form: `"num/den"`, or `"num"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn to_f64(r: &Rational) -> f64 {
    // numerator and denominator may both overflow f64; scale via string-free division
    use num_traits::ToPrimitive;
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Closest rational to `x` with denominator at most `max_den`.
///
/// Continued-fraction convergents plus the best semiconvergent; ties go to the
/// convergent. `max_den` must be at least 1.
pub fn limit_denominator(x: &Rational, max_den: &BigInt) -> Rational {
    assert!(*max_den >= BigInt::one(), "max_den must be positive");
    if x.denom() <= max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
    }
    let k = (max_den - &q0).div_floor(&q1);
    let semi = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = BigRational::new(p1, q1);
    if (&conv - x).abs() <= (&semi - x).abs() {
        conv
    } else {
        semi
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Newtype that serializes a [`Rational`] as its `"num/den"` string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalStr(pub Rational);

impl Serialize for RationalStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = RationalStr;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string \"num/den\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<RationalStr, E> {
                parse_rational(v).map(RationalStr).map_err(E::custom)
            }
        }
        d.deserialize_str(V)
    }
}

impl From<Rational> for RationalStr {
    fn from(r: Rational) -> Self {
        RationalStr(r)
    }
}

impl From<&Rational> for RationalStr {
    fn from(r: &Rational) -> Self {
        RationalStr(r.clone())
    }
}

/// `serialize_with` helpers for fields holding rationals.
pub mod ser {
    use std::collections::BTreeMap;
    use std::fmt::Display;

    use serde::ser::SerializeMap;
    use serde::Serializer;

    use super::Rational;

    pub fn rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn rational_map<K: Display, S: Serializer>(m: &BTreeMap<K, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(&k.to_string(), &v.to_string())?;
        }
        map.end()
    }

    pub fn nested_rationals<K: Display, K2: Display, S: Serializer>(
        m: &BTreeMap<K, BTreeMap<K2, Rational>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, inner) in m {
            let inner: BTreeMap<String, String> = inner.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
            map.serialize_entry(&k.to_string(), &inner)?;
        }
        map.end()
    }
}
