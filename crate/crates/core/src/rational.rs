//! Exact rational exponents.
//!
//! Every exponent that enters an integrality test (`n/p`, `k - n/p`, the
//! regime bounds) is kept as a [`Rational`] so that comparisons are decided
//! exactly. Floating-point input is accepted only when it is the nearest
//! double to a rational with a small denominator.

use num_rational::Rational64;
use num_traits::{CheckedMul, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Rational64;

/// Largest denominator recovered from a floating-point exponent.
const MAX_RECOVERED_DENOMINATOR: i64 = 10_000;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `n` or `n/d`.
pub fn format(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"3"`, `"-3/2"`, `"1.25"` or `"2.5e-1"` into an exact rational.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::InexactExponent("<empty>".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InexactExponent(text.into()))?;
        let den: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::InexactExponent(text.into()))?;
        if den == 0 {
            return Err(Error::InvalidExponent(format!("zero denominator in {text}")));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s).ok_or_else(|| Error::InexactExponent(text.into()))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{whole}{frac}");
    let mut numer: i64 = joined.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exp - frac.len() as i32;
    let ten = Rational::from_integer(10);
    let factor = if scale >= 0 {
        checked_pow(ten, scale as u32)?
    } else {
        checked_pow(ten, (-scale) as u32)?.recip()
    };
    Rational::from_integer(numer).checked_mul(&factor)
}

fn checked_pow(base: Rational, exp: u32) -> Option<Rational> {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc = acc.checked_mul(&base)?;
    }
    Some(acc)
}

/// Recovers an exact rational from a double.
///
/// Succeeds only when some fraction with denominator at most 10^4 rounds to
/// exactly `x`; `sqrt(2)` or `pi` are rejected.
pub fn from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InexactExponent(x.to_string()));
    }
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        return Ok(Rational::from_integer(x as i64));
    }
    // Continued-fraction convergents.
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 9.0e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0));
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0));
        let (Some(h2), Some(k2)) = (h2, k2) else { break };
        if k2 > MAX_RECOVERED_DENOMINATOR {
            break;
        }
        if h2 as f64 / k2 as f64 == x {
            return Ok(Rational::new(h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a as f64;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    Err(Error::InexactExponent(x.to_string()))
}

/// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: Rational) -> Result<Rational> {
    if p <= Rational::one() {
        return Err(Error::InvalidExponent(format!(
            "conjugate exponent requires p > 1, got {}",
            format(p)
        )));
    }
    Ok(p / (p - Rational::one()))
}

pub fn is_positive(r: Rational) -> bool {
    r.is_positive()
}

pub fn is_zero(r: Rational) -> bool {
    r.is_zero()
}

/// Serde adapter: rationals travel as strings (`"3/2"`) and are read from
/// strings, integers or floats.
pub mod serde_str {
    use super::Rational;
    use serde::{de, Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(*r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> de::Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an exact rational such as 2, \"3/2\" or 1.5")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            i64::try_from(v)
                .map(Rational::from_integer)
                .map_err(|_| E::custom("integer too large"))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            super::from_f64(v).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            super::parse(v).map_err(E::custom)
        }
    }

    pub mod option {
        use super::{Rational, RationalVisitor};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_str(&super::super::format(*r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(deserialize_with = "inner")] Rational);
            fn inner<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
                d.deserialize_any(RationalVisitor)
            }
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }

    pub mod vec {
        use super::{Rational, RationalVisitor};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rs.len()))?;
            for r in rs {
                seq.serialize_element(&super::super::format(*r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(deserialize_with = "inner")] Rational);
            fn inner<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
                d.deserialize_any(RationalVisitor)
            }
            Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}
