//! Exact rational helpers.
//!
//! All instance-level loads are [`Rational`]s. Floating point only shows up
//! inside the simplex and in probability bookkeeping.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parses `"a/b"`, `"a"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = parse_int(n)?;
        let d: BigInt = parse_int(d)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let (neg, whole) = match whole.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        let digits = |t: &str, max: usize| t.len() <= max && t.bytes().all(|b| b.is_ascii_digit());
        if frac.is_empty() || !digits(frac, MAX_FRAC_DIGITS) || !digits(whole, MAX_WHOLE_DIGITS) {
            return Err(Error::Parse(format!("bad decimal {s:?}")));
        }
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let w: BigInt = if whole.is_empty() { BigInt::zero() } else { whole.parse().expect("checked digits") };
        let f: BigInt = frac.parse().expect("checked digits");
        let mag = Rational::new(w * &scale + f, scale);
        return Ok(if neg { -mag } else { mag });
    }
    Ok(Rational::from_integer(parse_int(s)?))
}

// A decimal's `a/b` form has at most WHOLE + FRAC digits, which must stay
// parseable by `parse_int`.
const MAX_WHOLE_DIGITS: usize = 60;
const MAX_FRAC_DIGITS: usize = 40;
const MAX_INT_DIGITS: usize = MAX_WHOLE_DIGITS + MAX_FRAC_DIGITS;

fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.trim_start_matches(['-', '+']);
    if digits.is_empty() || digits.len() > MAX_INT_DIGITS || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad integer {s:?}")));
    }
    t.parse::<BigInt>()
        .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}")))
}

/// Canonical text form: `"a/b"`, or `"a"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact value of a finite float.
pub fn from_f64_exact(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite float {x}")))
}

/// Smallest-denominator-first rational rounding: the last continued-fraction
/// convergent of `x` whose denominator stays at or below `max_den`.
pub fn snap_rational(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut frac = target;
    let limit = BigInt::from(max_den);
    for _ in 0..64 {
        let a = frac.floor();
        let ai = BigInt::from(a as u64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > limit {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let rem = frac - a;
        if rem < 1e-15 {
            break;
        }
        frac = 1.0 / rem;
        if !frac.is_finite() || frac > 1e18 {
            break;
        }
    }
    if q1.is_zero() {
        return Rational::zero();
    }
    let r = Rational::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}

/// Rational upper approximation of a non-negative float: the float's exact
/// value nudged up by one ulp.
pub fn upper_rational(x: f64) -> Rational {
    let bumped = if x == 0.0 { 0.0 } else { next_up(x) };
    Rational::from_float(bumped).unwrap_or_else(Rational::zero)
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    let bits = x.to_bits();
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil_int(r: &Rational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Serde adapter writing rationals as `"a/b"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/4").unwrap(), rat(1, 4));
        assert_eq!(parse_rational(" 3 ").unwrap(), int(3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("+-5.5").is_err());
        assert!(parse_rational("- 3.5").is_err());
        assert_eq!(parse_rational("-.5").unwrap(), rat(-1, 2));
    }

    #[test]
    fn long_decimals_round_trip() {
        let text = format!("{}.{}", "9".repeat(60), "1".repeat(40));
        let r = parse_rational(&text).unwrap();
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        assert!(parse_rational(&format!("{}.5", "9".repeat(61))).is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&int(7)), "7");
        assert_eq!(format_rational(&rat(-1, 3)), "-1/3");
    }

    #[test]
    fn snap_recovers_simple_fractions() {
        assert_eq!(snap_rational(1.0 / 3.0, 1_000_000_000_000), rat(1, 3));
        assert_eq!(snap_rational(0.6, 1_000_000_000_000), rat(3, 5));
        assert_eq!(snap_rational(2.0, 10), int(2));
        assert_eq!(snap_rational(-0.125, 100), rat(-1, 8));
        assert_eq!(snap_rational(0.0, 100), int(0));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_int(&rat(7, 2)), BigInt::from(3));
        assert_eq!(ceil_int(&rat(7, 2)), BigInt::from(4));
        assert_eq!(ceil_int(&int(3)), BigInt::from(3));
        assert_eq!(floor_int(&rat(-1, 2)), BigInt::from(-1));
    }

    #[test]
    fn upper_rational_is_above() {
        let x = (2.0f64).sqrt();
        assert!(upper_rational(x) > from_f64_exact(x).unwrap());
    }
}
