//! Exact rationals.
//!
//! [`Rational`] is an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Text form is `p/q` (or `p` for integers); parsing also
//! accepts finite decimal strings such as `-0.125`, which are converted exactly.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

/// `n/d` from machine integers. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `p/q`, an integer, or a finite decimal (`1.25`, `-.5`, `2e-3`).
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = digits.split_once('.').unwrap_or((digits, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{ip}{fp}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails when numerator and denominator overflow f64
        // separately; fall back to scaled integer division.
        let shift = r.denom().bits().max(r.numer().bits()) as i64 - 1000;
        let (n, d) = if shift > 0 {
            (r.numer() >> shift as usize, r.denom() >> shift as usize)
        } else {
            (r.numer().clone(), r.denom().clone())
        };
        n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
    })
}

/// Exact value of a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Rational with the smallest denominator in `[x - tol, x + tol]`
/// (Stern–Brocot walk). Used to snap float LP output to candidate exact values.
pub fn simplest_within(x: f64, tol: f64) -> Rational {
    let lo = x - tol;
    let hi = x + tol;
    let fl = x.floor();
    if fl + 1.0 <= hi && fl + 1.0 >= lo {
        return int(fl as i64 + 1);
    }
    if fl >= lo {
        return int(fl as i64);
    }
    let (mut a, mut b, mut c, mut d) = (0i128, 1i128, 1i128, 0i128);
    let frac_lo = lo - fl;
    let frac_hi = hi - fl;
    loop {
        let (p, q) = (a + c, b + d);
        let v = p as f64 / q as f64;
        if v < frac_lo {
            a = p;
            b = q;
        } else if v > frac_hi {
            c = p;
            d = q;
        } else {
            return Rational::new(BigInt::from(p + fl as i128 * q), BigInt::from(q));
        }
        if q > 1 << 60 {
            return from_f64(x).unwrap_or_else(zero);
        }
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Text form used in every serialized artifact.
pub fn fmt(r: &Rational) -> String {
    r.to_string()
}

/// Serde adapter writing a rational as a `"p/q"` string.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("25e-2").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1.5E1").unwrap(), int(15));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn display_round_trips() {
        for r in [rat(8, 9), int(0), rat(-17, 18), int(3)] {
            assert_eq!(parse_rational(&fmt(&r)).unwrap(), r);
        }
        assert_eq!(fmt(&rat(2, 4)), "1/2");
    }

    #[test]
    fn snapping_finds_small_denominators() {
        assert_eq!(simplest_within(0.5625000000000072, 1e-9), rat(9, 16));
        assert_eq!(simplest_within(0.888888888889, 1e-9), rat(8, 9));
        assert_eq!(simplest_within(1.0 - 1e-12, 1e-9), int(1));
        assert_eq!(simplest_within(-0.25, 1e-12), rat(-1, 4));
    }
}
