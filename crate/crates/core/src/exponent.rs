//! Exact rational exponents and the symbolic order of magnitude `λ^{p+qα}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// The exponent `α` in `λ̄ = λ^{1+α}`, an exact rational in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alpha(Rational);

impl Alpha {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter("alpha has zero denominator".into()));
        }
        Self::from_rational(Rational::new(numer, denom))
    }

    pub fn from_rational(r: Rational) -> Result<Self> {
        if r <= Rational::zero() || r >= Rational::from_integer(1) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie strictly between 0 and 1, got {r}"
            )));
        }
        Ok(Alpha(r))
    }

    pub fn value(&self) -> Rational {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        ratio_to_f64(self.0)
    }

    /// `1/α` as an exact rational.
    pub fn recip(&self) -> Rational {
        self.0.recip()
    }

    /// `⌈1/α⌉ - 1`, the default slack between the two critical families.
    pub fn default_kappa(&self) -> usize {
        (self.recip().ceil().to_integer() - 1) as usize
    }

    /// `λ̄` for a given `λ`.
    pub fn lambda_bar(&self, lambda: f64) -> f64 {
        lambda.powf(1.0 + self.as_f64())
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q` or a finite decimal such as `0.55`.
    fn from_str(s: &str) -> Result<Self> {
        Alpha::from_rational(parse_rational(s)?)
    }
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse `p/q`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() || t.len() > 40 {
        return Err(bad());
    }
    if let Some((a, b)) = t.split_once('/') {
        let p: i64 = a.trim().parse().map_err(|_| bad())?;
        let q: i64 = b.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits_ok = |x: &str| x.chars().all(|c| c.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) || frac_part.len() > 15 {
        return Err(bad());
    }
    let ip: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let scale = 10i64.pow(frac_part.len() as u32);
    let fp: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = ip
        .checked_mul(scale)
        .and_then(|v| v.checked_add(fp))
        .ok_or_else(bad)?;
    let r = Rational::new(num, scale);
    Ok(if neg { -r } else { r })
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Format a rational as `p/q` (always with a denominator).
pub fn fmt_rational(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Symbolic order `λ^{p + qα}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AsymptoticExponent {
    pub p: i64,
    pub q: i64,
}

/// Outcome of comparing two exponents at a fixed `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentOrder {
    Less,
    Equal,
    Greater,
    /// Same value at this `α` but different `(p, q)`.
    Tie,
}

impl AsymptoticExponent {
    pub const ZERO: AsymptoticExponent = AsymptoticExponent { p: 0, q: 0 };
    /// Order of `γ`, dominated by the `λ̄` terms.
    pub const GAMMA: AsymptoticExponent = AsymptoticExponent { p: 1, q: 1 };

    pub fn new(p: i64, q: i64) -> Self {
        AsymptoticExponent { p, q }
    }

    /// Exponent of the weight of a configuration with `nu` particles on U and `nv` on V.
    pub fn weight(nu: usize, nv: usize) -> Self {
        AsymptoticExponent {
            p: (nu + nv) as i64,
            q: nv as i64,
        }
    }

    pub fn value(&self, alpha: Alpha) -> Rational {
        Rational::from_integer(self.p) + Rational::from_integer(self.q) * alpha.value()
    }

    pub fn value_f64(&self, alpha: Alpha) -> f64 {
        ratio_to_f64(self.value(alpha))
    }

    pub fn cmp_value(&self, other: &Self, alpha: Alpha) -> Ordering {
        self.value(alpha).cmp(&other.value(alpha))
    }

    pub fn compare(&self, other: &Self, alpha: Alpha) -> ExponentOrder {
        match self.cmp_value(other, alpha) {
            Ordering::Less => ExponentOrder::Less,
            Ordering::Greater => ExponentOrder::Greater,
            Ordering::Equal if self == other => ExponentOrder::Equal,
            Ordering::Equal => ExponentOrder::Tie,
        }
    }

    pub fn max_at(self, other: Self, alpha: Alpha) -> Self {
        if other.cmp_value(&self, alpha) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn scale(self, k: i64) -> Self {
        AsymptoticExponent {
            p: self.p * k,
            q: self.q * k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q == 0
    }

    pub fn abs_value(&self, alpha: Alpha) -> Rational {
        self.value(alpha).abs()
    }
}

impl Add for AsymptoticExponent {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        AsymptoticExponent {
            p: self.p + o.p,
            q: self.q + o.q,
        }
    }
}

impl Sub for AsymptoticExponent {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        AsymptoticExponent {
            p: self.p - o.p,
            q: self.q - o.q,
        }
    }
}

impl Neg for AsymptoticExponent {
    type Output = Self;
    fn neg(self) -> Self {
        AsymptoticExponent {
            p: -self.p,
            q: -self.q,
        }
    }
}

impl fmt::Display for AsymptoticExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda^({}{:+}*alpha)", self.p, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(Alpha::from_str("7/10").unwrap().value(), Rational::new(7, 10));
        assert_eq!(Alpha::from_str("0.55").unwrap().value(), Rational::new(11, 20));
        assert_eq!(Alpha::from_str(" 1/2 ").unwrap().value(), Rational::new(1, 2));
        assert!(Alpha::from_str("1").is_err());
        assert!(Alpha::from_str("0").is_err());
        assert!(Alpha::from_str("3/2").is_err());
        assert!(Alpha::from_str("1/0").is_err());
        assert!(Alpha::from_str("abc").is_err());
        assert!(Alpha::from_str(".").is_err());
    }

    #[test]
    fn kappa_matches_ceiling() {
        assert_eq!(Alpha::new(7, 10).unwrap().default_kappa(), 1);
        assert_eq!(Alpha::new(3, 10).unwrap().default_kappa(), 3);
        assert_eq!(Alpha::new(1, 2).unwrap().default_kappa(), 1);
    }

    #[test]
    fn tie_is_distinguished_from_equality() {
        let a = Alpha::new(1, 2).unwrap();
        let x = AsymptoticExponent::new(3, 0);
        let y = AsymptoticExponent::new(2, 2);
        assert_eq!(x.compare(&y, a), ExponentOrder::Tie);
        assert_eq!(x.compare(&x, a), ExponentOrder::Equal);
        assert_eq!(x.compare(&AsymptoticExponent::new(4, 0), a), ExponentOrder::Less);
    }

    proptest! {
        #[test]
        fn display_round_trips(n in 1i64..1000, d in 2i64..1000) {
            prop_assume!(n < d);
            let a = Alpha::new(n, d).unwrap();
            let back: Alpha = a.to_string().parse().unwrap();
            prop_assert_eq!(a, back);
        }

        #[test]
        fn value_is_additive(p1 in -50i64..50, q1 in -50i64..50, p2 in -50i64..50, q2 in -50i64..50) {
            let a = Alpha::new(3, 7).unwrap();
            let x = AsymptoticExponent::new(p1, q1);
            let y = AsymptoticExponent::new(p2, q2);
            prop_assert_eq!((x + y).value(a), x.value(a) + y.value(a));
            prop_assert_eq!((x - y).value(a), x.value(a) - y.value(a));
        }

        #[test]
        fn parse_never_panics(s in ".{0,30}") {
            let _ = parse_rational(&s);
        }
    }
}
