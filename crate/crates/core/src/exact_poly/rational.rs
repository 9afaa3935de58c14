//! Exact rational scalars and their text forms.
//!
//! Every exact path in the crate runs on [`Rational`]. The canonical wire form
//! is `"p/q"` with `q > 0` and `gcd(p, q) = 1`, emitted even for integers.

use std::fmt;
use std::str::FromStr;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Rational {
    let base = int(2);
    if e >= 0 {
        num::pow(base, e as usize)
    } else {
        num::pow(base, (-e) as usize).recip()
    }
}

pub fn powi(base: &Rational, e: usize) -> Rational {
    num::pow(base.clone(), e)
}

/// Exact `k!`.
pub fn factorial(k: usize) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    Rational::from_integer(acc)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

/// Canonical `"p/q"` string.
pub fn to_pq(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.125"` or `"1e-6"`.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let joined = format!("{whole}{frac}");
    let n = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).map_err(|_| err())?;
    let mut value = Rational::from_integer(n) * pow10(-(frac.len() as i64) + exponent);
    if neg {
        value = -value;
    }
    Ok(value)
}

fn pow10(e: i64) -> Rational {
    let ten = int(10);
    if e >= 0 {
        num::pow(ten, e as usize)
    } else {
        num::pow(ten, (-e) as usize).recip()
    }
}

/// Decimal string with exactly `digits` fractional digits, rounded half away from zero.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    let scale = num::pow(BigInt::from(10), digits);
    let scaled = q.abs() * Rational::from_integer(scale.clone());
    let (quot, rem) = scaled.numer().div_rem(scaled.denom());
    let twice = rem * BigInt::from(2);
    let rounded = if &twice >= scaled.denom() { quot + 1 } else { quot };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if q.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fallback for huge numerators/denominators: compare bit lengths.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 0 {
        Rational::new(n.clone(), d.clone() << (shift as usize))
    } else {
        Rational::new(n.clone() << ((-shift) as usize), d.clone())
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift.clamp(-2000, 2000) as i32)
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::Parse(v.to_string()))
}

pub fn sign(q: &Rational) -> i8 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

/// How rationals are rendered in reports and exported files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    #[default]
    Exact,
    Decimal(usize),
}

impl NumberFormat {
    pub fn render(&self, q: &Rational) -> String {
        match self {
            NumberFormat::Exact => to_pq(q),
            NumberFormat::Decimal(k) => to_decimal(q, *k),
        }
    }
}

/// Serde carrier for a rational in `"p/q"` form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Rational);

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_pq(&self.0))
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_pq(&self.0))
    }
}

impl From<Rational> for Exact {
    fn from(q: Rational) -> Self {
        Exact(q)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_pq(&self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        let raw = Raw::deserialize(deserializer)?;
        match raw {
            Raw::Text(s) => parse(&s).map(Exact).map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(Exact(int(n))),
        }
    }
}

/// A value with a certified absolute error bound; `error == 0` marks an exact result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedValue {
    pub value: Rational,
    pub error: Rational,
}

impl CertifiedValue {
    pub fn exact(value: Rational) -> Self {
        CertifiedValue { value, error: Rational::zero() }
    }

    pub fn with_error(value: Rational, error: Rational) -> Self {
        CertifiedValue { value, error: error.abs() }
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }

    pub fn lower(&self) -> Rational {
        &self.value - &self.error
    }

    pub fn upper(&self) -> Rational {
        &self.value + &self.error
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    /// Enclosure from exact lower and upper bounds.
    pub fn from_bounds(lo: Rational, hi: Rational) -> Self {
        let value = (&lo + &hi) / int(2);
        let error = (&hi - &lo) / int(2);
        CertifiedValue { value, error }
    }

    pub fn add(&self, other: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            value: &self.value + &other.value,
            error: &self.error + &other.error,
        }
    }

    pub fn scale(&self, c: &Rational) -> CertifiedValue {
        CertifiedValue { value: &self.value * c, error: &self.error * c.abs() }
    }

    /// Quotient of two enclosures; the denominator enclosure must exclude zero.
    pub fn div(&self, other: &CertifiedValue) -> Result<CertifiedValue> {
        if self.is_exact() && other.is_exact() {
            if other.value.is_zero() {
                return Err(Error::Degenerate("division by zero".into()));
            }
            return Ok(CertifiedValue::exact(&self.value / &other.value));
        }
        let (dlo, dhi) = (other.lower(), other.upper());
        if !(dlo.is_positive() || dhi.is_negative()) {
            return Err(Error::Degenerate("denominator enclosure contains zero".into()));
        }
        let candidates = [
            self.lower() / &dlo,
            self.lower() / &dhi,
            self.upper() / &dlo,
            self.upper() / &dhi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        let value = &self.value / &other.value;
        let error = max(&(&hi - &value), &(&value - &lo));
        Ok(CertifiedValue { value, error })
    }

    pub fn render(&self, fmt: &NumberFormat) -> String {
        fmt.render(&self.value)
    }
}

/// Default absolute error bound for certified (non-exact) results: `10^-12`.
pub fn default_tolerance() -> Rational {
    pow10(-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-1e-3").unwrap(), ratio(-1, 1000));
        assert_eq!(parse("2/-4").unwrap(), ratio(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn canonical_pq() {
        assert_eq!(to_pq(&ratio(6, -4)), "-3/2");
        assert_eq!(to_pq(&int(5)), "5/1");
        assert_eq!(to_pq(&int(0)), "0/1");
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(to_decimal(&ratio(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&int(7), 0), "7");
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(5), int(120));
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(pow2(-3), ratio(1, 8));
    }

    #[test]
    fn huge_to_f64() {
        let tiny = pow2(-1500);
        assert_eq!(to_f64(&tiny), 0.0);
        let x = pow2(-160) * int(3);
        let v = to_f64(&x);
        assert!((v / 2f64.powi(-160) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn certified_division() {
        let a = CertifiedValue::with_error(int(1), ratio(1, 100));
        let b = CertifiedValue::exact(int(2));
        let q = a.div(&b).unwrap();
        assert_eq!(q.value, ratio(1, 2));
        assert_eq!(q.error, ratio(1, 200));
    }
}
