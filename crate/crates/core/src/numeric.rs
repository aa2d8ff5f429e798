//! Exact rationals, thresholds and their decimal rendering.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = Ratio<u64>;

/// Renders `r` with exactly six fractional digits, rounding half up.
pub fn decimal6(r: &Rational) -> String {
    let num = *r.numer() as u128;
    let den = *r.denom() as u128;
    let scaled = (2 * num * 1_000_000 + den) / (2 * den);
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

/// Parses `"7"`, `"7/3"` or a finite decimal such as `"0.16"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let bad = || Error::Argument(format!("not a non-negative rational: {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        return Ok(Rational::new(num, den));
    }
    Ok(Rational::from_integer(text.parse().map_err(|_| bad())?))
}

fn fraction_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A ratio that may be infinite (a disconnected pair in a solution).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRatio {
    Finite(Rational),
    Infinite,
}

impl ExtRatio {
    pub fn one() -> Self {
        ExtRatio::Finite(Rational::from_integer(1))
    }

    pub fn decimal(&self) -> String {
        match self {
            ExtRatio::Finite(r) => decimal6(r),
            ExtRatio::Infinite => "inf".to_string(),
        }
    }
}

impl fmt::Display for ExtRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRatio::Finite(r) => f.write_str(&fraction_string(r)),
            ExtRatio::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.trim() == "inf" {
            Ok(ExtRatio::Infinite)
        } else {
            parse_rational(s).map(ExtRatio::Finite)
        }
    }
}

impl Serialize for ExtRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The short-edge threshold `L`.
///
/// Either an explicit rational, or `log2(k)/100` kept symbolic when `k` is
/// not a power of two so that comparisons with integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Exact(Rational),
    Log2Over100 { k: u128 },
}

impl Threshold {
    pub fn log2_over_100(k: u128) -> Self {
        if k.is_power_of_two() {
            Threshold::Exact(Rational::new(k.trailing_zeros() as u64, 100))
        } else {
            Threshold::Log2Over100 { k }
        }
    }

    pub fn integer(x: u64) -> Self {
        Threshold::Exact(Rational::from_integer(x))
    }

    /// `d <= L`.
    pub fn admits(&self, d: u64) -> bool {
        match *self {
            Threshold::Exact(r) => Rational::from_integer(d) <= r,
            // 100 d <= log2 k  <=>  2^(100 d) <= k
            Threshold::Log2Over100 { k } => pow2(d.saturating_mul(100)).is_some_and(|p| p <= k),
        }
    }

    /// `w >= L`.
    pub fn reached_by(&self, w: u64) -> bool {
        match *self {
            Threshold::Exact(r) => Rational::from_integer(w) >= r,
            // log2 k <= 100 w  <=>  k <= 2^(100 w)
            Threshold::Log2Over100 { k } => pow2(w.saturating_mul(100)).is_none_or(|p| k <= p),
        }
    }

    /// `L < x`.
    pub fn below(&self, x: u64) -> bool {
        match *self {
            Threshold::Exact(r) => r < Rational::from_integer(x),
            Threshold::Log2Over100 { k } => pow2(x.saturating_mul(100)).is_none_or(|p| k < p),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Threshold::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Threshold::Log2Over100 { k } => (*k as f64).log2() / 100.0,
        }
    }

    pub fn decimal(&self) -> String {
        match self {
            Threshold::Exact(r) => decimal6(r),
            Threshold::Log2Over100 { .. } => format!("{:.6}", self.to_f64()),
        }
    }
}

/// `2^e` if it fits in `u128`.
fn pow2(e: u64) -> Option<u128> {
    (e < 128).then(|| 1u128 << e)
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Exact(r) => f.write_str(&fraction_string(r)),
            Threshold::Log2Over100 { k } => write!(f, "log2({k})/100"),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("log2(").and_then(|r| r.strip_suffix(")/100")) {
            let k: u128 = inner.parse().map_err(|_| Error::Argument(format!("bad threshold {s:?}")))?;
            return Ok(Threshold::log2_over_100(k));
        }
        parse_rational(s).map(Threshold::Exact)
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering_rounds_half_up() {
        assert_eq!(decimal6(&Rational::new(7, 3)), "2.333333");
        assert_eq!(decimal6(&Rational::new(2, 3)), "0.666667");
        assert_eq!(decimal6(&Rational::new(1, 2_000_000)), "0.000001");
        assert_eq!(decimal6(&Rational::from_integer(5)), "5.000000");
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("0.16").unwrap(), Rational::new(4, 25));
        assert_eq!(parse_rational("16/100").unwrap(), Rational::new(4, 25));
        assert_eq!(parse_rational("4").unwrap(), Rational::from_integer(4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("-1").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn power_of_two_threshold_is_exact() {
        assert_eq!(Threshold::log2_over_100(1 << 16), Threshold::Exact(Rational::new(16, 100)));
        let t: Threshold = "log2(65536)/100".parse().unwrap();
        assert_eq!(t.to_string(), "4/25");
    }

    #[test]
    fn symbolic_threshold_comparisons() {
        // log2(1000)/100 ~ 0.0997
        let t = Threshold::log2_over_100(1000);
        assert!(t.admits(0));
        assert!(!t.admits(1));
        assert!(t.reached_by(1));
        assert!(!t.reached_by(0));
        assert!(t.below(1));
        let round: Threshold = t.to_string().parse().unwrap();
        assert_eq!(round, t);
        // k just above 2^100: log2 k / 100 slightly above 1
        let big = Threshold::log2_over_100((1u128 << 100) + 1);
        assert!(big.admits(1));
        assert!(!big.reached_by(1));
        assert!(big.reached_by(2));
        assert!(!big.below(1));
    }

    #[test]
    fn ext_ratio_orders_infinity_last() {
        let a = ExtRatio::Finite(Rational::new(5, 2));
        assert!(a < ExtRatio::Infinite);
        assert_eq!("5/2".parse::<ExtRatio>().unwrap(), a);
        assert_eq!(ExtRatio::Infinite.to_string(), "inf");
    }
}
