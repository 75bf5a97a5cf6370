//! Exact fixed-point edge weights.
//!
//! Decimal weight strings are scaled by `10^decimals` into integers at load
//! time, so addition and comparison are exact everywhere downstream. Strictly
//! positive gains are then strictly positive integers, which is what makes
//! the refinement passes provably terminating.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A weight in raw fixed-point units. Interpretation (how many decimal
/// places one unit represents) lives in [`WeightScale`].
#[derive(
    Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Weight(i64);

impl Weight {
    pub const ZERO: Weight = Weight(0);

    pub const fn from_raw(raw: i64) -> Weight {
        Weight(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.0)
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        Weight(self.0 - rhs.0)
    }
}

impl SubAssign for Weight {
    fn sub_assign(&mut self, rhs: Weight) {
        self.0 -= rhs.0;
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        Weight(iter.map(|w| w.0).sum())
    }
}

/// Number of decimal places of the fixed-point representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightScale {
    decimals: u32,
}

pub const MAX_DECIMALS: u32 = 9;

impl Default for WeightScale {
    /// Two decimal places, enough to represent synapse-count style weights
    /// like `2405.0` exactly.
    fn default() -> Self {
        WeightScale { decimals: 2 }
    }
}

impl WeightScale {
    pub fn new(decimals: u32) -> Result<WeightScale, String> {
        if decimals > MAX_DECIMALS {
            return Err(format!(
                "precision of {decimals} decimal places exceeds the maximum of {MAX_DECIMALS}"
            ));
        }
        Ok(WeightScale { decimals })
    }

    pub fn decimals(self) -> u32 {
        self.decimals
    }

    /// Raw units per 1.0 of input weight.
    pub fn factor(self) -> i64 {
        10i64.pow(self.decimals)
    }

    /// Parse a decimal string into an exact nonnegative weight.
    ///
    /// Accepts `123`, `123.45`, `.5`, `5.`; rejects negatives, exponents and
    /// fractional digits beyond the scale (unless they are zeros).
    pub fn parse(self, text: &str) -> Result<Weight, String> {
        let s = text.trim();
        if s.is_empty() {
            return Err("empty weight".to_string());
        }
        if let Some(rest) = s.strip_prefix('-') {
            // "-0" and friends are still rejected: weights are declared
            // nonnegative and a negative sign is a data error worth naming.
            let _ = rest;
            return Err(format!("negative weight `{s}`"));
        }
        let s = s.strip_prefix('+').unwrap_or(s);
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("unparsable weight `{text}`"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(format!("unparsable weight `{text}`"));
        }
        let mut value: i64 = 0;
        for b in int_part.bytes() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as i64))
                .ok_or_else(|| format!("weight `{text}` overflows"))?;
        }
        let scale = self.decimals as usize;
        for (i, b) in frac_part.bytes().enumerate() {
            if i < scale {
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add((b - b'0') as i64))
                    .ok_or_else(|| format!("weight `{text}` overflows"))?;
            } else if b != b'0' {
                return Err(format!(
                    "weight `{text}` has more than {} decimal places",
                    self.decimals
                ));
            }
        }
        for _ in frac_part.len()..scale {
            value = value
                .checked_mul(10)
                .ok_or_else(|| format!("weight `{text}` overflows"))?;
        }
        Ok(Weight(value))
    }

    /// Render a weight with exactly `decimals` fractional digits.
    pub fn format(self, w: Weight) -> String {
        let factor = self.factor();
        let units = w.raw() / factor;
        let frac = (w.raw() % factor).abs();
        if self.decimals == 0 {
            format!("{units}")
        } else {
            format!("{units}.{frac:0width$}", width = self.decimals as usize)
        }
    }

    pub fn to_f64(self, w: Weight) -> f64 {
        w.raw() as f64 / self.factor() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_integers() {
        let s = WeightScale::default();
        assert_eq!(s.parse("5").unwrap().raw(), 500);
        assert_eq!(s.parse("0").unwrap().raw(), 0);
        assert_eq!(s.parse("2405").unwrap().raw(), 240500);
    }

    #[test]
    fn parses_decimals_exactly() {
        let s = WeightScale::default();
        assert_eq!(s.parse("2.0").unwrap().raw(), 200);
        assert_eq!(s.parse("2.5").unwrap().raw(), 250);
        assert_eq!(s.parse("2.50").unwrap().raw(), 250);
        assert_eq!(s.parse("2.500").unwrap().raw(), 250);
        assert_eq!(s.parse(".5").unwrap().raw(), 50);
        assert_eq!(s.parse("5.").unwrap().raw(), 500);
    }

    #[test]
    fn rejects_inexact_and_malformed() {
        let s = WeightScale::default();
        assert!(s.parse("2.505").is_err());
        assert!(s.parse("-1").is_err());
        assert!(s.parse("-0").is_err());
        assert!(s.parse("1e3").is_err());
        assert!(s.parse("").is_err());
        assert!(s.parse(".").is_err());
        assert!(s.parse("abc").is_err());
        assert!(s.parse("99999999999999999999").is_err());
    }

    #[test]
    fn zero_decimals_scale() {
        let s = WeightScale::new(0).unwrap();
        assert_eq!(s.parse("7").unwrap().raw(), 7);
        assert!(s.parse("7.5").is_err());
        assert_eq!(s.parse("7.0").unwrap().raw(), 7);
        assert_eq!(s.format(Weight::from_raw(7)), "7");
    }

    #[test]
    fn formats_round_trip() {
        let s = WeightScale::default();
        for raw in [0, 1, 99, 100, 101, 240500, 7_410_000] {
            let text = s.format(Weight::from_raw(raw));
            assert_eq!(s.parse(&text).unwrap().raw(), raw, "text {text}");
        }
        assert_eq!(s.format(Weight::from_raw(250)), "2.50");
    }

    #[test]
    fn scale_cap() {
        assert!(WeightScale::new(MAX_DECIMALS).is_ok());
        assert!(WeightScale::new(MAX_DECIMALS + 1).is_err());
    }
}
