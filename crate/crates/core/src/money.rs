//! Integer-cent money.
//!
//! Every dollar amount in the harness is carried as a whole number of cents so
//! that comparisons are exact and repeated evaluation is bit-identical.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A signed amount of money in cents.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn dollars(dollars: i64) -> Self {
        Money(dollars * 100)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn as_dollars_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn max(self, other: Money) -> Money {
        Money(self.0.max(other.0))
    }

    pub fn min(self, other: Money) -> Money {
        Money(self.0.min(other.0))
    }

    /// Multiplies by `basis_points / 10_000`, rounding half away from zero.
    pub fn mul_bp(self, basis_points: i64) -> Money {
        Money(div_round(self.0 as i128 * basis_points as i128, 10_000))
    }

    /// Multiplies by `num / den`, rounding half away from zero.
    ///
    /// Panics if `den` is zero.
    pub fn mul_ratio(self, num: i64, den: i64) -> Money {
        assert!(den != 0, "zero denominator");
        Money(div_round(self.0 as i128 * num as i128, den as i128))
    }
}

/// Integer division rounding half away from zero.
pub(crate) fn div_round(num: i128, den: i128) -> i64 {
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num / den;
    let r = num % den;
    let q = if 2 * r.abs() >= den { q + num.signum() } else { q };
    q as i64
}

/// Ceiling division for non-negative denominators.
pub(crate) fn div_ceil(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    let q = num / den;
    if num % den > 0 {
        q + 1
    } else {
        q
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a decimal dollar amount: {0:?}")]
pub struct ParseMoneyError(pub String);

impl FromStr for Money {
    type Err = ParseMoneyError;

    /// Parses a plain decimal dollar amount such as `-520`, `12.5` or
    /// `1000.00`. Digits past the cent are rounded half away from zero.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseMoneyError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let whole: i128 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut cents = whole * 100;
        let mut digits = frac_part.bytes().map(|b| (b - b'0') as i128);
        cents += digits.next().unwrap_or(0) * 10;
        cents += digits.next().unwrap_or(0);
        // round half away from zero on the remaining digits
        if digits.next().unwrap_or(0) >= 5 {
            cents += 1;
        }
        let cents = if neg { -cents } else { cents };
        i64::try_from(cents).map(Money).map_err(|_| err())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_formats_cents() {
        assert_eq!(Money::from_cents(-52_000).to_string(), "-520.00");
        assert_eq!(Money::from_cents(5).to_string(), "0.05");
        assert_eq!(Money::dollars(24_800).to_string(), "24800.00");
    }

    #[test]
    fn parse_decimal_replies() {
        assert_eq!("0".parse::<Money>().unwrap(), Money::ZERO);
        assert_eq!("-520.00".parse::<Money>().unwrap(), Money::from_cents(-52_000));
        assert_eq!("12.5".parse::<Money>().unwrap(), Money::from_cents(1_250));
        assert_eq!(".99".parse::<Money>().unwrap(), Money::from_cents(99));
        assert_eq!("1.005".parse::<Money>().unwrap(), Money::from_cents(101));
        assert_eq!("-1.005".parse::<Money>().unwrap(), Money::from_cents(-101));
        assert_eq!(" 7 ".parse::<Money>().unwrap(), Money::dollars(7));
        for bad in ["abc", "", "-", "1e3", "1.2.3", "--1", "NaN"] {
            assert!(bad.parse::<Money>().is_err(), "{bad}");
        }
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(div_round(5, 10), 1);
        assert_eq!(div_round(-5, 10), -1);
        assert_eq!(div_round(4, 10), 0);
        assert_eq!(div_round(-15, 10), -2);
        assert_eq!(Money::from_cents(1).mul_bp(5_000), Money::from_cents(1));
        assert_eq!(Money::dollars(100_000).mul_bp(750), Money::dollars(7_500));
    }

    #[test]
    fn ceil_div_non_negative() {
        assert_eq!(div_ceil(0, 1000), 0);
        assert_eq!(div_ceil(1, 1000), 1);
        assert_eq!(div_ceil(1000, 1000), 1);
        assert_eq!(div_ceil(1001, 1000), 2);
    }

    proptest::proptest! {
        #[test]
        fn display_parse_round_trip(c in -10_000_000_000i64..10_000_000_000) {
            let m = Money::from_cents(c);
            proptest::prop_assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }
    }
}
