//! Arbitrary-width integers with a machine-word fast path.
//!
//! Values stay in `i64` while every operation fits and promote to [`BigInt`]
//! on overflow. Division truncates toward zero and the remainder takes the
//! sign of the dividend, for both representations.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

#[derive(Clone, Debug)]
pub enum Int {
    Small(i64),
    Big(BigInt),
}

impl Int {
    pub const ZERO: Int = Int::Small(0);

    fn normalize(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Int::Small(v) => *v < 0,
            Int::Big(b) => b.is_negative(),
        }
    }

    /// Index into a sequence of length `len`, if in range.
    pub fn as_index(&self, len: usize) -> Option<usize> {
        match self {
            Int::Small(v) if *v >= 0 && (*v as u64) < len as u64 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn add(&self, rhs: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_add(*b) {
                return Int::Small(v);
            }
        }
        Int::normalize(self.to_big() + rhs.to_big())
    }

    pub fn sub(&self, rhs: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_sub(*b) {
                return Int::Small(v);
            }
        }
        Int::normalize(self.to_big() - rhs.to_big())
    }

    pub fn mul(&self, rhs: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_mul(*b) {
                return Int::Small(v);
            }
        }
        Int::normalize(self.to_big() * rhs.to_big())
    }

    /// Truncating division; `None` when `rhs` is zero.
    pub fn div(&self, rhs: &Int) -> Option<Int> {
        if rhs.is_zero() {
            return None;
        }
        if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_div(*b) {
                return Some(Int::Small(v));
            }
        }
        Some(Int::normalize(self.to_big() / rhs.to_big()))
    }

    /// Remainder with the sign of the dividend; `None` when `rhs` is zero.
    pub fn rem(&self, rhs: &Int) -> Option<Int> {
        if rhs.is_zero() {
            return None;
        }
        if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_rem(*b) {
                return Some(Int::Small(v));
            }
        }
        Some(Int::normalize(self.to_big() % rhs.to_big()))
    }

    pub fn neg(&self) -> Int {
        if let Int::Small(a) = self {
            if let Some(v) = a.checked_neg() {
                return Int::Small(v);
            }
        }
        Int::normalize(-self.to_big())
    }

    pub fn parse_decimal(digits: &str) -> Option<Int> {
        if let Ok(v) = digits.parse::<i64>() {
            return Some(Int::Small(v));
        }
        digits.parse::<BigInt>().ok().map(Int::normalize)
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Self {
        Int::Small(v as i64)
    }
}

impl From<usize> for Int {
    fn from(v: usize) -> Self {
        match i64::try_from(v) {
            Ok(v) => Int::Small(v),
            Err(_) => Int::Big(BigInt::from(v)),
        }
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Int {}

impl std::hash::Hash for Int {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        // Big values are always outside the i64 range, so the two arms never collide
        // for equal numbers.
        match self {
            Int::Small(v) => v.hash(state),
            Int::Big(b) => b.hash(state),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncating_division_and_dividend_sign_remainder() {
        let i = |v: i64| Int::from(v);
        assert_eq!(i(7).div(&i(2)), Some(i(3)));
        assert_eq!(i(-7).div(&i(2)), Some(i(-3)));
        assert_eq!(i(7).div(&i(-2)), Some(i(-3)));
        assert_eq!(i(-7).rem(&i(2)), Some(i(-1)));
        assert_eq!(i(7).rem(&i(-2)), Some(i(1)));
        assert_eq!(i(1).div(&i(0)), None);
        assert_eq!(i(1).rem(&i(0)), None);
    }

    #[test]
    fn promotes_on_overflow_and_demotes_back() {
        let big = Int::from(i64::MAX).add(&Int::from(1));
        assert!(matches!(big, Int::Big(_)));
        assert_eq!(big.to_string(), "9223372036854775808");
        let back = big.sub(&Int::from(1));
        assert_eq!(back, Int::Small(i64::MAX));
        assert!(matches!(back, Int::Small(_)));
        assert_eq!(Int::from(i64::MIN).neg().to_string(), "9223372036854775808");
        assert_eq!(Int::from(i64::MIN).div(&Int::from(-1)).unwrap().to_string(), "9223372036854775808");
    }

    #[test]
    fn mixed_comparisons() {
        let big = Int::parse_decimal("100000000000000000000000").unwrap();
        assert!(big > Int::from(5));
        assert!(big.neg() < Int::from(i64::MIN));
        assert_eq!(Int::parse_decimal("42"), Some(Int::from(42)));
    }
}
