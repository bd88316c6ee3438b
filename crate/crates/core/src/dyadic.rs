//! Exact non-negative dyadic rationals `num / 2^exp`.
//!
//! Every probability and mixture weight produced by Clifford circuits with
//! Pauli measurements is of this form, so weights never touch floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// Largest supported denominator exponent.
const MAX_EXP: u32 = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    // normalized: num is odd, or num == 0 and exp == 0
    num: u128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: u128, exp: u32) -> Self {
        Self { num, exp }.normalized()
    }

    /// `2^-k`.
    pub fn half_pow(k: u32) -> Self {
        assert!(k <= MAX_EXP, "dyadic exponent {k} exceeds {MAX_EXP}");
        Self { num: 1, exp: k }
    }

    pub fn numerator(self) -> u128 {
        self.num
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            return Self::ZERO;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
        self
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * (-(self.exp as f64)).exp2()
    }

    /// Exact quotient, defined only when the result is again dyadic.
    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::ZERO);
        }
        // rhs.num is odd after normalization
        if self.num % rhs.num != 0 {
            return None;
        }
        let q = self.num / rhs.num;
        if self.exp >= rhs.exp {
            Some(Self::new(q, self.exp - rhs.exp))
        } else {
            let shift = rhs.exp - self.exp;
            if shift >= 128 || q.leading_zeros() < shift {
                return None;
            }
            Some(Self::new(q << shift, 0))
        }
    }

    fn aligned(self, rhs: Self) -> (u128, u128, u32) {
        let exp = self.exp.max(rhs.exp);
        let a = self
            .num
            .checked_shl(exp - self.exp)
            .filter(|v| v >> (exp - self.exp) == self.num)
            .expect("dyadic numerator overflow");
        let b = rhs
            .num
            .checked_shl(exp - rhs.exp)
            .filter(|v| v >> (exp - rhs.exp) == rhs.num)
            .expect("dyadic numerator overflow");
        (a, b, exp)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        let (a, b, exp) = self.aligned(rhs);
        a.checked_sub(b).map(|d| Self::new(d, exp))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::new(a.checked_add(b).expect("dyadic numerator overflow"), exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp + rhs.exp;
        assert!(exp <= MAX_EXP, "dyadic exponent {exp} exceeds {MAX_EXP}");
        Dyadic::new(
            self.num.checked_mul(rhs.num).expect("dyadic numerator overflow"),
            exp,
        )
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarters_sum_to_one() {
        let q = Dyadic::half_pow(2);
        assert_eq!(q + q + q + q, Dyadic::ONE);
        assert_eq!((q + q).to_string(), "1/2");
    }

    #[test]
    fn division_only_when_dyadic() {
        let three_quarters = Dyadic::new(3, 2);
        let quarter = Dyadic::half_pow(2);
        assert_eq!(quarter.checked_div(quarter), Some(Dyadic::ONE));
        assert_eq!(quarter.checked_div(Dyadic::half_pow(1)), Some(Dyadic::half_pow(1)));
        assert_eq!(quarter.checked_div(three_quarters), None);
        assert_eq!(three_quarters.checked_div(three_quarters), Some(Dyadic::ONE));
        assert_eq!(Dyadic::ONE.checked_div(Dyadic::half_pow(3)), Some(Dyadic::new(8, 0)));
    }

    #[test]
    fn normalizes_even_numerators() {
        assert_eq!(Dyadic::new(4, 4), Dyadic::half_pow(2));
        assert_eq!(Dyadic::new(0, 9), Dyadic::ZERO);
    }

    #[test]
    fn ordering_and_subtraction() {
        assert!(Dyadic::half_pow(3) < Dyadic::half_pow(2));
        assert_eq!(Dyadic::ONE.checked_sub(Dyadic::half_pow(2)), Some(Dyadic::new(3, 2)));
        assert_eq!(Dyadic::half_pow(2).checked_sub(Dyadic::ONE), None);
        assert_eq!(Dyadic::new(3, 4).to_f64(), 0.1875);
    }
}
