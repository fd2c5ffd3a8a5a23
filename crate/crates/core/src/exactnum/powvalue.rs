use std::cmp::Ordering;
use std::fmt;

use num::BigInt;

/// A positive quantity of the form `(1+1/L)^a * (1+1/L')^(b*eps)` for a
/// symbolic positive infinitesimal `eps`, stored as the exponent pair
/// `(a, b)`.
///
/// Multiplication and division act by exponent addition and subtraction.
/// Comparison is lexicographic on `(a, b)`, which orders the denoted reals
/// for every sufficiently small positive `eps`. The derived `Ord` gives
/// exactly that order because the fields are declared real part first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PowValue {
    /// Exponent of `1 + 1/L` (the real part).
    pub real_exp: BigInt,
    /// Exponent of `1 + 1/L'` scaled by the infinitesimal.
    pub eps_exp: BigInt,
}

impl PowValue {
    pub fn new(real_exp: impl Into<BigInt>, eps_exp: impl Into<BigInt>) -> Self {
        PowValue {
            real_exp: real_exp.into(),
            eps_exp: eps_exp.into(),
        }
    }

    /// The multiplicative unit `1 = (1+1/L)^0 (1+1/L')^0`.
    pub fn one() -> Self {
        PowValue::new(0, 0)
    }

    pub fn is_one(&self) -> bool {
        use num::Zero;
        self.real_exp.is_zero() && self.eps_exp.is_zero()
    }

    pub fn mul(&self, other: &PowValue) -> PowValue {
        PowValue {
            real_exp: &self.real_exp + &other.real_exp,
            eps_exp: &self.eps_exp + &other.eps_exp,
        }
    }

    pub fn div(&self, other: &PowValue) -> PowValue {
        PowValue {
            real_exp: &self.real_exp - &other.real_exp,
            eps_exp: &self.eps_exp - &other.eps_exp,
        }
    }
}

/// Order of `x` and `y` as reals for all sufficiently small positive `eps`.
pub fn lex_cmp(x: &PowValue, y: &PowValue) -> Ordering {
    x.cmp(y)
}

impl fmt::Display for PowValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};{})", self.real_exp, self.eps_exp)
    }
}
