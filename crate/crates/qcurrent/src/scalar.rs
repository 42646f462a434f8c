//! Scalar abstraction for series coefficients.
//!
//! The engine is generic over the coefficient field.  Verifiers instantiate
//! it with arbitrary-precision rationals ([`crate::Rat`]); a fixed-width
//! rational is provided for callers that prefer speed over headroom.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, Rational64};
use num_traits::{One, Zero};

/// Coefficient field for the series engine.
///
/// Implementations must be exact: every identity the verifiers certify is an
/// equality of coefficients, so approximate arithmetic would be meaningless.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_int(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Canonical `num/den` rendering used by the text serialization.
    fn fmt_ratio(&self) -> String;
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn fmt_ratio(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for Rational64 {
    fn from_int(n: i64) -> Self {
        Rational64::from_integer(n)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational64::new(num, den)
    }

    fn fmt_ratio(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Binomial coefficient `C(a, j)` for integer `a` (possibly negative) and
/// `j >= 0`, computed exactly in the scalar field as
/// `a (a-1) ... (a-j+1) / j!`.
pub fn binomial<S: Scalar>(a: i64, j: u32) -> S {
    let mut acc = S::one();
    for t in 0..j as i64 {
        acc = acc * S::from_int(a - t) / S::from_int(t + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial::<Rat>(5, 2), Rat::from_int(10));
        assert_eq!(binomial::<Rat>(-1, 3), Rat::from_int(-1));
        // C(-k, j) = (-1)^j C(k+j-1, j)
        assert_eq!(binomial::<Rat>(-2, 3), Rat::from_int(-4));
        assert_eq!(binomial::<Rat>(7, 0), Rat::from_int(1));
    }

    #[test]
    fn ratio_rendering_is_reduced() {
        assert_eq!(Rat::from_ratio(4, 8).fmt_ratio(), "1/2");
        assert_eq!(Rat::from_ratio(-3, 6).fmt_ratio(), "-1/2");
        assert_eq!(Rat::from_int(3).fmt_ratio(), "3/1");
    }
}
