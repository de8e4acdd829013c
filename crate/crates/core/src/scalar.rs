//! Scalar abstraction shared by loads, norms and oracles.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like value usable as a load: `f32`, `f64` or [`crate::Rational`].
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive
{
    /// The fraction `p / q`; exact for rationals, rounded for floats.
    fn ratio(p: i64, q: i64) -> Self {
        debug_assert!(q != 0);
        Self::from_i64(p).expect("integer representable") / Self::from_i64(q).expect("integer representable")
    }

    /// Converts an exact rational, rounding if the target is a float.
    fn from_rational(r: &BigRational) -> Self;

    /// Lossy view as `f64`, for reporting.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }
}

impl Scalar for BigRational {
    fn ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats a float with 12 digits after the point.
pub fn fmt_decimal(x: f64) -> String {
    format!("{x:.12}")
}
