//! Scalar abstraction for the tradeoff formulas.
//!
//! The surfaces and bound evaluators are ordinary ordered-field expressions,
//! so they are written once over [`Scalar`] and instantiated with exact
//! rationals (the default throughout this crate) or with `f32`/`f64` when an
//! approximate evaluation is enough. Exact-equality assertions only make
//! sense for the rational instantiation.

use num_traits::Num;
use std::fmt::{Debug, Display};
use std::ops::Neg;

pub trait Scalar: Num + Neg<Output = Self> + PartialOrd + Copy + Debug + Display {
    fn from_int(value: i64) -> Self;

    /// The value `numer / denom`. Panics if `denom == 0`.
    fn from_ratio(numer: i64, denom: i64) -> Self;
}

impl Scalar for f64 {
    fn from_int(value: i64) -> Self {
        value as f64
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }
}

impl Scalar for f32 {
    fn from_int(value: i64) -> Self {
        value as f32
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f32 / denom as f32
    }
}

impl Scalar for num_rational::Rational64 {
    fn from_int(value: i64) -> Self {
        Self::from_integer(value)
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self::new(numer, denom)
    }
}

/// Shorthand for `S::from_ratio` used by the formula-heavy modules.
pub(crate) fn ratio<S: Scalar>(numer: i64, denom: i64) -> S {
    S::from_ratio(numer, denom)
}

/// Shorthand for `S::from_int`.
pub(crate) fn int<S: Scalar>(value: i64) -> S {
    S::from_int(value)
}
