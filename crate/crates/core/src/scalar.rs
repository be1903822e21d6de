//! Exact scalars.
//!
//! Every finite `f64` is a dyadic rational, so inputs convert without loss and
//! all closed-form constructions (composition, inverses, jump removal,
//! polynomial antiderivatives) stay exact. Conversion back to `f64` happens
//! only at reporting boundaries and is correctly rounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

/// Exact conversion of a finite float.
pub fn from_f64(v: f64) -> Result<Scalar> {
    BigRational::from_float(v).ok_or_else(|| Error::parameter(format!("non-finite value {v}")))
}

/// Exact conversion of a finite float; panics on NaN or infinity.
///
/// Intended for literals in builders and tests.
pub fn sc(v: f64) -> Scalar {
    BigRational::from_float(v).unwrap_or_else(|| panic!("non-finite scalar literal {v}"))
}

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Scalar {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Nearest `f64` (saturating to infinity for out-of-range magnitudes).
pub fn to_f64(v: &Scalar) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        if v.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// True when `v` is exactly representable as an `f64`.
pub fn is_f64_exact(v: &Scalar) -> bool {
    let f = to_f64(v);
    f.is_finite() && BigRational::from_float(f).is_some_and(|back| &back == v)
}

pub(crate) fn zero() -> Scalar {
    Scalar::zero()
}

pub(crate) fn half() -> Scalar {
    ratio(1, 2)
}

pub(crate) fn max_ref<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
    if a >= b {
        a
    } else {
        b
    }
}

pub(crate) fn min_ref<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
    if a <= b {
        a
    } else {
        b
    }
}

/// Sorts and removes duplicates.
pub(crate) fn sort_dedup(values: &mut Vec<Scalar>) {
    values.sort();
    values.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_convert_exactly() {
        let tenth = sc(0.1);
        assert_ne!(tenth, ratio(1, 10));
        assert_eq!(to_f64(&tenth), 0.1);
        assert!(is_f64_exact(&tenth));
        assert!(!is_f64_exact(&ratio(1, 3)));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(from_f64(f64::NAN).is_err());
        assert!(from_f64(f64::INFINITY).is_err());
    }
}
