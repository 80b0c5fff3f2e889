//! Exact rational helpers.
//!
//! Dyadic cube corners, cube centers and 6/5-dilated box corners all have
//! denominators dividing `5·2^{s+1}`, so they are represented exactly as
//! `Ratio<i128>`. Boundary samples are `f64` values; when a predicate mixes
//! them with rational box coordinates the comparison is lifted to
//! `BigRational`, which represents every finite `f64` exactly.

use num_bigint::BigInt;
use num_traits::FromPrimitive;

use crate::{BigRat, Rat};

/// `num/den` as an exact rational.
pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}

/// Exact rational from a dyadic value `k · 2^{-s}`.
pub fn dyadic(k: i64, s: u32) -> Rat {
    Rat::new(k as i128, 1i128 << s)
}

pub fn to_big(r: Rat) -> BigRat {
    BigRat::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Exact `BigRational` image of a finite `f64`.
pub fn big_from_f64(x: f64) -> BigRat {
    BigRat::from_f64(x).expect("finite float")
}

/// Exact comparison of a rational against a finite `f64`.
pub fn rat_cmp_f64(r: Rat, x: f64) -> std::cmp::Ordering {
    to_big(r).cmp(&big_from_f64(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn float_lift_is_exact() {
        // 0.1 is not a dyadic rational; its f64 image is slightly above 1/10.
        assert_eq!(rat_cmp_f64(rat(1, 10), 0.1), Ordering::Less);
        assert_eq!(rat_cmp_f64(rat(1, 4), 0.25), Ordering::Equal);
        assert_eq!(rat_cmp_f64(rat(-3, 8), -0.375), Ordering::Equal);
    }

    #[test]
    fn dyadic_corners() {
        assert_eq!(dyadic(-3, 2), rat(-3, 4));
        assert_eq!(dyadic(5, 0), rat(5, 1));
    }
}
