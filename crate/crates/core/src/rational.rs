//! Exact rational scalars.
//!
//! `Rat` is the coefficient bedrock for the whole crate: arbitrary-precision,
//! always reduced, positive denominator. Backed by `num_rational::BigRational`,
//! which maintains those invariants on construction.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rat = num_rational::BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics on zero denominator.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn is_one(r: &Rat) -> bool {
    r.is_one()
}

/// Canonical text form: `n` when integral, `n/d` otherwise. `Display` on
/// `BigRational` already prints this, but we keep one chokepoint so the
/// serializers cannot drift.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// gcd of two integers, nonnegative.
pub fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::gcd(a, b)
}

/// lcm of two integers, nonnegative.
pub fn lcm_int(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::lcm(a, b)
}

/// Scale factor that maps a list of rationals to jointly primitive integers:
/// multiplying every entry by the returned positive rational yields integers
/// with overall gcd 1. Returns 1 for an empty or all-zero list.
pub fn joint_integer_scale(coeffs: &[&Rat]) -> Rat {
    let mut den_lcm = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        den_lcm = lcm_int(&den_lcm, c.denom());
        num_gcd = gcd_int(&num_gcd, c.numer());
    }
    if num_gcd.is_zero() {
        return Rat::one();
    }
    Rat::new(den_lcm, num_gcd.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_forms() {
        assert_eq!(rat_to_string(&rat_int(5)), "5");
        assert_eq!(rat_to_string(&rat(-3, 2)), "-3/2");
        assert_eq!(rat_to_string(&rat(4, 2)), "2");
    }

    #[test]
    fn joint_scale_makes_primitive() {
        let a = rat(2, 1);
        let b = rat(4, 3);
        let s = joint_integer_scale(&[&a, &b]);
        // 2 * 3/2 = 3, 4/3 * 3/2 = 2: integers, gcd 1.
        assert_eq!(&a * &s, rat_int(3));
        assert_eq!(&b * &s, rat_int(2));
    }
}
