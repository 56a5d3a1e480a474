//! Coefficient fields.
//!
//! All polynomial, matrix, and series code in this crate is written against
//! [`CoeffField`], a context-style field trait (methods take `&self`, elements
//! are plain data). Three implementations exist:
//!
//! * [`QField`] — exact rationals; the user-facing coefficient domain.
//! * `FracField` (in [`crate::ratfunc`]) — rational functions in the base
//!   parameters; used internally so that ideal computations happen honestly
//!   over the base field Q(t1..tm) rather than over Q with parameters as
//!   extra polynomial variables.
//! * `CoordField` (in [`crate::coordfield`]) — the function field of a
//!   variety, with equality decided by normal form against a fixed
//!   Groebner basis.

use crate::error::{Error, Result};
use crate::rational::{self, Rat};
use num_traits::{One, Signed, Zero};

pub trait CoeffField: Clone + PartialEq + std::fmt::Debug {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse. Errors on zero.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn from_rat(&self, r: &Rat) -> Self::Elem;
    fn fmt_elem(&self, a: &Self::Elem) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, &self.one()))
    }

    /// Field-aware equality. The default is structural; fields with
    /// non-canonical element representations (quotient fields) override.
    fn eq_elem(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    /// Scalar `s` such that multiplying a reduced fraction num/den through by
    /// `s` yields the canonical representative. `num` and `den` are the
    /// coefficient lists, `den_lead` the leading coefficient of `den`.
    fn fraction_scale(&self, num: &[Self::Elem], den: &[Self::Elem], den_lead: &Self::Elem)
        -> Self::Elem;

    /// True when `fmt_elem` output may need wrapping before a `*` in
    /// polynomial display.
    fn elem_needs_parens(&self, _a: &Self::Elem) -> bool {
        false
    }

    /// Split an element into (is_negative, magnitude) for display. Fields
    /// without a meaningful sign return (false, clone).
    fn split_sign(&self, a: &Self::Elem) -> (bool, Self::Elem) {
        (false, a.clone())
    }
}

/// The field of exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QField;

impl CoeffField for QField {
    type Elem = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }

    fn one(&self) -> Rat {
        Rat::one()
    }

    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }

    fn neg(&self, a: &Rat) -> Rat {
        -a
    }

    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }

    fn inv(&self, a: &Rat) -> Result<Rat> {
        if a.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(a.recip())
    }

    fn from_rat(&self, r: &Rat) -> Rat {
        r.clone()
    }

    fn fmt_elem(&self, a: &Rat) -> String {
        rational::rat_to_string(a)
    }

    fn eq_elem(&self, a: &Rat, b: &Rat) -> bool {
        a == b
    }

    fn fraction_scale(&self, num: &[Rat], den: &[Rat], den_lead: &Rat) -> Rat {
        // Joint integer-primitive scaling with positive leading denominator
        // coefficient: gcd(2x, 4) normalization sends (2x, 4) to (x, 2).
        let all: Vec<&Rat> = num.iter().chain(den.iter()).collect();
        let mut s = rational::joint_integer_scale(&all);
        if (den_lead * &s).is_negative() {
            s = -s;
        }
        s
    }

    fn split_sign(&self, a: &Rat) -> (bool, Rat) {
        if a.is_negative() {
            (true, -a)
        } else {
            (false, a.clone())
        }
    }
}
