//! Rational functions and the parameter fraction field.
//!
//! [`RatFunc`] is a reduced fraction of polynomials: gcd(num, den) = 1 after
//! content-and-primitive-part normalization, with the canonical scaling
//! chosen by the coefficient field (over Q: jointly integer-primitive with
//! positive leading denominator coefficient, so (2x, 4) normalizes to
//! (x, 2); over internal fields: monic denominator). Equality is structural
//! on the canonical form.
//!
//! [`FracField`] packages `RatFunc<QField>` over a fixed parameter registry
//! as a coefficient field of its own, so polynomial rings over Q(t1..tm)
//! are ordinary `MPoly<FracField>` values.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::gcd::poly_gcd;
use crate::mpoly::MPoly;
use crate::rational::Rat;
use crate::vars::{MonomialOrder, VarRegistry};

#[derive(Debug, Clone, PartialEq)]
pub struct RatFunc<F: CoeffField> {
    num: MPoly<F>,
    den: MPoly<F>,
}

impl<F: CoeffField> RatFunc<F> {
    /// Normalizing constructor. Errors on zero denominator.
    pub fn new(num: MPoly<F>, den: MPoly<F>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let field = num.field().clone();
        if num.is_zero() {
            let one = MPoly::one(field, num.registry().clone(), num.order().clone());
            return Ok(RatFunc { num, den: one });
        }
        let g = poly_gcd(&num, &den);
        let mut num = num.exact_div(&g).expect("gcd divides numerator");
        let mut den = den.exact_div(&g).expect("gcd divides denominator");
        let ncoeffs: Vec<F::Elem> = num.terms().iter().map(|(_, c)| c.clone()).collect();
        let dcoeffs: Vec<F::Elem> = den.terms().iter().map(|(_, c)| c.clone()).collect();
        let lead = den.leading().unwrap().1.clone();
        let s = field.fraction_scale(&ncoeffs, &dcoeffs, &lead);
        num = num.scale(&s);
        den = den.scale(&s);
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: MPoly<F>) -> Self {
        let one = MPoly::one(p.field().clone(), p.registry().clone(), p.order().clone());
        RatFunc { num: p, den: one }
    }

    pub fn zero(field: F, reg: Arc<VarRegistry>, order: MonomialOrder) -> Self {
        Self::from_poly(MPoly::zero(field, reg, order))
    }

    pub fn one(field: F, reg: Arc<VarRegistry>, order: MonomialOrder) -> Self {
        Self::from_poly(MPoly::one(field, reg, order))
    }

    pub fn num(&self) -> &MPoly<F> {
        &self.num
    }

    pub fn den(&self) -> &MPoly<F> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("nonzero denominators multiply to nonzero")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("nonzero denominators multiply to nonzero")
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Formal partial derivative: (n/d)' = (n'd - nd') / d^2.
    pub fn derivative(&self, v: usize) -> Self {
        let n = self.num.partial(v).mul(&self.den).sub(&self.num.mul(&self.den.partial(v)));
        let d = self.den.mul(&self.den);
        Self::new(n, d).expect("square of nonzero denominator is nonzero")
    }

    pub fn to_expr_string(&self) -> String {
        if self.den.is_constant()
            && self
                .den
                .leading()
                .map(|(_, c)| self.num.field().is_one(c))
                .unwrap_or(false)
        {
            self.num.to_expr_string()
        } else {
            format!("({})/({})", self.num.to_expr_string(), self.den.to_expr_string())
        }
    }
}

impl<F: CoeffField> std::fmt::Display for RatFunc<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

/// The field Q(p1..pm) of rational functions in a parameter registry.
/// An empty registry degenerates to Q itself (constant fractions).
#[derive(Debug, Clone, PartialEq)]
pub struct FracField {
    reg: Arc<VarRegistry>,
}

impl FracField {
    pub fn new(reg: Arc<VarRegistry>) -> Self {
        FracField { reg }
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn var(&self, v: usize) -> RatFunc<QField> {
        RatFunc::from_poly(MPoly::var(QField, self.reg.clone(), MonomialOrder::GrevLex, v))
    }

    pub fn from_qpoly(&self, p: MPoly<QField>) -> RatFunc<QField> {
        RatFunc::from_poly(p)
    }
}

impl CoeffField for FracField {
    type Elem = RatFunc<QField>;

    fn zero(&self) -> Self::Elem {
        RatFunc::zero(QField, self.reg.clone(), MonomialOrder::GrevLex)
    }

    fn one(&self) -> Self::Elem {
        RatFunc::one(QField, self.reg.clone(), MonomialOrder::GrevLex)
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.neg()
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.mul(b)
    }

    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem> {
        a.inv()
    }

    fn from_rat(&self, r: &Rat) -> Self::Elem {
        RatFunc::from_poly(MPoly::constant(
            QField,
            self.reg.clone(),
            MonomialOrder::GrevLex,
            r.clone(),
        ))
    }

    fn fmt_elem(&self, a: &Self::Elem) -> String {
        a.to_expr_string()
    }

    fn eq_elem(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    fn fraction_scale(&self, _num: &[Self::Elem], _den: &[Self::Elem], den_lead: &Self::Elem)
        -> Self::Elem {
        // Monic denominator.
        den_lead.inv().expect("leading coefficient is nonzero")
    }

    fn elem_needs_parens(&self, a: &Self::Elem) -> bool {
        !(a.is_polynomial() && a.num().is_constant())
    }

    fn split_sign(&self, a: &Self::Elem) -> (bool, Self::Elem) {
        // Pull the sign of the leading numerator coefficient, so that display
        // of polynomials over Q(t) reads naturally.
        if let Some((_, c)) = a.num().leading() {
            let (neg, _) = QField.split_sign(c);
            if neg {
                return (true, a.neg());
            }
        }
        (false, a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::{qpoly_const, qpoly_var};
    use crate::rational::rat_int;

    #[test]
    fn normalization_examples() {
        let reg = VarRegistry::new(vec!["x"]);
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let two_x = x.scale(&rat_int(2));
        let four = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(4));
        let r = RatFunc::new(two_x, four).unwrap();
        assert_eq!(r.num(), &x);
        assert_eq!(r.den(), &qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(2)));

        // (x^2 - 1)/(x - 1) = (x + 1)/1
        let one = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(1));
        let f = RatFunc::new(x.pow(2).sub(&one), x.sub(&one)).unwrap();
        assert_eq!(f.num(), &x.add(&one));
        assert!(f.is_polynomial());

        // 0/x normalizes to 0/1
        let z = RatFunc::new(qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(0)), x.clone())
            .unwrap();
        assert!(z.is_zero());
        assert_eq!(z.den(), &one);
    }

    #[test]
    fn zero_denominator_rejected() {
        let reg = VarRegistry::new(vec!["x"]);
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let zero = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(0));
        assert!(RatFunc::new(x, zero).is_err());
    }

    #[test]
    fn field_arithmetic() {
        let reg = VarRegistry::new(vec!["t"]);
        let f = FracField::new(reg);
        let t = f.var(0);
        // t + 1/t = (t^2 + 1)/t
        let inv_t = f.inv(&t).unwrap();
        let s = f.add(&t, &inv_t);
        assert_eq!(s.to_expr_string(), "(t^2 + 1)/(t)");
        // (t + 1/t) * t - 1 = t^2
        let back = f.sub(&f.mul(&s, &t), &f.one());
        assert_eq!(back.to_expr_string(), "t^2");
    }

    #[test]
    fn derivative_quotient_rule() {
        let reg = VarRegistry::new(vec!["t"]);
        let f = FracField::new(reg.clone());
        let t = f.var(0);
        // d/dt (1/t) = -1/t^2
        let d = f.inv(&t).unwrap().derivative(0);
        let expected = f.neg(&f.inv(&f.mul(&t, &t)).unwrap());
        assert_eq!(d, expected);
    }
}
