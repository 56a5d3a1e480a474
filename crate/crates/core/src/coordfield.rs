//! The function field of a variety.
//!
//! `CoordField` is the fraction field of Q(t1..tm)[v1..vc] / P, presented
//! by a Groebner basis of P. Elements are reduced fractions whose numerator
//! and denominator are kept in normal form, so structural equality of the
//! canonical representatives decides field equality: a = b exactly when the
//! normal form of a.num * b.den - b.num * a.den vanishes and both
//! denominators are nonzero modulo P.
//!
//! All arithmetic assumes P is prime (the caller's declared contract); under
//! that assumption denominators never collapse into P during add/mul, so only
//! `inv` can fail, and only on zero.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::groebner::{buchberger, GroebnerBasis};
use crate::mpoly::MPoly;
use crate::rational::Rat;
use crate::ratfunc::{FracField, RatFunc};
use crate::vars::{MonomialOrder, VarRegistry};

pub type CoordElem = RatFunc<FracField>;

#[derive(Debug, Clone)]
pub struct CoordField {
    base: FracField,
    reg: Arc<VarRegistry>,
    gb: Arc<GroebnerBasis<FracField>>,
}

impl PartialEq for CoordField {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.reg.names() == other.reg.names()
            && self.gb.generators() == other.gb.generators()
    }
}

impl CoordField {
    /// Field of fractions of the quotient by the ideal spanned by `gens`.
    /// Errors with `UnitIdeal` when the generators span the whole ring.
    pub fn new(
        base: FracField,
        reg: Arc<VarRegistry>,
        gens: &[MPoly<FracField>],
    ) -> Result<Self> {
        let gb = if gens.is_empty() {
            GroebnerBasis::zero_ideal(base.clone(), reg.clone(), MonomialOrder::GrevLex)
        } else {
            buchberger(gens, MonomialOrder::GrevLex)?
        };
        if gb.is_unit_ideal() {
            return Err(Error::UnitIdeal(
                "coordinate ring collapsed: generators span the unit ideal".into(),
            ));
        }
        Ok(CoordField { base, reg, gb: Arc::new(gb) })
    }

    /// Build from an already computed basis (must not be the unit ideal).
    pub fn from_basis(base: FracField, reg: Arc<VarRegistry>, gb: GroebnerBasis<FracField>) -> Self {
        assert!(!gb.is_unit_ideal(), "unit ideal has no fraction field");
        CoordField { base, reg, gb: Arc::new(gb) }
    }

    /// Plain rational-function ambient Q(t1..tm): no coordinates, zero ideal.
    pub fn rational(base: FracField) -> Self {
        let reg = VarRegistry::new(Vec::<String>::new());
        let gb = GroebnerBasis::zero_ideal(base.clone(), reg.clone(), MonomialOrder::GrevLex);
        CoordField { base, reg, gb: Arc::new(gb) }
    }

    pub fn base(&self) -> &FracField {
        &self.base
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn basis(&self) -> &GroebnerBasis<FracField> {
        &self.gb
    }

    /// Transcendence degree over the base field.
    pub fn transcendence_degree(&self) -> i64 {
        self.gb.dimension()
    }

    pub fn nf_poly(&self, p: &MPoly<FracField>) -> MPoly<FracField> {
        self.gb.normal_form(p)
    }

    /// Reduce a raw fraction to the canonical representative. Errors when
    /// the denominator lies in the ideal.
    pub fn reduce(&self, r: &CoordElem) -> Result<CoordElem> {
        let num = self.nf_poly(r.num());
        let den = self.nf_poly(r.den());
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        RatFunc::new(num, den)
    }

    /// Image of a coordinate polynomial in the field.
    pub fn from_poly(&self, p: &MPoly<FracField>) -> CoordElem {
        RatFunc::from_poly(self.nf_poly(p))
    }

    /// The generic-point value of coordinate `v`.
    pub fn coordinate(&self, v: usize) -> CoordElem {
        self.from_poly(&MPoly::var(
            self.base.clone(),
            self.reg.clone(),
            MonomialOrder::GrevLex,
            v,
        ))
    }

    /// Embedding of the base field.
    pub fn from_base(&self, c: &RatFunc<QField>) -> CoordElem {
        RatFunc::from_poly(MPoly::constant(
            self.base.clone(),
            self.reg.clone(),
            MonomialOrder::GrevLex,
            c.clone(),
        ))
    }

    fn require_nonzero_den(&self, r: Result<CoordElem>) -> CoordElem {
        // Prime contract: products of non-members stay outside the ideal.
        r.expect("denominator reduced to zero; the declared prime contract is violated")
    }
}

/// Values of a derivation on every generator of a `CoordField`: one entry
/// per base parameter, one per coordinate. Extends uniquely to the field
/// by linearity, Leibniz, and the quotient rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DerTable {
    pub param_values: Vec<CoordElem>,
    pub coord_values: Vec<CoordElem>,
}

impl DerTable {
    pub fn zero(field: &CoordField) -> Self {
        DerTable {
            param_values: vec![field.zero(); field.base().registry().len()],
            coord_values: vec![field.zero(); field.registry().len()],
        }
    }
}

impl CoordField {
    /// Derivative of a polynomial under the table: the coefficient-wise
    /// derivative plus the chain-rule sum over coordinates. Acts on the raw
    /// polynomial, so it computes the prolongation of an ideal generator
    /// rather than the (zero) derivative of its class.
    pub fn d_poly(&self, table: &DerTable, p: &MPoly<FracField>) -> CoordElem {
        let mut acc = self.zero();
        for (l, dv) in table.param_values.iter().enumerate() {
            if self.is_zero(dv) {
                continue;
            }
            let dcoeff = p.map_coeffs(|c| c.derivative(l));
            if !dcoeff.is_zero() {
                acc = self.add(&acc, &self.mul(&self.from_poly(&dcoeff), dv));
            }
        }
        for v in p.support() {
            let dv = &table.coord_values[v];
            if self.is_zero(dv) {
                continue;
            }
            let pd = p.partial(v);
            if !pd.is_zero() {
                acc = self.add(&acc, &self.mul(&self.from_poly(&pd), dv));
            }
        }
        acc
    }

    /// Apply the derivation determined by `table` to a field element.
    pub fn apply_derivation(&self, table: &DerTable, f: &CoordElem) -> CoordElem {
        let dn = self.d_poly(table, f.num());
        let dd = self.d_poly(table, f.den());
        let num = self.from_poly(f.num());
        let den = self.from_poly(f.den());
        let numerator = self.sub(&self.mul(&dn, &den), &self.mul(&num, &dd));
        let d2 = self.mul(&den, &den);
        self.div(&numerator, &d2)
            .expect("denominator is nonzero in the field")
    }
}

impl CoeffField for CoordField {
    type Elem = CoordElem;

    fn zero(&self) -> CoordElem {
        RatFunc::zero(self.base.clone(), self.reg.clone(), MonomialOrder::GrevLex)
    }

    fn one(&self) -> CoordElem {
        RatFunc::one(self.base.clone(), self.reg.clone(), MonomialOrder::GrevLex)
    }

    fn is_zero(&self, a: &CoordElem) -> bool {
        // Elements are kept in normal form, so the numerator decides.
        a.num().is_zero()
    }

    fn add(&self, a: &CoordElem, b: &CoordElem) -> CoordElem {
        self.require_nonzero_den(self.reduce(&a.add(b)))
    }

    fn neg(&self, a: &CoordElem) -> CoordElem {
        a.neg()
    }

    fn mul(&self, a: &CoordElem, b: &CoordElem) -> CoordElem {
        self.require_nonzero_den(self.reduce(&a.mul(b)))
    }

    fn inv(&self, a: &CoordElem) -> Result<CoordElem> {
        if self.is_zero(a) {
            return Err(Error::ZeroDenominator);
        }
        self.reduce(&a.inv()?)
    }

    fn from_rat(&self, r: &Rat) -> CoordElem {
        RatFunc::from_poly(MPoly::constant(
            self.base.clone(),
            self.reg.clone(),
            MonomialOrder::GrevLex,
            self.base.from_rat(r),
        ))
    }

    fn fmt_elem(&self, a: &CoordElem) -> String {
        a.to_expr_string()
    }

    fn fraction_scale(&self, _num: &[CoordElem], _den: &[CoordElem], den_lead: &CoordElem)
        -> CoordElem {
        den_lead.inv().expect("leading coefficient is nonzero")
    }

    fn elem_needs_parens(&self, a: &CoordElem) -> bool {
        if !a.is_polynomial() {
            return true;
        }
        let n = a.num();
        if n.is_zero() {
            return false;
        }
        if !n.is_constant() {
            return true;
        }
        self.base.elem_needs_parens(&n.constant_term())
    }

    fn split_sign(&self, a: &CoordElem) -> (bool, CoordElem) {
        if let Some((_, c)) = a.num().leading() {
            let (neg, _) = self.base.split_sign(c);
            if neg {
                return (true, a.neg());
            }
        }
        (false, a.clone())
    }
}
