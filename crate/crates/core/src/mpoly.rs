//! Sparse multivariate polynomials.
//!
//! A polynomial is a strictly sorted term list (largest monomial first under
//! the active [`MonomialOrder`]) with nonzero coefficients from a
//! [`CoeffField`]. Every polynomial carries its variable registry; binary
//! operations require registry and order agreement, which internal callers
//! guarantee by construction (user input is validated once, at parse time).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::field::{CoeffField, QField};
use crate::rational::{rat_int, Rat};
use crate::vars::{MonomialOrder, VarRegistry};

pub type QPoly = MPoly<QField>;

#[derive(Debug, Clone)]
pub struct MPoly<F: CoeffField> {
    field: F,
    reg: Arc<VarRegistry>,
    order: MonomialOrder,
    /// Sorted descending by `order`; no zero coefficients.
    terms: Vec<(Vec<u32>, F::Elem)>,
}

impl<F: CoeffField> PartialEq for MPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        // Order-independent comparison: same registry content, same term set.
        if self.reg.names() != other.reg.names() || self.terms.len() != other.terms.len() {
            return false;
        }
        let map: BTreeMap<&[u32], &F::Elem> =
            other.terms.iter().map(|(m, c)| (m.as_slice(), c)).collect();
        self.terms
            .iter()
            .all(|(m, c)| map.get(m.as_slice()).is_some_and(|d| *d == c))
    }
}

impl<F: CoeffField> MPoly<F> {
    pub fn zero(field: F, reg: Arc<VarRegistry>, order: MonomialOrder) -> Self {
        MPoly { field, reg, order, terms: Vec::new() }
    }

    pub fn constant(field: F, reg: Arc<VarRegistry>, order: MonomialOrder, c: F::Elem) -> Self {
        let mut p = Self::zero(field, reg, order);
        if !p.field.is_zero(&c) {
            p.terms.push((vec![0; p.reg.len()], c));
        }
        p
    }

    pub fn one(field: F, reg: Arc<VarRegistry>, order: MonomialOrder) -> Self {
        let c = field.one();
        Self::constant(field, reg, order, c)
    }

    pub fn var(field: F, reg: Arc<VarRegistry>, order: MonomialOrder, v: usize) -> Self {
        assert!(v < reg.len(), "variable index out of range");
        let mut expo = vec![0u32; reg.len()];
        expo[v] = 1;
        let c = field.one();
        MPoly { field, reg, order, terms: vec![(expo, c)] }
    }

    /// Build from an arbitrary term list: combines duplicates, drops zeros,
    /// sorts by the order.
    pub fn from_terms(
        field: F,
        reg: Arc<VarRegistry>,
        order: MonomialOrder,
        terms: Vec<(Vec<u32>, F::Elem)>,
    ) -> Self {
        let mut acc: BTreeMap<Vec<u32>, F::Elem> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.len(), reg.len(), "exponent vector length mismatch");
            match acc.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = field.add(e.get(), &c);
                    *e.get_mut() = s;
                }
            }
        }
        let mut terms: Vec<(Vec<u32>, F::Elem)> =
            acc.into_iter().filter(|(_, c)| !field.is_zero(c)).collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        MPoly { field, reg, order, terms }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn terms(&self) -> &[(Vec<u32>, F::Elem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0))
    }

    /// The constant coefficient (zero monomial), or field zero.
    pub fn constant_term(&self) -> F::Elem {
        self.terms
            .iter()
            .find(|(m, _)| m.iter().all(|&e| e == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| self.field.zero())
    }

    /// Leading (monomial, coefficient) under the active order.
    pub fn leading(&self) -> Option<(&[u32], &F::Elem)> {
        self.terms.first().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().map(|&e| e as u64).sum())
            .max()
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m[v]).max().unwrap_or(0)
    }

    /// Variables that actually occur.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    s.insert(v);
                }
            }
        }
        s
    }

    pub fn uses_only(&self, allowed: &BTreeSet<usize>) -> bool {
        self.support().is_subset(allowed)
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(
            self.reg.names(),
            other.reg.names(),
            "polynomial arithmetic across different variable registries"
        );
        assert_eq!(self.order, other.order, "polynomial arithmetic across different orders");
    }

    pub fn map_coeffs(&self, f: impl Fn(&F::Elem) -> F::Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f(c)))
            .filter(|(_, c)| !self.field.is_zero(c))
            .collect();
        MPoly { field: self.field.clone(), reg: self.reg.clone(), order: self.order.clone(), terms }
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| self.field.neg(c))
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        if self.field.is_zero(s) {
            return Self::zero(self.field.clone(), self.reg.clone(), self.order.clone());
        }
        self.map_coeffs(|c| self.field.mul(c, s))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        // Merge two sorted term lists.
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.order.cmp(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Greater => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    terms.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.field.add(&self.terms[i].1, &other.terms[j].1);
                    if !self.field.is_zero(&c) {
                        terms.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&self.terms[i..]);
        terms.extend(other.terms[j..].iter().cloned());
        MPoly { field: self.field.clone(), reg: self.reg.clone(), order: self.order.clone(), terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Add `coeff * monom * other` to `self` (the inner loop of division and
    /// Buchberger reduction).
    pub fn add_scaled_shift(&self, coeff: &F::Elem, monom: &[u32], other: &Self) -> Self {
        let shifted = MPoly {
            field: other.field.clone(),
            reg: other.reg.clone(),
            order: other.order.clone(),
            terms: other
                .terms
                .iter()
                .map(|(m, c)| {
                    let mm: Vec<u32> = m.iter().zip(monom).map(|(a, b)| a + b).collect();
                    (mm, self.field.mul(c, coeff))
                })
                .filter(|(_, c)| !self.field.is_zero(c))
                .collect(),
        };
        self.add(&shifted)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut acc: BTreeMap<Vec<u32>, F::Elem> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                let c = self.field.mul(ca, cb);
                match acc.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let s = self.field.add(e.get(), &c);
                        *e.get_mut() = s;
                    }
                }
            }
        }
        let mut terms: Vec<(Vec<u32>, F::Elem)> =
            acc.into_iter().filter(|(_, c)| !self.field.is_zero(c)).collect();
        terms.sort_by(|a, b| self.order.cmp(&b.0, &a.0));
        MPoly { field: self.field.clone(), reg: self.reg.clone(), order: self.order.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.field.clone(), self.reg.clone(), self.order.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Formal partial derivative with respect to variable `v`.
    pub fn partial(&self, v: usize) -> Self {
        let terms: Vec<(Vec<u32>, F::Elem)> = self
            .terms
            .iter()
            .filter(|(m, _)| m[v] > 0)
            .map(|(m, c)| {
                let mut mm = m.clone();
                let e = mm[v];
                mm[v] = e - 1;
                (mm, self.field.mul(c, &self.field.from_rat(&rat_int(e as i64))))
            })
            .collect();
        Self::from_terms(self.field.clone(), self.reg.clone(), self.order.clone(), terms)
    }

    /// Re-sort under a different monomial order.
    pub fn with_order(&self, order: MonomialOrder) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        MPoly { field: self.field.clone(), reg: self.reg.clone(), order, terms }
    }

    /// Substitute every variable by the corresponding polynomial (all targets
    /// over one registry). Variables the polynomial does not use may map to
    /// anything.
    pub fn compose(&self, targets: &[Self]) -> Self {
        assert_eq!(targets.len(), self.reg.len(), "one target per variable required");
        let (field, reg, order) = if let Some(t) = targets.first() {
            (t.field.clone(), t.reg.clone(), t.order.clone())
        } else {
            (self.field.clone(), self.reg.clone(), self.order.clone())
        };
        // Memoized powers per variable.
        let mut powers: Vec<Vec<Self>> = targets
            .iter()
            .map(|t| vec![Self::one(field.clone(), reg.clone(), order.clone()), t.clone()])
            .collect();
        let mut out = Self::zero(field.clone(), reg.clone(), order.clone());
        for (m, c) in &self.terms {
            let mut term = Self::constant(field.clone(), reg.clone(), order.clone(), c.clone());
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let next = powers[v].last().unwrap().mul(&targets[v]);
                    powers[v].push(next);
                }
                term = term.mul(&powers[v][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitute a single variable by a polynomial over the same registry.
    pub fn substitute(&self, v: usize, value: &Self) -> Self {
        let mut targets: Vec<Self> = (0..self.reg.len())
            .map(|i| {
                Self::var(self.field.clone(), self.reg.clone(), self.order.clone(), i)
            })
            .collect();
        targets[v] = value.clone();
        self.compose(&targets)
    }

    /// Move the polynomial onto a new registry. `map[old] = Some(new)` gives
    /// the new index of each old variable; a used variable mapped to `None`
    /// is an error (returns `None`).
    pub fn map_registry(
        &self,
        new_reg: Arc<VarRegistry>,
        order: MonomialOrder,
        map: &[Option<usize>],
    ) -> Option<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut mm = vec![0u32; new_reg.len()];
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map[v] {
                    Some(nv) => mm[nv] = e,
                    None => return None,
                }
            }
            terms.push((mm, c.clone()));
        }
        Some(Self::from_terms(self.field.clone(), new_reg, order, terms))
    }

    /// View as univariate in `v`: coefficient polynomials indexed by degree.
    pub fn coeffs_in_var(&self, v: usize) -> Vec<Self> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Self::zero(self.field.clone(), self.reg.clone(), self.order.clone()); d + 1];
        for (m, c) in &self.terms {
            let e = m[v] as usize;
            let mut mm = m.clone();
            mm[v] = 0;
            out[e] = out[e].add(&MPoly {
                field: self.field.clone(),
                reg: self.reg.clone(),
                order: self.order.clone(),
                terms: vec![(mm, c.clone())],
            });
        }
        out
    }

    /// Rebuild from a univariate coefficient view.
    pub fn from_coeffs_in_var(
        field: F,
        reg: Arc<VarRegistry>,
        order: MonomialOrder,
        v: usize,
        coeffs: &[Self],
    ) -> Self {
        let mut terms = Vec::new();
        for (e, c) in coeffs.iter().enumerate() {
            for (m, coeff) in &c.terms {
                assert_eq!(m[v], 0, "coefficient polynomial must not involve the main variable");
                let mut mm = m.clone();
                mm[v] = e as u32;
                terms.push((mm, coeff.clone()));
            }
        }
        Self::from_terms(field, reg, order, terms)
    }

    /// Exact division: `Some(q)` with `self = q * divisor`, or `None`.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        self.assert_compatible(divisor);
        assert!(!divisor.is_zero(), "exact division by zero polynomial");
        let mut rem = self.clone();
        let mut q_terms: Vec<(Vec<u32>, F::Elem)> = Vec::new();
        let (dm, dc) = divisor.leading().unwrap();
        let dm = dm.to_vec();
        let dc = dc.clone();
        while let Some((rm, rc)) = rem.leading() {
            let mut qm = vec![0u32; rm.len()];
            for i in 0..rm.len() {
                if rm[i] < dm[i] {
                    return None;
                }
                qm[i] = rm[i] - dm[i];
            }
            let qc = self
                .field
                .div(rc, &dc)
                .expect("leading coefficient of a nonzero polynomial is invertible");
            let neg_qc = self.field.neg(&qc);
            rem = rem.add_scaled_shift(&neg_qc, &qm, divisor);
            q_terms.push((qm, qc));
        }
        Some(Self::from_terms(
            self.field.clone(),
            self.reg.clone(),
            self.order.clone(),
            q_terms,
        ))
    }

    /// Canonical text form; for `QPoly` this is exactly the expression
    /// grammar accepted by the parser.
    pub fn to_expr_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (negative, mag) = self.field.split_sign(c);
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = self.monomial_string(m);
            let coeff_is_one = self.field.is_one(&mag);
            if mono.is_empty() {
                out.push_str(&self.fmt_coeff(&mag));
            } else if coeff_is_one {
                out.push_str(&mono);
            } else {
                out.push_str(&self.fmt_coeff(&mag));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }

    fn fmt_coeff(&self, c: &F::Elem) -> String {
        let s = self.field.fmt_elem(c);
        if self.field.elem_needs_parens(c) {
            format!("({s})")
        } else {
            s
        }
    }

    fn monomial_string(&self, m: &[u32]) -> String {
        let mut parts = Vec::new();
        for (v, &e) in m.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.reg.name(v).to_string()),
                _ => parts.push(format!("{}^{}", self.reg.name(v), e)),
            }
        }
        parts.join("*")
    }
}

impl<F: CoeffField> std::fmt::Display for MPoly<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

/// Evaluate a rational-coefficient polynomial at elements of an arbitrary
/// field (one argument per registry variable).
pub fn eval_in_field<F: CoeffField>(p: &QPoly, args: &[F::Elem], field: &F) -> F::Elem {
    assert_eq!(args.len(), p.registry().len(), "one argument per variable required");
    let mut acc = field.zero();
    for (m, c) in p.terms() {
        let mut term = field.from_rat(c);
        for (v, &e) in m.iter().enumerate() {
            for _ in 0..e {
                term = field.mul(&term, &args[v]);
            }
        }
        acc = field.add(&acc, &term);
    }
    acc
}

/// Convenience constructors for rational-coefficient polynomials.
pub fn qpoly_zero(reg: &Arc<VarRegistry>, order: MonomialOrder) -> QPoly {
    MPoly::zero(QField, reg.clone(), order)
}

pub fn qpoly_const(reg: &Arc<VarRegistry>, order: MonomialOrder, c: Rat) -> QPoly {
    MPoly::constant(QField, reg.clone(), order, c)
}

pub fn qpoly_var(reg: &Arc<VarRegistry>, order: MonomialOrder, v: usize) -> QPoly {
    MPoly::var(QField, reg.clone(), order, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn xy() -> Arc<VarRegistry> {
        VarRegistry::new(vec!["x", "y"])
    }

    fn p(reg: &Arc<VarRegistry>, terms: Vec<(Vec<u32>, Rat)>) -> QPoly {
        MPoly::from_terms(QField, reg.clone(), MonomialOrder::GrevLex, terms)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let reg = xy();
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let y = qpoly_var(&reg, MonomialOrder::GrevLex, 1);
        let f = x.add(&y);
        let g = x.sub(&y);
        let prod = f.mul(&g);
        let expect = p(&reg, vec![(vec![2, 0], rat_int(1)), (vec![0, 2], rat_int(-1))]);
        assert_eq!(prod, expect);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn exact_division_roundtrip() {
        let reg = xy();
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let y = qpoly_var(&reg, MonomialOrder::GrevLex, 1);
        let f = x.add(&y).pow(3);
        let g = x.add(&y);
        let q = f.exact_div(&g).expect("divisible");
        assert_eq!(q, x.add(&y).pow(2));
        let h = x.mul(&y).add(&qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(1)));
        assert!(f.exact_div(&h).is_none());
    }

    #[test]
    fn partial_derivative() {
        let reg = xy();
        // d/dx (x^2 y + 3x) = 2xy + 3
        let f = p(&reg, vec![(vec![2, 1], rat_int(1)), (vec![1, 0], rat_int(3))]);
        let fx = f.partial(0);
        let expect = p(&reg, vec![(vec![1, 1], rat_int(2)), (vec![0, 0], rat_int(3))]);
        assert_eq!(fx, expect);
    }

    #[test]
    fn compose_substitutes() {
        let reg = xy();
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let y = qpoly_var(&reg, MonomialOrder::GrevLex, 1);
        // f(x, y) = x^2 - y at (y, y) gives y^2 - y
        let f = x.pow(2).sub(&y);
        let g = f.compose(&[y.clone(), y.clone()]);
        assert_eq!(g, y.pow(2).sub(&y));
    }

    #[test]
    fn display_matches_grammar() {
        let reg = xy();
        let f = p(
            &reg,
            vec![
                (vec![2, 0], rat_int(-2)),
                (vec![1, 1], rat(3, 2)),
                (vec![0, 0], rat_int(1)),
            ],
        );
        assert_eq!(f.to_expr_string(), "-2*x^2 + 3/2*x*y + 1");
    }

    #[test]
    fn univariate_view_roundtrip() {
        let reg = xy();
        let f = p(
            &reg,
            vec![
                (vec![2, 1], rat_int(1)),
                (vec![1, 0], rat_int(2)),
                (vec![0, 3], rat_int(-1)),
            ],
        );
        let cs = f.coeffs_in_var(0);
        assert_eq!(cs.len(), 3);
        let back =
            MPoly::from_coeffs_in_var(QField, reg.clone(), MonomialOrder::GrevLex, 0, &cs);
        assert_eq!(back, f);
    }
}
