//! Sylvester resultants. For two polynomials read as univariate in one
//! variable, the resultant is the determinant of their Sylvester matrix,
//! a polynomial in the remaining variables that vanishes exactly where the
//! two share a root. It gives an elimination route independent of Gröbner
//! bases, used to cross-check `eliminate` on two-generator ideals.

use crate::convert::canonical_generator;
use crate::coordfield::CoordField;
use crate::error::Result;
use crate::field::CoeffField;
use crate::groebner::GroebnerBasis;
use crate::linalg::Matrix;
use crate::mpoly::MPoly;
use crate::ratfunc::{FracField, RatFunc};

/// Coefficients of `p` as a univariate polynomial in `v`, constant term
/// first. The returned polynomials do not mention `v`.
fn univariate_coeffs(p: &MPoly<FracField>, v: usize) -> Vec<MPoly<FracField>> {
    let d = p.terms().iter().map(|(m, _)| m[v]).max().unwrap_or(0);
    (0..=d)
        .map(|e| {
            let terms = p
                .terms()
                .iter()
                .filter(|(m, _)| m[v] == e)
                .map(|(m, c)| {
                    let mut mm = m.clone();
                    mm[v] = 0;
                    (mm, c.clone())
                })
                .collect();
            MPoly::from_terms(p.field().clone(), p.registry().clone(), p.order().clone(), terms)
        })
        .collect()
}

/// Resultant of `p` and `q` with respect to variable `v`. Zero exactly when
/// the two share a factor of positive degree in `v` over the fraction field
/// of the other variables. When one input does not mention `v`, the classic
/// convention applies: its value to the power of the other's degree.
pub fn resultant(
    p: &MPoly<FracField>,
    q: &MPoly<FracField>,
    v: usize,
) -> Result<MPoly<FracField>> {
    let pc = univariate_coeffs(p, v);
    let qc = univariate_coeffs(q, v);
    let dp = pc.len() - 1;
    let dq = qc.len() - 1;
    if dp == 0 {
        return Ok(pc[0].pow(dq as u32));
    }
    if dq == 0 {
        return Ok(qc[0].pow(dp as u32));
    }
    let bf = p.field().clone();
    let zero_ideal =
        GroebnerBasis::zero_ideal(bf.clone(), p.registry().clone(), p.order().clone());
    let field = CoordField::from_basis(bf.clone(), p.registry().clone(), zero_ideal);
    let n = dp + dq;
    let mut m = Matrix::zero(field, n, n);
    for s in 0..dq {
        for (i, c) in pc.iter().enumerate() {
            m.set(s, s + dp - i, RatFunc::from_poly(c.clone()));
        }
    }
    for s in 0..dp {
        for (i, c) in qc.iter().enumerate() {
            m.set(dq + s, s + dq - i, RatFunc::from_poly(c.clone()));
        }
    }
    let det = m.determinant()?;
    // Entries are polynomials and reduced fractions stay fully cancelled,
    // so a polynomial determinant carries a constant denominator.
    let den = det.den().constant_term();
    assert!(
        det.den().support().is_empty(),
        "polynomial determinant reduced to a non-constant denominator"
    );
    Ok(det.num().scale(&bf.inv(&den)?))
}

/// Same locus test, scalar-free: the resultant in canonical generator form.
pub fn canonical_resultant(
    p: &MPoly<FracField>,
    q: &MPoly<FracField>,
    v: usize,
) -> Result<MPoly<FracField>> {
    let r = resultant(p, q, v)?;
    if r.is_zero() {
        return Ok(r);
    }
    Ok(canonical_generator(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::QField;
    use crate::rational::rat_int;
    use crate::variety::BaseField;
    use crate::vars::{MonomialOrder, VarRegistry};

    fn xyz() -> (FracField, std::sync::Arc<VarRegistry>) {
        let base = BaseField::rationals();
        (base.field().clone(), VarRegistry::new(vec!["x", "y", "z"]))
    }

    fn var(f: &FracField, reg: &std::sync::Arc<VarRegistry>, i: usize) -> MPoly<FracField> {
        MPoly::var(f.clone(), reg.clone(), MonomialOrder::GrevLex, i)
    }

    fn int(f: &FracField, reg: &std::sync::Arc<VarRegistry>, n: i64) -> MPoly<FracField> {
        MPoly::constant(
            f.clone(),
            reg.clone(),
            MonomialOrder::GrevLex,
            <FracField as CoeffField>::from_rat(f, &rat_int(n)),
        )
    }

    #[test]
    fn twisted_cubic_projection() {
        let (f, reg) = xyz();
        let (x, y, z) = (var(&f, &reg, 0), var(&f, &reg, 1), var(&f, &reg, 2));
        let p = x.pow(2).sub(&y);
        let q = x.pow(3).sub(&z);
        let r = canonical_resultant(&p, &q, 0).unwrap();
        let expect = canonical_generator(&y.pow(3).sub(&z.pow(2)));
        assert_eq!(r, expect);
    }

    #[test]
    fn univariate_value() {
        let (f, reg) = xyz();
        let x = var(&f, &reg, 0);
        let p = x.pow(2).sub(&int(&f, &reg, 1));
        let q = x.sub(&int(&f, &reg, 2));
        let r = resultant(&p, &q, 0).unwrap();
        let three = int(&f, &reg, 3);
        assert!(r.sub(&three).is_zero() || r.add(&three).is_zero());
    }

    #[test]
    fn shared_factor_kills_the_resultant() {
        let (f, reg) = xyz();
        let (x, y) = (var(&f, &reg, 0), var(&f, &reg, 1));
        let one = int(&f, &reg, 1);
        let p = x.mul(&y.sub(&one));
        let q = x.mul(&y.add(&one));
        assert!(resultant(&p, &q, 0).unwrap().is_zero());
    }

    #[test]
    fn constant_in_the_variable_uses_the_power_convention() {
        let (f, reg) = xyz();
        let (x, y) = (var(&f, &reg, 0), var(&f, &reg, 1));
        let p = y.clone();
        let q = x.pow(3).sub(&y);
        let r = resultant(&p, &q, 0).unwrap();
        assert!(r.sub(&y.pow(3)).is_zero());
    }

    #[test]
    fn matches_groebner_elimination() {
        use crate::groebner::buchberger;
        use std::collections::BTreeSet;

        let (f, reg) = xyz();
        let (x, y, z) = (var(&f, &reg, 0), var(&f, &reg, 1), var(&f, &reg, 2));
        let pairs = vec![
            (x.pow(2).sub(&y), x.pow(3).sub(&z)),
            (x.mul(&y).sub(&int(&f, &reg, 1)), x.add(&y).sub(&z)),
            (x.pow(2).add(&y.pow(2)).sub(&int(&f, &reg, 4)), x.sub(&y)),
        ];
        for (p, q) in pairs {
            let gb = buchberger(&[p.clone(), q.clone()], MonomialOrder::GrevLex).unwrap();
            let keep: BTreeSet<usize> = [1, 2].into();
            let elim = gb.eliminate(&keep).unwrap();
            assert_eq!(elim.generators().len(), 1, "principal elimination expected");
            let r = canonical_resultant(&p, &q, 0).unwrap();
            assert_eq!(r, canonical_generator(&elim.generators()[0]));
        }
    }

    #[test]
    fn determinant_matches_cofactors_on_numbers() {
        let q = QField;
        let mut m = Matrix::zero(q, 3, 3);
        let vals = [[2i64, 0, 1], [1, 3, 2], [0, 1, 4]];
        for (r, row) in vals.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, rat_int(*v));
            }
        }
        // 2*(12-2) - 0 + 1*(1-0)
        assert_eq!(m.determinant().unwrap(), rat_int(21));
    }
}
