//! Multivariate polynomial gcd.
//!
//! Recursion on the variable count: pick the highest occurring variable as
//! the main one, split both inputs into content and primitive part with
//! respect to it, recurse on the contents, and run a subresultant
//! pseudo-remainder sequence on the primitive parts. The univariate base
//! case is the same loop with constant contents. Results are canonicalized
//! through the field's `fraction_scale` hook (integer-primitive with positive
//! leading coefficient over Q, monic over internal fraction fields).

use crate::field::CoeffField;
use crate::mpoly::MPoly;

/// Canonical scaling of a nonzero polynomial (unit normalization).
pub fn canonicalize<F: CoeffField>(p: &MPoly<F>) -> MPoly<F> {
    if p.is_zero() {
        return p.clone();
    }
    let field = p.field().clone();
    let coeffs: Vec<F::Elem> = p.terms().iter().map(|(_, c)| c.clone()).collect();
    let lead = p.leading().unwrap().1.clone();
    // Reuse the fraction hook with an empty numerator: scales `p` itself as
    // if it were a denominator.
    let s = field.fraction_scale(&[], &coeffs, &lead);
    p.scale(&s)
}

/// gcd of a list, canonicalized; zero for an empty or all-zero list.
pub fn gcd_many<F: CoeffField>(polys: &[MPoly<F>]) -> Option<MPoly<F>> {
    let mut acc: Option<MPoly<F>> = None;
    for p in polys {
        acc = Some(match acc {
            None => p.clone(),
            Some(a) => poly_gcd(&a, p),
        });
        // Early out: unit gcd cannot shrink further.
        if let Some(a) = &acc {
            if a.is_constant() && !a.is_zero() {
                break;
            }
        }
    }
    acc.map(|a| canonicalize(&a))
}

pub fn poly_gcd<F: CoeffField>(f: &MPoly<F>, g: &MPoly<F>) -> MPoly<F> {
    if f.is_zero() {
        return canonicalize(g);
    }
    if g.is_zero() {
        return canonicalize(f);
    }
    let field = f.field().clone();
    let one = MPoly::one(field.clone(), f.registry().clone(), f.order().clone());
    if f.is_constant() || g.is_constant() {
        return one;
    }
    // Main variable: highest index occurring in either operand.
    let v = f
        .support()
        .into_iter()
        .chain(g.support())
        .max()
        .expect("nonconstant polynomials have support");
    if f.degree_in(v) == 0 {
        let cont_g = gcd_many(&g.coeffs_in_var(v)).unwrap();
        return poly_gcd(f, &cont_g);
    }
    if g.degree_in(v) == 0 {
        let cont_f = gcd_many(&f.coeffs_in_var(v)).unwrap();
        return poly_gcd(&cont_f, g);
    }
    let cont_f = gcd_many(&f.coeffs_in_var(v)).unwrap();
    let cont_g = gcd_many(&g.coeffs_in_var(v)).unwrap();
    let pp_f = f.exact_div(&cont_f).expect("content divides");
    let pp_g = g.exact_div(&cont_g).expect("content divides");
    let d = poly_gcd(&cont_f, &cont_g);
    let r = subresultant_gcd(&pp_f, &pp_g, v);
    canonicalize(&d.mul(&r))
}

/// gcd of two polynomials primitive in `v`, both of positive `v`-degree,
/// via the subresultant pseudo-remainder sequence.
fn subresultant_gcd<F: CoeffField>(f: &MPoly<F>, g: &MPoly<F>, v: usize) -> MPoly<F> {
    let field = f.field().clone();
    let reg = f.registry().clone();
    let order = f.order().clone();
    let one = MPoly::one(field.clone(), reg.clone(), order.clone());

    let (mut a, mut b) = if f.degree_in(v) >= g.degree_in(v) {
        (f.clone(), g.clone())
    } else {
        (g.clone(), f.clone())
    };
    let mut g_coef = one.clone();
    let mut h_coef = one.clone();
    loop {
        let delta = a.degree_in(v) - b.degree_in(v);
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            let cont = gcd_many(&b.coeffs_in_var(v)).unwrap();
            return b.exact_div(&cont).expect("content divides");
        }
        if r.degree_in(v) == 0 {
            return one;
        }
        a = b;
        let divisor = g_coef.mul(&h_coef.pow(delta));
        b = r.exact_div(&divisor).expect("subresultant division is exact");
        g_coef = lead_coeff_in(&a, v);
        h_coef = if delta == 0 {
            h_coef
        } else {
            // h <- g^delta / h^(delta-1), exact by subresultant theory.
            g_coef
                .pow(delta)
                .exact_div(&h_coef.pow(delta - 1))
                .expect("subresultant h-update is exact")
        };
    }
}

/// Leading coefficient of `p` viewed as univariate in `v`.
fn lead_coeff_in<F: CoeffField>(p: &MPoly<F>, v: usize) -> MPoly<F> {
    let cs = p.coeffs_in_var(v);
    cs.last().expect("nonzero polynomial").clone()
}

/// Pseudo-remainder of `a` by `b` with respect to `v`:
/// lc(b)^(deg a - deg b + 1) * a reduced by b until deg < deg b.
fn pseudo_rem<F: CoeffField>(a: &MPoly<F>, b: &MPoly<F>, v: usize) -> MPoly<F> {
    let da = a.degree_in(v);
    let db = b.degree_in(v);
    assert!(db >= 1 && da >= db);
    let lb = lead_coeff_in(b, v);
    let mut r = a.clone();
    let mut n = da - db + 1;
    let xv = MPoly::var(a.field().clone(), a.registry().clone(), a.order().clone(), v);
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = lead_coeff_in(&r, v);
        // r <- lb*r - lr*x^(dr-db)*b kills the leading v-term.
        let shift = xv.pow(dr - db);
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
        n -= 1;
    }
    if n > 0 {
        r = r.mul(&lb.pow(n));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::{qpoly_var, QPoly};
    use crate::rational::rat_int;
    use crate::vars::{MonomialOrder, VarRegistry};
    use std::sync::Arc;

    fn setup() -> (Arc<VarRegistry>, QPoly, QPoly) {
        let reg = VarRegistry::new(vec!["x", "y"]);
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let y = qpoly_var(&reg, MonomialOrder::GrevLex, 1);
        (reg, x, y)
    }

    fn c(reg: &Arc<VarRegistry>, n: i64) -> QPoly {
        crate::mpoly::qpoly_const(reg, MonomialOrder::GrevLex, rat_int(n))
    }

    #[test]
    fn univariate_common_factor() {
        let (reg, x, _) = setup();
        // gcd(x^2 - 1, x^2 - 2x + 1) = x - 1
        let f = x.pow(2).sub(&c(&reg, 1));
        let g = x.pow(2).sub(&x.scale(&rat_int(2))).add(&c(&reg, 1));
        assert_eq!(poly_gcd(&f, &g), x.sub(&c(&reg, 1)));
    }

    #[test]
    fn multivariate_common_factor() {
        let (_reg, x, y) = setup();
        // gcd((x+y)*(x-y), (x+y)^2) = x + y
        let s = x.add(&y);
        let f = s.mul(&x.sub(&y));
        let g = s.pow(2);
        assert_eq!(poly_gcd(&f, &g), s);
    }

    #[test]
    fn coprime_gives_unit() {
        let (reg, x, y) = setup();
        let f = x.pow(2).add(&y);
        let g = y.pow(3).sub(&x);
        assert_eq!(poly_gcd(&f, &g), c(&reg, 1));
    }

    #[test]
    fn result_is_integer_primitive() {
        let (_reg, x, y) = setup();
        // Canonical gcd strips rational content: scalar factors belong to
        // fraction normalization, not to the gcd.
        let f = x.mul(&y).scale(&rat_int(2));
        let g = y.pow(2).scale(&rat_int(4));
        assert_eq!(poly_gcd(&f, &g), y);
    }

    #[test]
    fn canonical_sign() {
        let (_reg, x, _) = setup();
        let f = x.neg();
        let g = x.pow(2).neg();
        // gcd is x with positive leading coefficient.
        assert_eq!(poly_gcd(&f, &g), x);
    }
}
