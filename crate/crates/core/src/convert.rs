//! Conversions between the user-facing joint polynomial ring
//! Q[t1..tm, v1..vc] and the internal ring Q(t1..tm)[v1..vc].
//!
//! Input files and display forms live in the joint ring: one flat
//! registry, parameters first, coordinates after. All ideal computation
//! lives in the internal ring, where parameters sit in the coefficient
//! field. `split_poly` and `join_poly` translate between the two;
//! `canonical_generator` fixes the representative of a generator up to
//! the unit group of the base field, so serialization round-trips
//! byte-exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::QField;
use crate::gcd::{canonicalize, gcd_many};
use crate::mpoly::{MPoly, QPoly};
use crate::rational::{joint_integer_scale, Rat};
use crate::ratfunc::{FracField, RatFunc};
use crate::vars::{MonomialOrder, VarRegistry};
use num_traits::Signed;

/// Registry of the joint ring: `params` first, `coords` after.
pub fn joint_registry(params: &[String], coords: &[String]) -> Arc<VarRegistry> {
    let mut names: Vec<String> = params.to_vec();
    names.extend(coords.iter().cloned());
    VarRegistry::new(names)
}

/// Reinterpret a joint-ring polynomial as a coordinate polynomial with
/// coefficients in the base field. The first `base.registry().len()`
/// variables of `p` are the parameters, the rest the coordinates.
pub fn split_poly(
    p: &QPoly,
    base: &FracField,
    coord_reg: &Arc<VarRegistry>,
    order: &MonomialOrder,
) -> MPoly<FracField> {
    let m = base.registry().len();
    assert_eq!(
        p.registry().len(),
        m + coord_reg.len(),
        "joint registry must be params followed by coords"
    );
    let mut grouped: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Rat)>> = BTreeMap::new();
    for (mono, c) in p.terms() {
        let param_part = mono[..m].to_vec();
        let coord_part = mono[m..].to_vec();
        grouped.entry(coord_part).or_default().push((param_part, c.clone()));
    }
    let terms: Vec<(Vec<u32>, RatFunc<QField>)> = grouped
        .into_iter()
        .map(|(coord_mono, param_terms)| {
            let cp = MPoly::from_terms(
                QField,
                base.registry().clone(),
                MonomialOrder::GrevLex,
                param_terms,
            );
            (coord_mono, RatFunc::from_poly(cp))
        })
        .collect();
    MPoly::from_terms(base.clone(), coord_reg.clone(), order.clone(), terms)
}

/// Inverse of [`split_poly`] after denominator clearing: multiply through
/// by the least common multiple of the coefficient denominators and
/// flatten into the joint ring. The result generates the same ideal over
/// the base field.
pub fn join_poly(p: &MPoly<FracField>, joint: &Arc<VarRegistry>, order: &MonomialOrder) -> QPoly {
    let base = p.field();
    let m = base.registry().len();
    assert_eq!(joint.len(), m + p.registry().len());
    let lcm = den_lcm(p);
    let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
    for (coord_mono, c) in p.terms() {
        let cofactor = lcm.exact_div(c.den()).expect("lcm is divisible by every denominator");
        let cleared = c.num().mul(&cofactor);
        for (param_mono, q) in cleared.terms() {
            let mut mono = vec![0u32; joint.len()];
            mono[..m].copy_from_slice(param_mono);
            mono[m..].copy_from_slice(coord_mono);
            terms.push((mono, q.clone()));
        }
    }
    MPoly::from_terms(QField, joint.clone(), order.clone(), terms)
}

fn den_lcm(p: &MPoly<FracField>) -> QPoly {
    let base = p.field();
    let mut lcm = MPoly::one(QField, base.registry().clone(), MonomialOrder::GrevLex);
    for (_, c) in p.terms() {
        let d = c.den();
        let g = crate::gcd::poly_gcd(&lcm, d);
        lcm = lcm.mul(&d.exact_div(&g).expect("gcd divides"));
    }
    lcm
}

/// Canonical representative of a generator modulo the unit group of the
/// base field: denominators cleared, parameter content divided out,
/// rational coefficients jointly integer-primitive, leading coefficient
/// of the leading term positive.
pub fn canonical_generator(p: &MPoly<FracField>) -> MPoly<FracField> {
    if p.is_zero() {
        return p.clone();
    }
    let base = p.field();
    let lcm = den_lcm(p);
    let mut numerators: Vec<QPoly> = p
        .terms()
        .iter()
        .map(|(_, c)| {
            let cofactor = lcm.exact_div(c.den()).expect("lcm divisible by denominator");
            c.num().mul(&cofactor)
        })
        .collect();
    let content = canonicalize(&gcd_many(&numerators).expect("nonzero generator"));
    if !content.is_constant() {
        for n in numerators.iter_mut() {
            *n = n.exact_div(&content).expect("content divides");
        }
    }
    let all: Vec<Rat> = numerators
        .iter()
        .flat_map(|n| n.terms().iter().map(|(_, c)| c.clone()))
        .collect();
    let refs: Vec<&Rat> = all.iter().collect();
    let mut s = joint_integer_scale(&refs);
    let lead = numerators[0].leading().expect("nonzero leading coefficient").1;
    if (lead * &s).is_negative() {
        s = -s;
    }
    let terms: Vec<(Vec<u32>, RatFunc<QField>)> = p
        .terms()
        .iter()
        .zip(numerators)
        .map(|((mono, _), n)| (mono.clone(), RatFunc::from_poly(n.scale(&s))))
        .collect();
    MPoly::from_terms(base.clone(), p.registry().clone(), p.order().clone(), terms)
}

/// Re-read a polynomial over a larger parameter field. Every parameter of
/// the old base must exist (by name) in the new one.
pub fn extend_coeffs(p: &MPoly<FracField>, new_base: &FracField) -> MPoly<FracField> {
    let old = p.field().registry();
    let map: Vec<Option<usize>> = old
        .names()
        .iter()
        .map(|n| {
            Some(
                new_base
                    .registry()
                    .index_of(n)
                    .expect("old parameter present in extended base"),
            )
        })
        .collect();
    let terms: Vec<(Vec<u32>, RatFunc<QField>)> = p
        .terms()
        .iter()
        .map(|(mono, c)| {
            let num = c
                .num()
                .map_registry(new_base.registry().clone(), MonomialOrder::GrevLex, &map)
                .expect("total parameter map");
            let den = c
                .den()
                .map_registry(new_base.registry().clone(), MonomialOrder::GrevLex, &map)
                .expect("total parameter map");
            (mono.clone(), RatFunc::new(num, den).expect("nonzero denominator"))
        })
        .collect();
    MPoly::from_terms(new_base.clone(), p.registry().clone(), p.order().clone(), terms)
}
