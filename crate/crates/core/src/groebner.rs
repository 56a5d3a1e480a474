//! Buchberger Groebner engine: ideal membership, elimination, dimension.
//!
//! Normal-strategy pair selection (smallest lcm first) with both classical
//! pair-skipping criteria. A reduction-step budget turns runaway inputs
//! into a `ResourceLimit` error instead of a hang. Output bases are
//! reduced, monic, and sorted descending by leading monomial, so every
//! downstream normal form is deterministic.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::mpoly::MPoly;
use crate::vars::{MonomialOrder, VarRegistry};

pub const DEFAULT_STEP_BUDGET: usize = 200_000;

#[derive(Debug, Clone)]
pub struct GroebnerBasis<F: CoeffField> {
    field: F,
    reg: Arc<VarRegistry>,
    order: MonomialOrder,
    gens: Vec<MPoly<F>>,
}

fn lcm_exp(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn exp_sub(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

struct Budget {
    left: usize,
}

impl Budget {
    fn spend(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::ResourceLimit(
                "reduction step budget exceeded in basis completion".into(),
            ));
        }
        self.left -= 1;
        Ok(())
    }
}

impl<F: CoeffField> GroebnerBasis<F> {
    /// Basis of the zero ideal of a given ring.
    pub fn zero_ideal(field: F, reg: Arc<VarRegistry>, order: MonomialOrder) -> Self {
        GroebnerBasis { field, reg, order, gens: Vec::new() }
    }

    pub fn generators(&self) -> &[MPoly<F>] {
        &self.gens
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.gens.iter().any(|g| g.is_constant() && !g.is_zero())
    }

    /// Unique remainder of f modulo the basis: no remainder term is
    /// divisible by any basis leading monomial.
    pub fn normal_form(&self, f: &MPoly<F>) -> MPoly<F> {
        let mut budget = Budget { left: usize::MAX };
        normal_form_impl(&self.gens, &f.with_order(self.order.clone()), &mut budget)
            .expect("unbounded budget")
    }

    pub fn contains(&self, f: &MPoly<F>) -> bool {
        self.normal_form(f).is_zero()
    }

    /// Basis elements using only the kept variables form a Groebner basis
    /// of the elimination ideal when `order` eliminates the complement.
    /// Callers should build the basis with `elimination_ideal`.
    pub fn restricted_to(&self, keep: &BTreeSet<usize>) -> Vec<MPoly<F>> {
        self.gens.iter().filter(|g| g.uses_only(keep)).cloned().collect()
    }

    /// Elimination ideal keeping only `keep`, as a fresh basis. The zero
    /// ideal eliminates to the zero ideal without invoking Buchberger.
    pub fn eliminate(&self, keep: &BTreeSet<usize>) -> Result<GroebnerBasis<F>> {
        if self.gens.is_empty() {
            return Ok(GroebnerBasis::zero_ideal(
                self.field.clone(),
                self.reg.clone(),
                MonomialOrder::GrevLex,
            ));
        }
        elimination_ideal(&self.gens, keep)
    }

    /// Krull dimension of the quotient ring: the largest number of
    /// variables independent modulo the leading-term ideal. Unit ideal
    /// yields -1.
    pub fn dimension(&self) -> i64 {
        self.dimension_over(&(0..self.reg.len()).collect())
    }

    /// Dimension counting only subsets of `vars` as candidate independent
    /// sets. Leading monomials supported outside `vars` never obstruct.
    pub fn dimension_over(&self, vars: &BTreeSet<usize>) -> i64 {
        if self.is_unit_ideal() {
            return -1;
        }
        let leads: Vec<&[u32]> = self.gens.iter().map(|g| g.leading().unwrap().0).collect();
        let vars: Vec<usize> = vars.iter().copied().collect();
        let mut best = 0i64;
        // Exponential subset scan; registry sizes stay small by contract.
        for mask in 0u32..(1u32 << vars.len()) {
            let size = mask.count_ones() as i64;
            if size <= best {
                continue;
            }
            let subset: BTreeSet<usize> = vars
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let obstructed = leads.iter().any(|m| {
                m.iter().enumerate().all(|(v, &e)| e == 0 || subset.contains(&v))
            });
            if !obstructed {
                best = size;
            }
        }
        best
    }
}

fn normal_form_impl<F: CoeffField>(
    basis: &[MPoly<F>],
    f: &MPoly<F>,
    budget: &mut Budget,
) -> Result<MPoly<F>> {
    let field = f.field().clone();
    let mut rem = MPoly::zero(field.clone(), f.registry().clone(), f.order().clone());
    let mut cur = f.clone();
    'outer: while let Some((m, c)) = cur.leading().map(|(m, c)| (m.to_vec(), c.clone())) {
        for g in basis {
            let (gm, gc) = g.leading().expect("basis elements are nonzero");
            if divides(gm, &m) {
                budget.spend()?;
                let factor = field.neg(&field.div(&c, gc).expect("leading coefficient nonzero"));
                cur = cur.add_scaled_shift(&factor, &exp_sub(&m, gm), g);
                continue 'outer;
            }
        }
        // Leading term irreducible: move it to the remainder.
        let term = MPoly::from_terms(
            field.clone(),
            cur.registry().clone(),
            cur.order().clone(),
            vec![(m, c)],
        );
        rem = rem.add(&term);
        cur = cur.sub(&term);
    }
    Ok(rem)
}

pub fn buchberger<F: CoeffField>(
    gens: &[MPoly<F>],
    order: MonomialOrder,
) -> Result<GroebnerBasis<F>> {
    buchberger_with_budget(gens, order, DEFAULT_STEP_BUDGET)
}

pub fn buchberger_with_budget<F: CoeffField>(
    gens: &[MPoly<F>],
    order: MonomialOrder,
    step_budget: usize,
) -> Result<GroebnerBasis<F>> {
    assert!(!gens.is_empty(), "generator list must be nonempty");
    let field = gens[0].field().clone();
    let reg = gens[0].registry().clone();
    let mut budget = Budget { left: step_budget };

    let mut basis: Vec<MPoly<F>> = Vec::new();
    for g in gens {
        let g = g.with_order(order.clone());
        if !g.is_zero() {
            basis.push(make_monic(&field, &g));
        }
    }
    if basis.is_empty() {
        return Ok(GroebnerBasis { field, reg, order, gens: Vec::new() });
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in 0..i {
            pairs.push((j, i));
        }
    }

    while !pairs.is_empty() {
        // Normal strategy: the pair whose lcm is smallest in the order.
        let mut pick = 0;
        let mut pick_lcm = pair_lcm(&basis, pairs[0]);
        for (idx, &p) in pairs.iter().enumerate().skip(1) {
            let l = pair_lcm(&basis, p);
            if order.cmp(&pick_lcm, &l) == std::cmp::Ordering::Greater {
                pick_lcm = l;
                pick = idx;
            }
        }
        let (i, j) = pairs.swap_remove(pick);

        let (mi, _) = basis[i].leading().unwrap();
        let (mj, _) = basis[j].leading().unwrap();
        // Coprime leading monomials: S-polynomial reduces to zero.
        if lcm_exp(mi, mj) == mi.iter().zip(mj).map(|(a, b)| a + b).collect::<Vec<_>>() {
            continue;
        }
        // Chain criterion: a third element dividing the lcm whose pairs
        // with both ends are already handled makes this pair redundant.
        if (0..basis.len()).any(|k| {
            k != i
                && k != j
                && divides(basis[k].leading().unwrap().0, &pick_lcm)
                && !pairs.contains(&key(i, k))
                && !pairs.contains(&key(j, k))
        }) {
            continue;
        }

        let s = spoly(&field, &basis[i], &basis[j]);
        let r = normal_form_impl(&basis, &s, &mut budget)?;
        if !r.is_zero() {
            let r = make_monic(&field, &r);
            let idx = basis.len();
            basis.push(r);
            for t in 0..idx {
                pairs.push((t, idx));
            }
        }
    }

    let reduced = inter_reduce(&field, basis, &order, &mut budget)?;
    // The completed basis must see every input generator as a member.
    for g in gens {
        let nf = normal_form_impl(&reduced, &g.with_order(order.clone()), &mut budget)?;
        assert!(nf.is_zero(), "completed basis fails to reduce an input generator");
    }
    Ok(GroebnerBasis { field, reg, order, gens: reduced })
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

fn pair_lcm<F: CoeffField>(basis: &[MPoly<F>], (i, j): (usize, usize)) -> Vec<u32> {
    lcm_exp(basis[i].leading().unwrap().0, basis[j].leading().unwrap().0)
}

fn spoly<F: CoeffField>(field: &F, f: &MPoly<F>, g: &MPoly<F>) -> MPoly<F> {
    let (mf, _) = f.leading().unwrap();
    let (mg, _) = g.leading().unwrap();
    let l = lcm_exp(mf, mg);
    // Both inputs are monic.
    let zero = MPoly::zero(field.clone(), f.registry().clone(), f.order().clone());
    let a = zero.add_scaled_shift(&field.one(), &exp_sub(&l, mf), f);
    a.add_scaled_shift(&field.neg(&field.one()), &exp_sub(&l, mg), g)
}

fn make_monic<F: CoeffField>(field: &F, f: &MPoly<F>) -> MPoly<F> {
    let (_, c) = f.leading().expect("nonzero");
    let inv = field.inv(c).expect("leading coefficient invertible");
    f.scale(&inv)
}

fn inter_reduce<F: CoeffField>(
    field: &F,
    mut basis: Vec<MPoly<F>>,
    order: &MonomialOrder,
    budget: &mut Budget,
) -> Result<Vec<MPoly<F>>> {
    // Minimalize: drop members whose leading monomial another divides.
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let mi = basis[i].leading().unwrap().0.to_vec();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let mj = basis[j].leading().unwrap().0;
            if divides(mj, &mi) && (mj != mi.as_slice() || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    basis = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| if k { Some(g) } else { None })
        .collect();
    // Fully reduce each member against the others.
    let mut out: Vec<MPoly<F>> = Vec::with_capacity(basis.len());
    for i in 0..basis.len() {
        let others: Vec<MPoly<F>> = basis
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let r = normal_form_impl(&others, &basis[i], budget)?;
        if !r.is_zero() {
            out.push(make_monic(field, &r));
        }
    }
    out.sort_by(|a, b| order.cmp(b.leading().unwrap().0, a.leading().unwrap().0));
    out.reverse();
    Ok(out)
}

/// Groebner basis of the ideal's intersection with the subring in `keep`,
/// via a block order eliminating the complement. The resulting basis
/// polynomials use only kept variables.
pub fn elimination_ideal<F: CoeffField>(
    gens: &[MPoly<F>],
    keep: &BTreeSet<usize>,
) -> Result<GroebnerBasis<F>> {
    let reg = gens[0].registry().clone();
    let eliminated: Vec<usize> = (0..reg.len()).filter(|v| !keep.contains(v)).collect();
    let order = MonomialOrder::elim(&eliminated, reg.len());
    let gb = buchberger(gens, order.clone())?;
    let field = gb.field.clone();
    let restricted = gb.restricted_to(keep);
    Ok(GroebnerBasis { field, reg, order, gens: restricted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::{qpoly_const, qpoly_var, QPoly};
    use crate::rational::rat_int;

    fn xyz() -> (Arc<VarRegistry>, QPoly, QPoly, QPoly) {
        let reg = VarRegistry::new(vec!["x", "y", "z"]);
        let x = qpoly_var(&reg, MonomialOrder::GrevLex, 0);
        let y = qpoly_var(&reg, MonomialOrder::GrevLex, 1);
        let z = qpoly_var(&reg, MonomialOrder::GrevLex, 2);
        (reg, x, y, z)
    }

    #[test]
    fn single_generator_is_its_own_basis() {
        let (reg, x, _, _) = xyz();
        let one = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(1));
        let gb = buchberger(&[x.sub(&one)], MonomialOrder::GrevLex).unwrap();
        assert_eq!(gb.generators().len(), 1);
        assert_eq!(gb.generators()[0], x.sub(&one).with_order(MonomialOrder::GrevLex));
    }

    #[test]
    fn unit_ideal() {
        let (reg, _, _, _) = xyz();
        let one = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(1));
        let gb = buchberger(&[one.clone()], MonomialOrder::GrevLex).unwrap();
        assert!(gb.is_unit_ideal());
        assert_eq!(gb.generators().len(), 1);
        assert!(gb.generators()[0].is_constant());
    }

    #[test]
    fn twisted_cubic_elimination() {
        // <x^2 - y, x^3 - z> eliminating x contains y^3 - z^2.
        let (_reg, x, y, z) = xyz();
        let g1 = x.pow(2).sub(&y);
        let g2 = x.pow(3).sub(&z);
        let gb = buchberger(&[g1, g2], MonomialOrder::Lex).unwrap();
        let target = y.pow(3).sub(&z.pow(2));
        assert!(gb.contains(&target));

        let keep: BTreeSet<usize> = [1usize, 2].into_iter().collect();
        let elim = elimination_ideal(&[x.pow(2).sub(&y), x.pow(3).sub(&z)], &keep).unwrap();
        assert_eq!(elim.generators().len(), 1);
        let g = &elim.generators()[0];
        assert!(g.sub(&target.with_order(g.order().clone())).is_zero());
    }

    #[test]
    fn membership_and_normal_form() {
        let (_reg, x, _, _) = xyz();
        let gb = buchberger(&[x.pow(2)], MonomialOrder::GrevLex).unwrap();
        let nf = gb.normal_form(&x);
        assert!(!gb.contains(&x));
        assert_eq!(nf, x.clone());
        assert!(gb.contains(&x.pow(5)));
    }

    #[test]
    fn elimination_examples() {
        let (reg, x, y, _) = xyz();
        // <x - y> keep {y}: zero ideal.
        let keep: BTreeSet<usize> = [1usize].into_iter().collect();
        let e1 = elimination_ideal(&[x.sub(&y)], &keep).unwrap();
        assert!(e1.is_zero_ideal());
        // <x - 1, y - 2> keep {y}: <y - 2>.
        let one = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(1));
        let two = qpoly_const(&reg, MonomialOrder::GrevLex, rat_int(2));
        let e2 = elimination_ideal(&[x.sub(&one), y.sub(&two)], &keep).unwrap();
        assert_eq!(e2.generators().len(), 1);
        let g = &e2.generators()[0];
        assert!(g.sub(&y.sub(&two).with_order(g.order().clone())).is_zero());
    }

    #[test]
    fn dimension_examples() {
        let reg4 = VarRegistry::new(vec!["a", "b", "c", "d"]);
        let zero = crate::mpoly::qpoly_zero(&reg4, MonomialOrder::GrevLex);
        let gb = buchberger(&[zero], MonomialOrder::GrevLex).unwrap();
        assert_eq!(gb.dimension(), 4);

        let (_reg, x, y, _) = xyz();
        let gb1 = buchberger(&[x.sub(&y)], MonomialOrder::GrevLex).unwrap();
        assert_eq!(gb1.dimension(), 2);
        let gb0 = buchberger(&[x.clone(), y.clone()], MonomialOrder::GrevLex).unwrap();
        // z survives.
        assert_eq!(gb0.dimension(), 1);
        let gb00 = buchberger(&[x.clone(), y.clone()], MonomialOrder::GrevLex).unwrap();
        let coords: BTreeSet<usize> = [0usize, 1].into_iter().collect();
        assert_eq!(gb00.dimension_over(&coords), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let (_reg, x, y, z) = xyz();
        let g1 = x.pow(2).sub(&y);
        let g2 = x.pow(3).sub(&z);
        let err = buchberger_with_budget(&[g1, g2], MonomialOrder::Lex, 2);
        assert!(matches!(err, Err(Error::ResourceLimit(_))));
    }
}
