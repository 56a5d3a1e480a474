//! Exact q-expansions of E4, E6, Delta, j; the order-3 differential
//! equation satisfied by j; modular polynomials for levels up to 5; and
//! the symbolic pieces R, eta, Psi shared by the differential layers.
//!
//! The differential equation is checked in theta-form. With q = e(z) the
//! chain rule gives d/dz = 2*pi*i * theta for theta = q d/dq, so the
//! z-derivative identity divides through by (2*pi*i)^2 and becomes
//!
//!   theta^3(j)*theta(j) - (3/2)*theta^2(j)^2 + R(j)*theta(j)^4 = 0,
//!
//! an identity between q-series with rational coefficients. Multiplying
//! by 2*j^2*(j-1728)^2 clears the denominator of R, so the whole check
//! runs in exact polynomial arithmetic on series.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::mpoly::{eval_in_field, MPoly, QPoly};
use crate::rational::{rat, rat_int, Rat};
use crate::series::LaurentSeries;
use crate::vars::{MonomialOrder, VarRegistry};

/// A neutral truncation for exactly-known series, large enough that the
/// min-propagation rules never select it.
const EXACT: i64 = i64::MAX / 4;

// ---------------------------------------------------------------------------
// q-expansions

/// The classical expansions bundled at a common truncation.
#[derive(Debug, Clone)]
pub struct JExpansion {
    pub order: i64,
    pub e4: LaurentSeries,
    pub e6: LaurentSeries,
    pub delta: LaurentSeries,
    pub j: LaurentSeries,
}

fn divisor_power_sum(n: i64, k: u32) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d.pow(k)).sum()
}

fn eisenstein(order: i64, weight_coeff: i64, k: u32) -> LaurentSeries {
    let mut coeffs = vec![rat_int(1)];
    for n in 1..order {
        coeffs.push(rat_int(weight_coeff * divisor_power_sum(n, k)));
    }
    LaurentSeries::new(1, 0, coeffs, order)
}

/// E4, E6, Delta, j, all exact through the requested order.
pub fn j_series(order: i64) -> JExpansion {
    assert!(order >= 2, "expansion order must be at least 2");
    // Pad so that the division producing j is still valid through `order`.
    let t = order + 2;
    let e4 = eisenstein(t, 240, 3);
    let e6 = eisenstein(t, -504, 5);
    let mut euler = LaurentSeries::one(1, t);
    for n in 1..t {
        let factor = LaurentSeries::new(1, 0, {
            let mut c = vec![rat_int(1)];
            c.extend(std::iter::repeat(Rat::zero()).take((n - 1) as usize));
            c.push(rat_int(-1));
            c
        }, t);
        euler = euler.mul(&factor);
    }
    let delta = euler.pow(24).mul(&LaurentSeries::monomial(1, rat_int(1), 1, EXACT));
    let j = e4.pow(3).mul(&delta.inv().expect("delta is nonzero"));

    let out = JExpansion {
        order,
        e4: e4.truncate_to(order),
        e6: e6.truncate_to(order),
        delta: delta.truncate_to(order),
        j: j.truncate_to(order),
    };
    debug_assert!(out.check_invariants());
    out
}

impl JExpansion {
    /// j*Delta = E4^3 and 1728*Delta = E4^3 - E6^2, through truncation.
    pub fn check_invariants(&self) -> bool {
        let jd = self.j.mul(&self.delta);
        let e43 = self.e4.pow(3);
        let first = jd.sub(&e43).is_zero();
        let second = self
            .delta
            .scale(&rat_int(1728))
            .sub(&e43.sub(&self.e6.pow(2)))
            .is_zero();
        let dlead = self.delta.lowest() == Some(1) && self.delta.coeff(1).is_one();
        let jlead = self.j.lowest() == Some(-1) && self.j.coeff(-1).is_one();
        first && second && dlead && jlead
    }
}

// ---------------------------------------------------------------------------
// The order-3 differential equation, verified on series

#[derive(Debug, Clone)]
pub struct OdeReport {
    pub order: i64,
    /// Scaled exponent range actually checked: all exponents < valid_through.
    pub valid_through: i64,
    /// First nonzero coefficient, if the identity fails.
    pub violation: Option<(i64, Rat)>,
}

impl OdeReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Evaluate the theta-form combination on an arbitrary series standing in
/// for j and report whether it vanishes identically through truncation.
pub fn verify_ode_for(j: &LaurentSeries) -> OdeReport {
    let tj = j.theta();
    let t2j = tj.theta();
    let t3j = t2j.theta();
    let bracket = t3j.mul(&tj).sub(&t2j.mul(&t2j).scale(&rat(3, 2)));
    let c1728 = LaurentSeries::constant(j.grid(), rat_int(1728), EXACT);
    let shifted = j.sub(&c1728);
    let lead = j.mul(j).mul(&shifted).mul(&shifted).scale(&rat_int(2));
    let rnum = j
        .mul(j)
        .sub(&j.scale(&rat_int(1968)))
        .add(&LaurentSeries::constant(j.grid(), rat_int(2654208), EXACT));
    let p = lead.mul(&bracket).add(&rnum.mul(&tj.pow(4)));
    let violation = p.terms().next().map(|(k, c)| (k, c.clone()));
    OdeReport { order: j.trunc(), valid_through: p.trunc(), violation }
}

/// Build j at the given order and verify the identity.
pub fn verify_j_ode(order: i64) -> OdeReport {
    assert!(order >= 5, "the identity check needs order at least 5");
    verify_ode_for(&j_series(order).j)
}

// ---------------------------------------------------------------------------
// Modular polynomials

/// Degree in X of the level-N modular polynomial:
/// N times the product of (1 + 1/p) over distinct primes p dividing N.
pub fn psi_degree(level: u32) -> u32 {
    assert!(level >= 1);
    let mut res = level;
    let mut n = level;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            res = res / p * (p + 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        res = res / n * (n + 1);
    }
    res
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularPolynomial {
    level: u32,
    poly: QPoly,
}

pub fn modpoly_registry() -> Arc<VarRegistry> {
    VarRegistry::new(vec!["X", "Y"])
}

impl ModularPolynomial {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn degree_x(&self) -> u32 {
        self.poly.degree_in(0)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.level == 1 {
            // X - Y is antisymmetric; symmetry starts at level 2.
            return false;
        }
        self.poly.sub(&self.swapped()).is_zero()
    }

    fn swapped(&self) -> QPoly {
        let reg = self.poly.registry().clone();
        let order = self.poly.order().clone();
        let x = MPoly::var(QField, reg.clone(), order.clone(), 0);
        let y = MPoly::var(QField, reg, order, 1);
        self.poly.compose(&[y, x])
    }

    /// Substitute arbitrary field elements for X and Y.
    pub fn eval_in<F: CoeffField>(&self, field: &F, x: &F::Elem, y: &F::Elem) -> F::Elem {
        eval_in_field(&self.poly, &[x.clone(), y.clone()], field)
    }

    /// Substitute polynomials for X and Y (same coefficient field).
    pub fn eval_poly<F: CoeffField>(&self, x: &MPoly<F>, y: &MPoly<F>) -> MPoly<F> {
        let field = x.field().clone();
        let reg = x.registry().clone();
        let order = x.order().clone();
        let mut acc = MPoly::zero(field.clone(), reg.clone(), order.clone());
        for (m, c) in self.poly.terms() {
            let term = x
                .pow(m[0])
                .mul(&y.pow(m[1]))
                .scale(&field.from_rat(c));
            acc = acc.add(&term);
        }
        acc
    }

    /// Substitute two Laurent series for X and Y.
    pub fn eval_series(&self, x: &LaurentSeries, y: &LaurentSeries) -> LaurentSeries {
        let mut by_x: BTreeMap<u32, Vec<(u32, Rat)>> = BTreeMap::new();
        let mut max_y = 0;
        for (m, c) in self.poly.terms() {
            by_x.entry(m[0]).or_default().push((m[1], c.clone()));
            max_y = max_y.max(m[1]);
        }
        let ypow: Vec<LaurentSeries> = (0..=max_y).map(|e| y.pow(e)).collect();
        let grid = x.grid().max(y.grid());
        let mut acc = LaurentSeries::zero(grid, EXACT);
        for (xe, terms) in by_x {
            let mut row = LaurentSeries::zero(grid, EXACT);
            for (ye, c) in terms {
                row = row.add(&ypow[ye as usize].scale(&c));
            }
            acc = acc.add(&row.mul(&x.pow(xe)));
        }
        acc
    }

    /// Does Phi_N(j(q), j(q^N)) vanish through the available truncation?
    pub fn substitution_holds(&self, exp: &JExpansion) -> bool {
        let jn = exp.j.substitute_power(self.level);
        self.eval_series(&exp.j, &jn).is_zero()
    }

    pub fn partial_x(&self) -> QPoly {
        self.poly.partial(0)
    }

    pub fn partial_y(&self) -> QPoly {
        self.poly.partial(1)
    }
}

/// Power sums of the conjugate class { j(zeta^b q^(1/N)) } as q-series:
/// the class trace keeps exactly the exponents divisible by N.
fn class_power_sums(j: &LaurentSeries, level: u32) -> Vec<LaurentSeries> {
    let mut sums = Vec::with_capacity(level as usize);
    let mut power = j.clone();
    for _ in 0..level {
        sums.push(
            power
                .keep_multiples(level)
                .compress(level)
                .scale(&rat_int(level as i64)),
        );
        power = power.mul(j);
    }
    sums
}

/// Newton's identities: elementary symmetric functions from power sums.
fn elementary_from_power_sums(p: &[LaurentSeries], grid: u8) -> Vec<LaurentSeries> {
    let mut e = vec![LaurentSeries::one(grid, EXACT)];
    for i in 1..=p.len() {
        let mut acc = LaurentSeries::zero(grid, EXACT);
        for m in 1..=i {
            let term = e[i - m].mul(&p[m - 1]);
            acc = if m % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        e.push(acc.scale(&rat(1, i as i64)));
    }
    e
}

/// Coefficient list (index = X-power) of prod (X - r) over the roots.
fn poly_from_roots(mut coeffs: Vec<LaurentSeries>, roots: &[LaurentSeries]) -> Vec<LaurentSeries> {
    for r in roots {
        let grid = coeffs[0].grid().max(r.grid());
        let mut next = vec![LaurentSeries::zero(grid, EXACT); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1].add(c);
            next[k] = next[k].sub(&c.mul(r));
        }
        coeffs = next;
    }
    coeffs
}

/// Recover the unique Laurent-polynomial-in-j representation of a series.
fn match_j_polynomial(series: &LaurentSeries, j: &LaurentSeries, level: u32) -> Result<Vec<(u32, Rat)>> {
    let mut cur = series.clone();
    let mut out = Vec::new();
    loop {
        if cur.trunc() < 2 {
            return Err(Error::InsufficientOrder(format!(
                "level {}: series truncation {} leaves no margin for coefficient matching",
                level,
                cur.trunc()
            )));
        }
        let Some(lo) = cur.lowest() else {
            return Ok(out);
        };
        assert!(
            lo <= 0,
            "level {}: leftover tail of positive order {} cannot come from a polynomial in j",
            level,
            lo
        );
        let d = (-lo) as u32;
        let c = cur.coeff(lo);
        out.push((d, c.clone()));
        cur = cur.sub(&j.pow(d).scale(&c));
    }
}

/// Compute the level-N modular polynomial by expanding the product over
/// the N-isogeny transformations and matching the pole parts against
/// powers of j. Levels above 5 are out of scope.
pub fn modular_polynomial(level: u32, order: i64) -> Result<ModularPolynomial> {
    if level == 0 || level > 5 {
        return Err(Error::UnsupportedLevel(level));
    }
    let exp = j_series(order);
    let j = &exp.j;
    let grid1 = 1u8;

    // Coefficient list of the monic product over all transformation roots,
    // as q-grid series.
    let coeffs: Vec<LaurentSeries> = match level {
        1 => poly_from_roots(vec![LaurentSeries::one(grid1, EXACT)], &[j.clone()]),
        2 => {
            // Half-grid roots j(q^(1/2)), j(-q^(1/2)) plus j(q^2);
            // symmetrization lands every coefficient on integer exponents.
            let roots = [
                j.half_exponents(false),
                j.half_exponents(true),
                j.substitute_power(2).promote(),
            ];
            poly_from_roots(vec![LaurentSeries::one(2, EXACT)], &roots)
                .into_iter()
                .map(|c| c.demote())
                .collect()
        }
        3 | 4 | 5 => {
            // Conjugate class { j(zeta^b q^(1/N)) }: elementary symmetric
            // functions from rational power-sum traces, then the leftover
            // transformations as explicit extra roots.
            let e = elementary_from_power_sums(&class_power_sums(j, level), grid1);
            let l = level as usize;
            let class_coeffs: Vec<LaurentSeries> = (0..=l)
                .map(|i| {
                    let c = e[l - i].clone();
                    if (l - i) % 2 == 1 { c.neg() } else { c }
                })
                .collect();
            let extra: Vec<LaurentSeries> = if level == 4 {
                vec![j.negate_variable(), j.substitute_power(4)]
            } else {
                vec![j.substitute_power(level)]
            };
            poly_from_roots(class_coeffs, &extra)
        }
        _ => unreachable!(),
    };

    let psi = psi_degree(level);
    assert_eq!(coeffs.len() as u32, psi + 1, "root count disagrees with psi");

    let reg = modpoly_registry();
    let order_tag = MonomialOrder::GrevLex;
    let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
    for (xe, c) in coeffs.iter().enumerate() {
        if xe as u32 == psi {
            // Monic top coefficient.
            terms.push((vec![psi, 0], rat_int(1)));
            continue;
        }
        for (ye, a) in match_j_polynomial(c, j, level)? {
            assert!(a.denom().is_one(), "modular polynomial coefficient is not an integer");
            terms.push((vec![xe as u32, ye], a));
        }
    }
    let poly = MPoly::from_terms(QField, reg, order_tag, terms);
    let result = ModularPolynomial { level, poly };

    // Self-validation before anything downstream trusts the result.
    assert_eq!(result.degree_x(), psi);
    if level >= 2 {
        assert!(result.is_symmetric(), "level {} polynomial is not symmetric", level);
    }
    assert!(
        result.substitution_holds(&exp),
        "level {} polynomial fails its own substitution check",
        level
    );
    Ok(result)
}

// ---------------------------------------------------------------------------
// Cache file format

/// Serialize levels as "level N" blocks of "monomial a b coeff" lines.
pub fn modpoly_cache_text(polys: &[ModularPolynomial]) -> String {
    let mut out = String::new();
    for mp in polys {
        out.push_str(&format!("level {}\n", mp.level));
        for (m, c) in mp.poly.terms() {
            out.push_str(&format!("monomial {} {} {}\n", m[0], m[1], c));
        }
    }
    out
}

/// Parse cache text; syntax only. Use `load_modpoly_cache` to re-verify.
pub fn parse_modpoly_cache(text: &str) -> Result<Vec<ModularPolynomial>> {
    let reg = modpoly_registry();
    let mut blocks: Vec<(u32, Vec<(Vec<u32>, Rat)>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields[0] {
            "level" => {
                if fields.len() != 2 {
                    return Err(Error::Parse { line, col: 0, msg: "expected: level N".into() });
                }
                let n: u32 = fields[1]
                    .parse()
                    .map_err(|_| Error::Parse { line, col: 0, msg: "level is not an integer".into() })?;
                blocks.push((n, Vec::new()));
            }
            "monomial" => {
                if fields.len() != 4 {
                    return Err(Error::Parse { line, col: 0, msg: "expected: monomial a b coeff".into() });
                }
                let a: u32 = fields[1]
                    .parse()
                    .map_err(|_| Error::Parse { line, col: 0, msg: "bad X exponent".into() })?;
                let b: u32 = fields[2]
                    .parse()
                    .map_err(|_| Error::Parse { line, col: 0, msg: "bad Y exponent".into() })?;
                let c: num_bigint::BigInt = fields[3]
                    .parse()
                    .map_err(|_| Error::Parse { line, col: 0, msg: "bad integer coefficient".into() })?;
                let Some(block) = blocks.last_mut() else {
                    return Err(Error::Parse { line, col: 0, msg: "monomial before any level line".into() });
                };
                block.1.push((vec![a, b], Rat::from_integer(c)));
            }
            other => {
                return Err(Error::Parse { line, col: 0, msg: format!("unknown directive '{}'", other) });
            }
        }
    }
    Ok(blocks
        .into_iter()
        .map(|(level, terms)| ModularPolynomial {
            level,
            poly: MPoly::from_terms(QField, reg.clone(), MonomialOrder::GrevLex, terms),
        })
        .collect())
}

/// Parse and re-verify the substitution invariant before trusting a cache.
pub fn load_modpoly_cache(text: &str, order: i64) -> Result<Vec<ModularPolynomial>> {
    let polys = parse_modpoly_cache(text)?;
    let exp = j_series(order);
    for mp in &polys {
        if mp.level == 0 || mp.level > 5 {
            return Err(Error::UnsupportedLevel(mp.level));
        }
        if !mp.substitution_holds(&exp) {
            return Err(Error::CacheMismatch(mp.level));
        }
    }
    Ok(polys)
}

/// Smallest series order that leaves the matching margin for each level.
fn construction_order(level: u32) -> i64 {
    match level {
        1 => 8,
        2 => 24,
        3 => 28,
        4 => 36,
        _ => 44,
    }
}

/// Memoizing provider: computes each level once. The configured order is a
/// floor; construction raises it to the per-level minimum, so a provider
/// built for short series still serves every supported level. The result is
/// exact either way since the coefficients are integers, not truncations.
#[derive(Debug)]
pub struct ModularProvider {
    order: i64,
    cache: BTreeMap<u32, ModularPolynomial>,
}

impl ModularProvider {
    pub fn new(order: i64) -> Self {
        ModularProvider { order, cache: BTreeMap::new() }
    }

    pub fn with_preloaded(order: i64, polys: Vec<ModularPolynomial>) -> Self {
        let cache = polys.into_iter().map(|p| (p.level, p)).collect();
        ModularProvider { order, cache }
    }

    pub fn get(&mut self, level: u32) -> Result<&ModularPolynomial> {
        if !self.cache.contains_key(&level) {
            let mp = modular_polynomial(level, self.order.max(construction_order(level)))?;
            self.cache.insert(level, mp);
        }
        Ok(&self.cache[&level])
    }

    pub fn computed(&self) -> impl Iterator<Item = &ModularPolynomial> {
        self.cache.values()
    }
}

// ---------------------------------------------------------------------------
// R, eta, Psi over any coefficient field

/// R(y) = (y^2 - 1968y + 2654208) / (2y^2 (y - 1728)^2).
pub fn ode_r<F: CoeffField>(field: &F, y: &F::Elem) -> Result<F::Elem> {
    if field.is_zero(y) {
        return Err(Error::Pole("y = 0 annihilates the denominator of R".into()));
    }
    let shift = field.sub(y, &field.from_rat(&rat_int(1728)));
    if field.is_zero(&shift) {
        return Err(Error::Pole("y = 1728 annihilates the denominator of R".into()));
    }
    let y2 = field.mul(y, y);
    let num = field.add(
        &field.sub(&y2, &field.mul(&field.from_rat(&rat_int(1968)), y)),
        &field.from_rat(&rat_int(2654208)),
    );
    let den = field.mul(
        &field.from_rat(&rat_int(2)),
        &field.mul(&y2, &field.mul(&shift, &shift)),
    );
    field.div(&num, &den)
}

/// eta(y, y', y'') = (3/2) (y'')^2 / y' - R(y) (y')^3.
pub fn ode_eta<F: CoeffField>(field: &F, y0: &F::Elem, y1: &F::Elem, y2: &F::Elem) -> Result<F::Elem> {
    if field.is_zero(y1) {
        return Err(Error::Pole("y' = 0 annihilates the denominator of eta".into()));
    }
    let r = ode_r(field, y0)?;
    let first = field.mul(
        &field.from_rat(&rat(3, 2)),
        &field.div(&field.mul(y2, y2), y1)?,
    );
    let cube = field.mul(y1, &field.mul(y1, y1));
    Ok(field.sub(&first, &field.mul(&r, &cube)))
}

/// Psi(y0, y1, y2, y3) = y3/y1 - (3/2)(y2/y1)^2 + R(y0) y1^2.
pub fn ode_psi<F: CoeffField>(
    field: &F,
    y0: &F::Elem,
    y1: &F::Elem,
    y2: &F::Elem,
    y3: &F::Elem,
) -> Result<F::Elem> {
    if field.is_zero(y1) {
        return Err(Error::Pole("y' = 0 annihilates the denominator of Psi".into()));
    }
    let r = ode_r(field, y0)?;
    let ratio = field.div(y2, y1)?;
    Ok(field.add(
        &field.sub(
            &field.div(y3, y1)?,
            &field.mul(&field.from_rat(&rat(3, 2)), &field.mul(&ratio, &ratio)),
        ),
        &field.mul(&r, &field.mul(y1, y1)),
    ))
}

// ---------------------------------------------------------------------------
// Constant-coordinate lemma

/// Substitute the general solution of y'' = c, namely
/// y = (c/2)z^2 + dz + e with y' = cz + d, into eta and return the
/// cleared numerator as a polynomial in z over Q(c, d, e). Its
/// non-vanishing is what forces z to be constant whenever the three
/// higher coordinates are.
pub fn lemma_constant_poly() -> MPoly<crate::ratfunc::FracField> {
    use crate::ratfunc::{FracField, RatFunc};

    let reg = VarRegistry::new(vec!["z", "c", "d", "e"]);
    let frac = FracField::new(reg.clone());
    let z = frac.var(0);
    let c = frac.var(1);
    let d = frac.var(2);
    let e = frac.var(3);

    let half = frac.from_rat(&rat(1, 2));
    let y0 = frac.add(
        &frac.mul(&half, &frac.mul(&c, &frac.mul(&z, &z))),
        &frac.add(&frac.mul(&d, &z), &e),
    );
    let y1 = frac.add(&frac.mul(&c, &z), &d);
    let value: RatFunc<QField> =
        ode_eta(&frac, &y0, &y1, &c).expect("generic arguments avoid every pole");
    let num = value.num().clone();

    // Present the numerator as a polynomial in z over Q(c, d, e).
    let zreg = VarRegistry::new(vec!["z"]);
    let preg = VarRegistry::new(vec!["c", "d", "e"]);
    let out_field = FracField::new(preg.clone());
    let mut terms: Vec<(Vec<u32>, RatFunc<QField>)> = Vec::new();
    let mut by_z: BTreeMap<u32, Vec<(Vec<u32>, Rat)>> = BTreeMap::new();
    for (m, coeff) in num.terms() {
        by_z.entry(m[0]).or_default().push((vec![m[1], m[2], m[3]], coeff.clone()));
    }
    for (ze, coeff_terms) in by_z {
        let cpoly = MPoly::from_terms(QField, preg.clone(), MonomialOrder::GrevLex, coeff_terms);
        terms.push((vec![ze], RatFunc::from_poly(cpoly)));
    }
    let poly = MPoly::from_terms(out_field, zreg, MonomialOrder::GrevLex, terms);
    assert!(!poly.is_zero(), "the constant-coordinate equation degenerated");
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::FracField;

    #[test]
    fn classical_expansions() {
        let exp = j_series(8);
        assert_eq!(exp.e4.coeff(0), rat_int(1));
        assert_eq!(exp.e4.coeff(1), rat_int(240));
        assert_eq!(exp.e4.coeff(2), rat_int(2160));
        assert_eq!(exp.delta.coeff(1), rat_int(1));
        assert_eq!(exp.delta.coeff(2), rat_int(-24));
        assert_eq!(exp.j.coeff(-1), rat_int(1));
        assert_eq!(exp.j.coeff(0), rat_int(744));
        assert_eq!(exp.j.coeff(1), rat_int(196884));
        assert_eq!(exp.j.coeff(2), rat_int(21493760));
        assert!(exp.check_invariants());
    }

    #[test]
    fn ode_holds_and_perturbation_fails() {
        let rep = verify_j_ode(10);
        assert!(rep.holds());
        assert!(rep.valid_through > rep.order - 6);

        let exp = j_series(10);
        let perturbed = exp.j.add(&LaurentSeries::monomial(1, rat_int(1), 2, exp.j.trunc()));
        let bad = verify_ode_for(&perturbed);
        assert!(!bad.holds());
        let (k, c) = bad.violation.unwrap();
        assert!(k < bad.valid_through);
        assert!(!c.is_zero());
    }

    #[test]
    fn psi_degree_values() {
        assert_eq!(psi_degree(1), 1);
        assert_eq!(psi_degree(2), 3);
        assert_eq!(psi_degree(3), 4);
        assert_eq!(psi_degree(4), 6);
        assert_eq!(psi_degree(5), 6);
    }

    #[test]
    fn level_one_is_difference() {
        let mp = modular_polynomial(1, 8).unwrap();
        let reg = mp.poly().registry().clone();
        let x = MPoly::var(QField, reg.clone(), MonomialOrder::GrevLex, 0);
        let y = MPoly::var(QField, reg, MonomialOrder::GrevLex, 1);
        assert!(mp.poly().sub(&x.sub(&y)).is_zero());
    }

    #[test]
    fn level_two_classical_coefficients() {
        let mp = modular_polynomial(2, 24).unwrap();
        assert_eq!(mp.degree_x(), 3);
        assert!(mp.is_symmetric());
        let coeff = |a: u32, b: u32| -> Rat {
            mp.poly()
                .terms()
                .iter()
                .find(|(m, _)| m[0] == a && m[1] == b)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Rat::zero)
        };
        assert_eq!(coeff(3, 0), rat_int(1));
        assert_eq!(coeff(2, 2), rat_int(-1));
        assert_eq!(coeff(2, 1), rat_int(1488));
        assert_eq!(coeff(2, 0), rat_int(-162000));
        assert_eq!(coeff(1, 1), rat_int(40773375));
        assert_eq!(coeff(1, 0), rat_int(8748000000));
        assert_eq!(coeff(0, 0), rat_int(-157464000000000));
    }

    #[test]
    fn higher_levels_pass_invariants() {
        for (level, order) in [(3u32, 28i64), (4, 36), (5, 44)] {
            let mp = modular_polynomial(level, order).unwrap();
            assert_eq!(mp.degree_x(), psi_degree(level));
            assert!(mp.is_symmetric());
            for (_, c) in mp.poly().terms() {
                assert!(c.denom().is_one());
            }
        }
    }

    #[test]
    fn insufficient_order_reported() {
        assert!(matches!(
            modular_polynomial(5, 6),
            Err(Error::InsufficientOrder(_))
        ));
    }

    #[test]
    fn unsupported_level_rejected() {
        assert!(matches!(modular_polynomial(6, 20), Err(Error::UnsupportedLevel(6))));
        assert!(matches!(modular_polynomial(0, 20), Err(Error::UnsupportedLevel(0))));
    }

    #[test]
    fn cache_roundtrip_and_verification() {
        let mp = modular_polynomial(2, 24).unwrap();
        let text = modpoly_cache_text(std::slice::from_ref(&mp));
        let loaded = load_modpoly_cache(&text, 16).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0], mp);

        // A corrupted coefficient must be caught by re-verification.
        let bad = text.replace("1488", "1489");
        assert!(matches!(load_modpoly_cache(&bad, 16), Err(Error::CacheMismatch(2))));
    }

    #[test]
    fn provider_raises_order_floor() {
        let mut p = ModularProvider::new(8);
        assert_eq!(p.get(3).unwrap().level, 3);
    }

    #[test]
    fn r_eta_psi_symbolic_relations() {
        // Psi(y0, y1, y2, eta(y0, y1, y2)) = 0 over Q(y0, y1, y2).
        let reg = VarRegistry::new(vec!["y0", "y1", "y2"]);
        let f = FracField::new(reg);
        let y0 = f.var(0);
        let y1 = f.var(1);
        let y2 = f.var(2);
        let eta = ode_eta(&f, &y0, &y1, &y2).unwrap();
        let psi = ode_psi(&f, &y0, &y1, &y2, &eta).unwrap();
        assert!(f.is_zero(&psi));
    }

    #[test]
    fn r_pole_detection() {
        let q = QField;
        assert!(matches!(ode_r(&q, &rat_int(0)), Err(Error::Pole(_))));
        assert!(matches!(ode_r(&q, &rat_int(1728)), Err(Error::Pole(_))));
        assert!(ode_r(&q, &rat_int(2)).is_ok());
    }

    #[test]
    fn eta_at_unit_derivatives() {
        // eta(j, 1, 1) = 3/2 - R(j) over Q(j).
        let reg = VarRegistry::new(vec!["j"]);
        let f = FracField::new(reg);
        let jv = f.var(0);
        let one = f.one();
        let eta = ode_eta(&f, &jv, &one, &one).unwrap();
        let expected = f.sub(&f.from_rat(&rat(3, 2)), &ode_r(&f, &jv).unwrap());
        assert!(f.is_zero(&f.sub(&eta, &expected)));
    }

    #[test]
    fn lemma_polynomial_is_nontrivial() {
        let poly = lemma_constant_poly();
        assert!(!poly.is_zero());
        let field = poly.field().clone();
        let (top, lead) = {
            let (m, c) = poly.leading().unwrap();
            (m[0], c.clone())
        };
        assert!(top >= 4);
        assert!(!field.is_zero(&lead));
    }

    #[test]
    fn lemma_specialization() {
        // c = 2, d = 0, e = 0: y = z^2, y' = 2z, y'' = 2. The numerator is
        // proportional to z^4 (z^4 + 2496 z^2 + 1658880).
        let poly = lemma_constant_poly();
        let zreg = VarRegistry::new(vec!["z"]);
        let args = [rat_int(2), rat_int(0), rat_int(0)];
        let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
        for (m, coeff) in poly.terms() {
            let num = eval_in_field(coeff.num(), &args, &QField);
            let den = eval_in_field(coeff.den(), &args, &QField);
            assert!(!den.is_zero());
            terms.push((m.clone(), num / den));
        }
        let specialized = MPoly::from_terms(QField, zreg.clone(), MonomialOrder::GrevLex, terms);
        assert!(!specialized.is_zero());
        let z = MPoly::var(QField, zreg.clone(), MonomialOrder::GrevLex, 0);
        let quartic = z
            .pow(4)
            .add(&z.pow(2).scale(&rat_int(2496)))
            .add(&MPoly::constant(QField, zreg, MonomialOrder::GrevLex, rat_int(1658880)));
        let quotient = specialized.exact_div(&quartic).expect("quartic factor divides");
        // The cofactor is a scalar multiple of z^4.
        assert_eq!(quotient.terms().len(), 1);
        assert_eq!(quotient.degree_in(0), 4);
    }
}
