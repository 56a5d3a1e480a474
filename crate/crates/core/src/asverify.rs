//! Checks of the Ax-Schanuel inequalities on explicit witnesses.
//!
//! An [`ASWitness`] packages an ambient function field together with point
//! tuples and the derivations acting on it. The checks recompute everything
//! from the raw data: hypotheses are verified rather than assumed, the
//! transcendence degree is an exact Jacobian rank over the ambient field, and
//! modular independence is certified only up to an explicit level bound that
//! every report carries.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::coordfield::{CoordElem, CoordField, DerTable};
use crate::derivation::DerivationWitness;
use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::linalg::Matrix;
use crate::modular::{ode_eta, ModularProvider};
use crate::mpoly::MPoly;
use crate::rational::{joint_integer_scale, rat_int, Rat};
use crate::ratfunc::FracField;
use crate::report::ReportLine;
use crate::variety::{BaseField, Model, Variety};

/// Point tuples in an ambient differential field, ready for the inequality
/// checks. Tuples are grouped by block: 4-jets `(z, j, j', j'')` in the jet
/// model, pairs `(x, y)` in the exponential model. The base declares which
/// ambient parameters are moved by derivations and which are constants; the
/// constant subfield is always explicit.
#[derive(Debug, Clone)]
pub struct ASWitness {
    ambient: CoordField,
    base: BaseField,
    model: Model,
    tuples: Vec<Vec<CoordElem>>,
    tables: Vec<DerTable>,
}

impl ASWitness {
    /// Validates the raw data: the base must present the ambient parameters,
    /// every tuple must have the arity of the model, declared constants must
    /// be killed by every derivation, and every derivation table must
    /// annihilate the defining relations of the ambient field.
    pub fn new(
        ambient: CoordField,
        base: BaseField,
        model: Model,
        tuples: Vec<Vec<CoordElem>>,
        tables: Vec<DerTable>,
    ) -> Result<Self> {
        if base.field().registry().names() != ambient.base().registry().names() {
            return Err(Error::InvalidWitness(
                "the base does not present the ambient parameters".into(),
            ));
        }
        if model == Model::SmallJ {
            return Err(Error::InvalidWitness(
                "no inequality is attached to the plain j model; use 4-jet tuples".into(),
            ));
        }
        if tuples.is_empty() {
            return Err(Error::InvalidWitness(
                "at least one tuple is required".into(),
            ));
        }
        let arity = model.block_arity();
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != arity {
                return Err(Error::InvalidWitness(format!(
                    "tuple {} has {} coordinates, the {} model expects {}",
                    i + 1,
                    t.len(),
                    model.tag(),
                    arity
                )));
            }
        }
        if tables.is_empty() {
            return Err(Error::InvalidWitness(
                "at least one derivation is required".into(),
            ));
        }
        for (k, table) in tables.iter().enumerate() {
            if table.param_values.len() != base.param_count()
                || table.coord_values.len() != ambient.registry().len()
            {
                return Err(Error::InvalidWitness(format!(
                    "derivation table {} does not match the ambient field shape",
                    k + 1
                )));
            }
            for (l, name) in base.const_params().iter().enumerate() {
                let idx = base.derivation_count() + l;
                if !ambient.is_zero(&table.param_values[idx]) {
                    return Err(Error::InvalidWitness(format!(
                        "derivation {} moves the declared constant {}",
                        k + 1,
                        name
                    )));
                }
            }
            for g in ambient.basis().generators() {
                if !ambient.is_zero(&ambient.d_poly(table, g)) {
                    return Err(Error::InvalidWitness(format!(
                        "derivation {} does not respect the defining relations",
                        k + 1
                    )));
                }
            }
        }
        let tuples = tuples
            .iter()
            .map(|t| t.iter().map(|e| ambient.reduce(e)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(ASWitness {
            ambient,
            base,
            model,
            tuples,
            tables,
        })
    }

    /// Packages an engine witness over its variety: the tuples are the
    /// coordinate blocks of the variety's function field and the derivations
    /// are the witness tables.
    pub fn from_witness(v: &Variety, w: &DerivationWitness) -> Result<Self> {
        let ambient = w.field().clone();
        let tuples = (1..=v.block_count())
            .map(|i| {
                v.block_indices(i)
                    .into_iter()
                    .map(|c| ambient.coordinate(c))
                    .collect()
            })
            .collect();
        let tables = (0..w.derivations()).map(|k| w.table(k)).collect();
        ASWitness::new(ambient, v.base().clone(), v.model(), tuples, tables)
    }

    pub fn ambient(&self) -> &CoordField {
        &self.ambient
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Number of tuples.
    pub fn block_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Vec<CoordElem>] {
        &self.tuples
    }

    pub fn tables(&self) -> &[DerTable] {
        &self.tables
    }

    fn apply(&self, k: usize, e: &CoordElem) -> CoordElem {
        self.ambient.apply_derivation(&self.tables[k], e)
    }

    /// Rank of the matrix whose entry (k, i) is the k-th derivative of the
    /// i-th element.
    fn derivative_rank(&self, elems: &[CoordElem]) -> Result<usize> {
        let mut mat = Matrix::zero(self.ambient.clone(), self.tables.len(), elems.len());
        for k in 0..self.tables.len() {
            for (i, e) in elems.iter().enumerate() {
                mat.set(k, i, self.apply(k, e));
            }
        }
        mat.rank()
    }
}

/// Differential of a polynomial in the ambient field over the declared
/// constants. Columns are the derivation parameters of the base followed by
/// the ambient coordinates; declared constant parameters contribute nothing.
fn poly_differential(ambient: &CoordField, m: usize, p: &MPoly<FracField>) -> Vec<CoordElem> {
    let coords = ambient.registry().len();
    let mut row = Vec::with_capacity(m + coords);
    for l in 0..m {
        row.push(ambient.from_poly(&p.map_coeffs(|c| c.derivative(l))));
    }
    for v in 0..coords {
        row.push(ambient.from_poly(&p.partial(v)));
    }
    row
}

/// Differential of a field element, by the quotient rule applied to a
/// representing fraction. The result is independent of the representative
/// modulo the relation differentials, which the rank computation quotients
/// out.
fn differential(ambient: &CoordField, m: usize, e: &CoordElem) -> Vec<CoordElem> {
    let dn = poly_differential(ambient, m, e.num());
    let dd = poly_differential(ambient, m, e.den());
    let num = ambient.from_poly(e.num());
    let den = ambient.from_poly(e.den());
    let den2 = ambient.mul(&den, &den);
    dn.into_iter()
        .zip(dd)
        .map(|(a, b)| {
            let lead = ambient.sub(&ambient.mul(&a, &den), &ambient.mul(&num, &b));
            ambient
                .div(&lead, &den2)
                .expect("denominator is nonzero in the field")
        })
        .collect()
}

/// Transcendence degree over the declared constants of the subfield the
/// elements generate, by the Jacobian criterion: the rank of the element
/// differentials in the module of differentials of the ambient field. The
/// relation differentials are quotiented out by rank subtraction.
pub fn transcendence_degree(
    elements: &[CoordElem],
    ambient: &CoordField,
    base: &BaseField,
) -> Result<usize> {
    let m = base.derivation_count();
    let cols = m + ambient.registry().len();
    let mut mat = Matrix::zero(ambient.clone(), 0, cols);
    for g in ambient.basis().generators() {
        mat.push_row(poly_differential(ambient, m, g));
    }
    let relation_rank = mat.rank()?;
    for e in elements {
        mat.push_row(differential(ambient, m, e));
    }
    Ok(mat.rank()? - relation_rank)
}

/// One detected modular relation: the pair indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularDependence {
    pub i: usize,
    pub k: usize,
    pub level: u32,
}

/// Outcome of the pairwise modular-independence check. Certification is
/// bounded: `independent` means no relation was found at any level up to
/// `nmax`, nothing more.
#[derive(Debug, Clone)]
pub struct ModularIndependenceReport {
    pub nmax: u32,
    pub dependent: Vec<ModularDependence>,
    pub independent: bool,
}

impl ModularIndependenceReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = vec![ReportLine::kv("nmax", self.nmax)];
        for d in &self.dependent {
            out.push(ReportLine::kv(
                "modular_witness",
                format!("{}:{}:{}", d.level, d.i, d.k),
            ));
        }
        out.push(ReportLine::kv("independent", self.independent));
        out
    }
}

/// Evaluates every modular polynomial of level at most `nmax` on every pair
/// of values and records the vanishing ones. Zero testing is by normal form
/// in the ambient field.
pub fn modular_independence(
    ambient: &CoordField,
    values: &[CoordElem],
    provider: &mut ModularProvider,
    nmax: u32,
) -> Result<ModularIndependenceReport> {
    let mut dependent = Vec::new();
    for i in 0..values.len() {
        for k in i + 1..values.len() {
            for level in 1..=nmax {
                let phi = provider.get(level)?;
                if ambient.is_zero(&phi.eval_in(ambient, &values[i], &values[k])) {
                    dependent.push(ModularDependence {
                        i: i + 1,
                        k: k + 1,
                        level,
                    });
                }
            }
        }
    }
    Ok(ModularIndependenceReport {
        nmax,
        independent: dependent.is_empty(),
        dependent,
    })
}

/// Verdict of an inequality check. `Violation` is reserved for bugs: the
/// underlying statements are theorems, so a violation on a witness with
/// verified hypotheses means the computation itself is wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ASVerdict {
    HypothesesUnmet,
    Holds,
    Violation,
}

impl ASVerdict {
    pub fn label(self) -> &'static str {
        match self {
            ASVerdict::HypothesesUnmet => "hypotheses-unmet",
            ASVerdict::Holds => "inequality-holds",
            ASVerdict::Violation => "VIOLATION",
        }
    }
}

/// Full outcome of an inequality check. Both sides are computed even when
/// hypotheses fail, so the report always shows the margin.
#[derive(Debug, Clone)]
pub struct ASReport {
    pub verdict: ASVerdict,
    pub lhs: usize,
    pub rhs: usize,
    pub derivative_rank: usize,
    pub hypothesis_failures: Vec<String>,
    pub modular: Option<ModularIndependenceReport>,
}

impl ASReport {
    pub fn margin(&self) -> i64 {
        self.lhs as i64 - self.rhs as i64
    }

    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = Vec::new();
        if let Some(m) = &self.modular {
            out.extend(m.lines());
        }
        for f in &self.hypothesis_failures {
            out.push(ReportLine::kv("hypothesis_failure", f.clone()));
        }
        out.push(ReportLine::kv("lhs", self.lhs));
        out.push(ReportLine::kv("rhs", self.rhs));
        out.push(ReportLine::kv("derivative_rank", self.derivative_rank));
        out.push(ReportLine::kv("margin", self.margin()));
        out.push(ReportLine::kv("verdict", self.verdict.label()));
        out
    }

    fn close(
        lhs: usize,
        rhs: usize,
        derivative_rank: usize,
        hypothesis_failures: Vec<String>,
        modular: Option<ModularIndependenceReport>,
    ) -> Self {
        let verdict = if !hypothesis_failures.is_empty() {
            ASVerdict::HypothesesUnmet
        } else if lhs >= rhs {
            ASVerdict::Holds
        } else {
            ASVerdict::Violation
        };
        ASReport {
            verdict,
            lhs,
            rhs,
            derivative_rank,
            hypothesis_failures,
            modular,
        }
    }
}

/// Checks the jet-model inequality on a witness. Hypotheses first: every
/// tuple must satisfy the jet relations away from the singular fibers of the
/// equation, no tuple coordinate may be killed by every derivation, and the
/// second coordinates must be pairwise modularly independent up to `nmax`.
/// Then lhs is the transcendence degree of all tuple coordinates over the
/// declared constants and rhs is three per tuple plus the rank of the
/// derivative matrix of the first coordinates.
pub fn check_ax_schanuel_j(
    w: &ASWitness,
    provider: &mut ModularProvider,
    nmax: u32,
) -> Result<ASReport> {
    if w.model() != Model::J {
        return Err(Error::InvalidWitness(
            "the witness does not carry 4-jet tuples".into(),
        ));
    }
    let field = w.ambient();
    let mut failures = Vec::new();
    for (i, tuple) in w.tuples().iter().enumerate() {
        match ode_eta(field, &tuple[1], &tuple[2], &tuple[3]) {
            Ok(eta) => {
                for k in 0..w.tables().len() {
                    let dz = w.apply(k, &tuple[0]);
                    let rels = [
                        field.sub(&w.apply(k, &tuple[1]), &field.mul(&tuple[2], &dz)),
                        field.sub(&w.apply(k, &tuple[2]), &field.mul(&tuple[3], &dz)),
                        field.sub(&w.apply(k, &tuple[3]), &field.mul(&eta, &dz)),
                    ];
                    if rels.iter().any(|r| !field.is_zero(r)) {
                        failures.push(format!(
                            "tuple {}: the jet relations fail under derivation {}",
                            i + 1,
                            k + 1
                        ));
                    }
                }
            }
            Err(_) => failures.push(format!(
                "tuple {} sits at a singular point of the jet equation",
                i + 1
            )),
        }
        for (c, e) in tuple.iter().enumerate() {
            if (0..w.tables().len()).all(|k| field.is_zero(&w.apply(k, e))) {
                failures.push(format!(
                    "tuple {}: coordinate {} is killed by every derivation",
                    i + 1,
                    c + 1
                ));
            }
        }
    }
    let jvals: Vec<CoordElem> = w.tuples().iter().map(|t| t[1].clone()).collect();
    let modular = modular_independence(field, &jvals, provider, nmax)?;
    for d in &modular.dependent {
        failures.push(format!(
            "second coordinates {} and {} satisfy the level {} modular relation",
            d.i, d.k, d.level
        ));
    }
    let all: Vec<CoordElem> = w.tuples().iter().flatten().cloned().collect();
    let lhs = transcendence_degree(&all, field, w.base())?;
    let first: Vec<CoordElem> = w.tuples().iter().map(|t| t[0].clone()).collect();
    let rank = w.derivative_rank(&first)?;
    Ok(ASReport::close(
        lhs,
        3 * w.block_count() + rank,
        rank,
        failures,
        Some(modular),
    ))
}

/// Checks the exponential inequality on a witness. Hypotheses: each pair
/// must satisfy `D y = y D x` with `y` nonzero, and the first coordinates
/// must be ℚ-linearly independent modulo constants, which is decided exactly
/// by solving for rational tuples whose combination is killed by every
/// derivation. Then lhs is the transcendence degree of all pair coordinates
/// over the declared constants and rhs is one per pair plus the rank of the
/// derivative matrix of the first coordinates.
pub fn check_ax_schanuel_exp(w: &ASWitness) -> Result<ASReport> {
    if w.model() != Model::Exp {
        return Err(Error::InvalidWitness(
            "the witness does not carry exponential pairs".into(),
        ));
    }
    let field = w.ambient();
    let mut failures = Vec::new();
    for (i, tuple) in w.tuples().iter().enumerate() {
        if field.is_zero(&tuple[1]) {
            failures.push(format!("tuple {}: the exponential coordinate is zero", i + 1));
            continue;
        }
        for k in 0..w.tables().len() {
            let rel = field.sub(
                &w.apply(k, &tuple[1]),
                &field.mul(&tuple[1], &w.apply(k, &tuple[0])),
            );
            if !field.is_zero(&rel) {
                failures.push(format!(
                    "tuple {}: the exponential relation fails under derivation {}",
                    i + 1,
                    k + 1
                ));
            }
        }
    }
    let xs: Vec<CoordElem> = w.tuples().iter().map(|t| t[0].clone()).collect();
    let rows: Vec<Vec<CoordElem>> = (0..w.tables().len())
        .map(|k| xs.iter().map(|x| w.apply(k, x)).collect())
        .collect();
    for q in rational_kernel(field, &rows, xs.len())? {
        failures.push(format!(
            "the combination {} is killed by every derivation",
            combination_label(&q)
        ));
    }
    let all: Vec<CoordElem> = w.tuples().iter().flatten().cloned().collect();
    let lhs = transcendence_degree(&all, field, w.base())?;
    let rank = w.derivative_rank(&xs)?;
    Ok(ASReport::close(
        lhs,
        w.block_count() + rank,
        rank,
        failures,
        None,
    ))
}

/// Basis of the space of rational tuples q with Σ qᵢ·rows[k][i] = 0 for
/// every k. Each field entry is flattened to exact ℚ-linear conditions:
/// denominators are cleared multiplicatively at the coordinate level and
/// again at the parameter level inside each coordinate monomial, which is
/// valid because normal forms are ℚ-linear in the input.
fn rational_kernel(
    field: &CoordField,
    rows: &[Vec<CoordElem>],
    n: usize,
) -> Result<Vec<Vec<Rat>>> {
    let qf = QField;
    let mut conditions: Vec<Vec<Rat>> = Vec::new();
    for row in rows {
        debug_assert_eq!(row.len(), n);
        let cleared: Vec<MPoly<FracField>> = (0..n)
            .map(|i| {
                let mut p = row[i].num().clone();
                for l in 0..n {
                    if l != i {
                        p = p.mul(row[l].den());
                    }
                }
                field.nf_poly(&p)
            })
            .collect();
        let mut by_mono: BTreeMap<Vec<u32>, Vec<(usize, crate::ratfunc::RatFunc<QField>)>> =
            BTreeMap::new();
        for (i, u) in cleared.iter().enumerate() {
            for (mono, c) in u.terms() {
                by_mono.entry(mono.clone()).or_default().push((i, c.clone()));
            }
        }
        for entries in by_mono.values() {
            let mut eq_rows: BTreeMap<Vec<u32>, Vec<Rat>> = BTreeMap::new();
            for (i, c) in entries {
                let mut p = c.num().clone();
                for (l, other) in entries {
                    if l != i {
                        p = p.mul(other.den());
                    }
                }
                for (pmono, coeff) in p.terms() {
                    let slot = eq_rows
                        .entry(pmono.clone())
                        .or_insert_with(|| vec![rat_int(0); n]);
                    slot[*i] = slot[*i].clone() + coeff.clone();
                }
            }
            conditions.extend(eq_rows.into_values());
        }
    }
    let mut mat = Matrix::zero(qf, 0, n);
    for c in conditions {
        mat.push_row(c);
    }
    let zeros = vec![rat_int(0); mat.rows()];
    let sol = mat.solve_affine(&zeros)?;
    Ok(sol.kernel)
}

/// Renders a rational tuple as an integer combination of the first
/// coordinates, primitive and with positive leading coefficient.
fn combination_label(q: &[Rat]) -> String {
    let refs: Vec<&Rat> = q.iter().collect();
    let scale = joint_integer_scale(&refs);
    let mut ints: Vec<Rat> = q.iter().map(|c| c * &scale).collect();
    if let Some(first) = ints.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            ints = ints.iter().map(|c| -c).collect();
        }
    }
    let mut out = String::new();
    for (i, c) in ints.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        let abs = c.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if !abs.is_one() {
            out.push_str(&format!("{}*", abs));
        }
        out.push_str(&format!("x{}", i + 1));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::extend_derivation;
    use crate::vars::MonomialOrder;

    fn base_t() -> BaseField {
        BaseField::with_diff_params(vec!["t".into()])
    }

    fn full(model: Model, n: usize, base: BaseField) -> Variety {
        Variety::new(model, n, base, true, Vec::new()).unwrap()
    }

    fn coord(v: &Variety, idx: usize) -> MPoly<FracField> {
        MPoly::var(
            v.base().field().clone(),
            v.registry().clone(),
            MonomialOrder::GrevLex,
            idx,
        )
    }

    fn field_of(v: &Variety) -> CoordField {
        CoordField::from_basis(
            v.base().field().clone(),
            v.registry().clone(),
            v.basis().clone(),
        )
    }

    fn param(field: &CoordField, name: &str) -> CoordElem {
        let base = field.base();
        let idx = base.registry().index_of(name).unwrap();
        field.from_poly(&MPoly::constant(
            base.clone(),
            field.registry().clone(),
            MonomialOrder::GrevLex,
            base.var(idx),
        ))
    }

    #[test]
    fn transcendence_degree_of_independent_parameters() {
        let base = BaseField::with_diff_params(vec!["t1".into(), "t2".into()]);
        let ambient = CoordField::rational(base.field().clone());
        let t1 = param(&ambient, "t1");
        let t2 = param(&ambient, "t2");
        assert_eq!(
            transcendence_degree(&[t1.clone(), t2], &ambient, &base).unwrap(),
            2
        );
        assert_eq!(transcendence_degree(&[t1], &ambient, &base).unwrap(), 1);
        assert_eq!(transcendence_degree(&[], &ambient, &base).unwrap(), 0);
    }

    #[test]
    fn transcendence_degree_sees_algebraic_relations() {
        let base = base_t();
        let ambient = CoordField::rational(base.field().clone());
        let t = param(&ambient, "t");
        let t2 = ambient.mul(&t, &t);
        assert_eq!(transcendence_degree(&[t, t2], &ambient, &base).unwrap(), 1);
    }

    #[test]
    fn transcendence_degree_of_generic_coordinates() {
        let v = full(Model::J, 1, base_t());
        let ambient = field_of(&v);
        let coords: Vec<CoordElem> = (0..4).map(|c| ambient.coordinate(c)).collect();
        assert_eq!(
            transcendence_degree(&coords, &ambient, v.base()).unwrap(),
            4
        );
        // Monotone under adding elements, bounded by the ambient degree.
        for k in 0..=4 {
            let d = transcendence_degree(&coords[..k], &ambient, v.base()).unwrap();
            assert_eq!(d, k);
        }
    }

    #[test]
    fn transcendence_degree_respects_the_ideal() {
        // j2 is algebraic over j1 once the level 2 relation holds.
        let mut provider = ModularProvider::new(24);
        let v = full(Model::SmallJ, 2, BaseField::rationals());
        let j1 = coord(&v, 0);
        let j2 = coord(&v, 1);
        let phi = provider.get(2).unwrap().eval_poly(&j1, &j2);
        let v = Variety::new(Model::SmallJ, 2, BaseField::rationals(), true, vec![phi]).unwrap();
        let ambient = field_of(&v);
        let vals: Vec<CoordElem> = (0..2).map(|c| ambient.coordinate(c)).collect();
        assert_eq!(transcendence_degree(&vals, &ambient, v.base()).unwrap(), 1);
    }

    #[test]
    fn modular_independence_flags_equal_values() {
        let v = full(Model::J, 2, base_t());
        let ambient = field_of(&v);
        let j = ambient.coordinate(1);
        let mut provider = ModularProvider::new(8);
        let report =
            modular_independence(&ambient, &[j.clone(), j], &mut provider, 2).unwrap();
        assert!(!report.independent);
        assert_eq!(
            report.dependent,
            vec![ModularDependence { i: 1, k: 2, level: 1 }]
        );
        let rendered: Vec<String> = report.lines().iter().map(|l| l.render()).collect();
        assert!(rendered.contains(&"modular_witness=1:1:2".to_string()));
        assert!(rendered.contains(&"independent=false".to_string()));
    }

    #[test]
    fn modular_independence_accepts_generic_values() {
        let v = full(Model::J, 2, base_t());
        let ambient = field_of(&v);
        let j1 = ambient.coordinate(1);
        let j2 = ambient.coordinate(5);
        let mut provider = ModularProvider::new(8);
        let report = modular_independence(&ambient, &[j1, j2], &mut provider, 2).unwrap();
        assert!(report.independent);
        assert_eq!(report.nmax, 2);
    }

    #[test]
    fn modular_independence_detects_the_level_two_relation() {
        let mut provider = ModularProvider::new(24);
        let probe = full(Model::SmallJ, 2, BaseField::rationals());
        let phi = provider
            .get(2)
            .unwrap()
            .eval_poly(&coord(&probe, 0), &coord(&probe, 1));
        let v = Variety::new(Model::SmallJ, 2, BaseField::rationals(), true, vec![phi]).unwrap();
        let ambient = field_of(&v);
        let vals: Vec<CoordElem> = (0..2).map(|c| ambient.coordinate(c)).collect();
        let report = modular_independence(&ambient, &vals, &mut provider, 2).unwrap();
        assert_eq!(
            report.dependent,
            vec![ModularDependence { i: 1, k: 2, level: 2 }]
        );
    }

    #[test]
    fn canonical_jet_witness_achieves_equality() {
        let v = full(Model::J, 1, base_t());
        let w = extend_derivation(&v).unwrap();
        let asw = ASWitness::from_witness(&v, &w).unwrap();
        let mut provider = ModularProvider::new(8);
        let report = check_ax_schanuel_j(&asw, &mut provider, 2).unwrap();
        assert_eq!(report.verdict, ASVerdict::Holds);
        assert_eq!(report.lhs, 4);
        assert_eq!(report.rhs, 4);
        assert_eq!(report.derivative_rank, 1);
        assert_eq!(report.margin(), 0);
        let rendered: Vec<String> = report.lines().iter().map(|l| l.render()).collect();
        assert!(rendered.contains(&"verdict=inequality-holds".to_string()));
        assert!(rendered.contains(&"margin=0".to_string()));
    }

    #[test]
    fn all_constant_witness_fails_the_hypotheses() {
        let v = full(Model::J, 1, base_t());
        let ambient = field_of(&v);
        // The zero table kills everything, so the tuple is constant; the jet
        // relations hold trivially and only nonconstancy fails.
        let rat_elem = |n| ambient.from_base(&v.base().field().from_rat(&rat_int(n)));
        let constant_tuple = vec![rat_elem(2), rat_elem(5), rat_elem(1), rat_elem(1)];
        let table = DerTable::zero(&ambient);
        let asw = ASWitness::new(
            ambient.clone(),
            v.base().clone(),
            Model::J,
            vec![constant_tuple],
            vec![table],
        )
        .unwrap();
        let mut provider = ModularProvider::new(8);
        let report = check_ax_schanuel_j(&asw, &mut provider, 2).unwrap();
        assert_eq!(report.verdict, ASVerdict::HypothesesUnmet);
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("killed by every derivation")));
        assert_eq!(report.lhs, 0);
    }

    #[test]
    fn moving_two_blocks_holds_strictly() {
        let v = full(Model::J, 2, base_t());
        let ambient = field_of(&v);
        // One derivation moving both jets: dz_i = 1, jets follow the model.
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        for i in 0..2 {
            let j = ambient.coordinate(4 * i + 1);
            let jp = ambient.coordinate(4 * i + 2);
            let jpp = ambient.coordinate(4 * i + 3);
            let eta = ode_eta(&ambient, &j, &jp, &jpp).unwrap();
            table.coord_values[4 * i] = ambient.one();
            table.coord_values[4 * i + 1] = jp;
            table.coord_values[4 * i + 2] = jpp;
            table.coord_values[4 * i + 3] = eta;
        }
        let tuples: Vec<Vec<CoordElem>> = (1..=2)
            .map(|b| {
                v.block_indices(b)
                    .into_iter()
                    .map(|c| ambient.coordinate(c))
                    .collect()
            })
            .collect();
        let asw = ASWitness::new(ambient, v.base().clone(), Model::J, tuples, vec![table]).unwrap();
        let mut provider = ModularProvider::new(8);
        let report = check_ax_schanuel_j(&asw, &mut provider, 2).unwrap();
        assert_eq!(report.verdict, ASVerdict::Holds);
        assert_eq!(report.lhs, 8);
        assert_eq!(report.rhs, 7);
        assert_eq!(report.margin(), 1);
    }

    #[test]
    fn engine_witness_on_the_full_eight_space_keeps_the_inequality() {
        // The canonical engine witness leaves the second block constant, so
        // the hypotheses fail, but both sides are still reported and the
        // inequality itself is intact.
        let v = full(Model::J, 2, base_t());
        let w = extend_derivation(&v).unwrap();
        let asw = ASWitness::from_witness(&v, &w).unwrap();
        let mut provider = ModularProvider::new(8);
        let report = check_ax_schanuel_j(&asw, &mut provider, 2).unwrap();
        assert_eq!(report.verdict, ASVerdict::HypothesesUnmet);
        assert_eq!(report.lhs, 8);
        assert_eq!(report.rhs, 7);
        assert!(report.margin() >= 0);
    }

    #[test]
    fn exponential_witness_over_two_parameters() {
        // De = e over Q(t, e): the pair (t, e) satisfies the model with
        // lhs = rhs = 2.
        let base = BaseField::with_diff_params(vec!["t".into(), "e".into()]);
        let ambient = CoordField::rational(base.field().clone());
        let t = param(&ambient, "t");
        let e = param(&ambient, "e");
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        table.param_values[1] = e.clone();
        let asw = ASWitness::new(
            ambient,
            base,
            Model::Exp,
            vec![vec![t, e]],
            vec![table],
        )
        .unwrap();
        let report = check_ax_schanuel_exp(&asw).unwrap();
        assert_eq!(report.verdict, ASVerdict::Holds);
        assert_eq!(report.lhs, 2);
        assert_eq!(report.rhs, 2);
        assert_eq!(report.derivative_rank, 1);
    }

    #[test]
    fn constant_first_coordinate_fails_the_hypotheses() {
        let base = base_t();
        let ambient = CoordField::rational(base.field().clone());
        let five = ambient.from_base(&base.field().from_rat(&rat_int(5)));
        let seven = ambient.from_base(&base.field().from_rat(&rat_int(7)));
        let table = DerTable::zero(&ambient);
        let asw = ASWitness::new(
            ambient,
            base,
            Model::Exp,
            vec![vec![five, seven]],
            vec![table],
        )
        .unwrap();
        let report = check_ax_schanuel_exp(&asw).unwrap();
        assert_eq!(report.verdict, ASVerdict::HypothesesUnmet);
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("x1") && f.contains("killed by every derivation")));
    }

    #[test]
    fn rational_dependence_between_first_coordinates_is_detected() {
        let v = full(Model::Exp, 1, base_t());
        let ambient = field_of(&v);
        let x = ambient.coordinate(0);
        let y = ambient.coordinate(1);
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        table.coord_values[0] = ambient.one();
        table.coord_values[1] = y.clone();
        let two_x = ambient.add(&x, &x);
        let y2 = ambient.mul(&y, &y);
        let asw = ASWitness::new(
            ambient,
            v.base().clone(),
            Model::Exp,
            vec![vec![x, y], vec![two_x, y2]],
            vec![table],
        )
        .unwrap();
        let report = check_ax_schanuel_exp(&asw).unwrap();
        assert_eq!(report.verdict, ASVerdict::HypothesesUnmet);
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("2*x1 - x2")));
    }

    #[test]
    fn zero_exponential_coordinate_is_rejected() {
        let base = base_t();
        let ambient = CoordField::rational(base.field().clone());
        let t = param(&ambient, "t");
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        let asw = ASWitness::new(
            ambient.clone(),
            base,
            Model::Exp,
            vec![vec![t, ambient.zero()]],
            vec![table],
        )
        .unwrap();
        let report = check_ax_schanuel_exp(&asw).unwrap();
        assert_eq!(report.verdict, ASVerdict::HypothesesUnmet);
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("exponential coordinate is zero")));
    }

    #[test]
    fn witness_validation_rejects_bad_shapes() {
        let v = full(Model::J, 1, base_t());
        let ambient = field_of(&v);
        let table = DerTable::zero(&ambient);
        let short_tuple = vec![ambient.coordinate(0)];
        let err = ASWitness::new(
            ambient.clone(),
            v.base().clone(),
            Model::J,
            vec![short_tuple],
            vec![table.clone()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidWitness(_)));
        let err = ASWitness::new(
            ambient.clone(),
            v.base().clone(),
            Model::SmallJ,
            vec![vec![ambient.coordinate(0)]],
            vec![table.clone()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidWitness(_)));
        let err = ASWitness::new(
            ambient.clone(),
            v.base().clone(),
            Model::J,
            vec![(0..4).map(|c| ambient.coordinate(c)).collect()],
            Vec::new(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidWitness(_)));
    }

    #[test]
    fn witness_validation_requires_tables_to_respect_relations() {
        // On {z1 - t} a derivation with dz1 != lambda breaks the relation.
        let probe = full(Model::J, 1, base_t());
        let z = coord(&probe, 0);
        let t = {
            let base = probe.base().field();
            let idx = base.registry().index_of("t").unwrap();
            MPoly::constant(
                base.clone(),
                probe.registry().clone(),
                MonomialOrder::GrevLex,
                base.var(idx),
            )
        };
        let v = Variety::new(Model::J, 1, base_t(), true, vec![z.sub(&t)]).unwrap();
        let ambient = field_of(&v);
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        // dz1 stays zero: d(z1 - t) = -1 != 0.
        let err = ASWitness::new(
            ambient.clone(),
            v.base().clone(),
            Model::J,
            vec![(0..4).map(|c| ambient.coordinate(c)).collect()],
            vec![table],
        )
        .unwrap_err();
        match err {
            Error::InvalidWitness(msg) => {
                assert!(msg.contains("defining relations"), "{}", msg)
            }
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn declared_constants_must_be_killed() {
        let base = BaseField::new(vec!["t".into()], vec!["c".into()]);
        let ambient = CoordField::rational(base.field().clone());
        let mut table = DerTable::zero(&ambient);
        table.param_values[0] = ambient.one();
        table.param_values[1] = ambient.one();
        let t = param(&ambient, "t");
        let err = ASWitness::new(
            ambient.clone(),
            base,
            Model::Exp,
            vec![vec![t.clone(), t]],
            vec![table],
        )
        .unwrap_err();
        match err {
            Error::InvalidWitness(msg) => assert!(msg.contains("constant c"), "{}", msg),
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn combination_labels_are_primitive_and_lead_positive() {
        assert_eq!(
            combination_label(&[rat_int(-2), rat_int(1)]),
            "2*x1 - x2"
        );
        assert_eq!(
            combination_label(&[Rat::new(1.into(), 2.into()), rat_int(0), rat_int(-1)]),
            "x1 - 2*x3"
        );
        assert_eq!(combination_label(&[rat_int(0)]), "0");
    }
}
