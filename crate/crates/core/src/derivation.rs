//! Derivation extension on differential varieties.
//!
//! A derivation on the function field of a variety is pinned down by its
//! values on the coordinates together with a scaling lambda_l for each base
//! derivation. These values are constrained linearly: every ideal generator
//! g forces its prolongation sum_v (dg/dv) delta(v) + sum_l lambda_l g^{D_l}
//! to vanish, and every coordinate block must follow the differential model
//! (the jet relations for J, the exponential relation for exp). The engine
//! assembles that system over the function field, solves it with the lambda
//! values pinned, and certifies the result against the variety.

use std::fmt;

use crate::convert::extend_coeffs;
use crate::coordfield::{CoordElem, CoordField, DerTable};
use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::linalg::{AffineSolution, Matrix};
use crate::modular::{ode_eta, ModularProvider};
use crate::mpoly::MPoly;
use crate::rational::rat_int;
use crate::ratfunc::FracField;
use crate::report::ReportLine;
use crate::variety::{Model, Variety};

/// The function field of the variety. The presentation reduces modulo the
/// generated ideal, which is a field exactly when that ideal is prime, so
/// the caller's prime declaration is required.
pub fn coordinate_field(v: &Variety) -> Result<CoordField> {
    if !v.assume_prime() {
        return Err(Error::NotPrimeAssumed(format!(
            "{} model variety with {} blocks",
            v.model().tag(),
            v.block_count()
        )));
    }
    Ok(CoordField::from_basis(
        v.base().field().clone(),
        v.registry().clone(),
        v.basis().clone(),
    ))
}

/// Origin of one constraint row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowTag {
    /// Prolongation of the generator at this index.
    Generator(usize),
    /// Model relation for one coordinate block.
    ModelRelation { block: usize, relation: String },
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::Generator(i) => write!(f, "generator {} prolongation", i + 1),
            RowTag::ModelRelation { block, relation } => {
                write!(f, "block {block} model relation {relation}")
            }
        }
    }
}

/// The assembled linear system. Columns are the coordinate unknowns
/// delta(v) in registry order followed by one lambda per base derivation;
/// every row reads as a homogeneous constraint.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    field: CoordField,
    matrix: Matrix<CoordField>,
    tags: Vec<RowTag>,
    generator_rows: usize,
    coord_count: usize,
    base_derivations: usize,
    block_arity: usize,
}

/// Build the constraint system of a variety. Requires the prime
/// declaration, a model carrying derivation structure, and (for J) a clean
/// singular locus, since the third jet relation divides by jp and by the
/// exceptional values of j.
pub fn assemble_constraints(v: &Variety) -> Result<ConstraintSystem> {
    if v.model() == Model::SmallJ {
        return Err(Error::InvalidVariety(
            "the j model carries no derivation structure; work in the J model".into(),
        ));
    }
    let field = coordinate_field(v)?;
    if v.model() == Model::J {
        let singular = v.singular_locus_check()?;
        if !singular.clean {
            return Err(Error::SingularLocus(format!(
                "{} vanishes on the variety",
                singular.hits.join(", ")
            )));
        }
    }
    let coord_count = v.registry().len();
    let m = v.base().derivation_count();
    let model_rows = v.block_count() * (v.model().block_arity() - 1);
    let rows = v.generators().len() + model_rows;
    let mut matrix = Matrix::zero(field.clone(), rows, coord_count + m);
    let mut tags = Vec::with_capacity(rows);
    let mut r = 0;
    for (gi, g) in v.generators().iter().enumerate() {
        for vi in g.support() {
            let pd = g.partial(vi);
            if !pd.is_zero() {
                matrix.set(r, vi, field.from_poly(&pd));
            }
        }
        for l in 0..m {
            let dg = g.map_coeffs(|c| c.derivative(l));
            if !dg.is_zero() {
                matrix.set(r, coord_count + l, field.from_poly(&dg));
            }
        }
        tags.push(RowTag::Generator(gi));
        r += 1;
    }
    let names = v.registry().names();
    for i in 1..=v.block_count() {
        match v.model() {
            Model::J => {
                let c: Vec<usize> = (0..4).map(|o| v.coord_index(i, o)).collect();
                let j = field.coordinate(c[1]);
                let jp = field.coordinate(c[2]);
                let jpp = field.coordinate(c[3]);
                let eta = ode_eta(&field, &j, &jp, &jpp).map_err(|e| match e {
                    Error::Pole(msg) => Error::SingularLocus(msg),
                    other => other,
                })?;
                let coeffs = [jp, jpp, eta];
                let rel = [
                    format!(
                        "delta {} - {} * delta {}",
                        names[c[1]], names[c[2]], names[c[0]]
                    ),
                    format!(
                        "delta {} - {} * delta {}",
                        names[c[2]], names[c[3]], names[c[0]]
                    ),
                    format!(
                        "delta {} - eta({}, {}, {}) * delta {}",
                        names[c[3]], names[c[1]], names[c[2]], names[c[3]], names[c[0]]
                    ),
                ];
                for (o, coeff) in coeffs.iter().enumerate() {
                    matrix.set(r, c[o + 1], field.one());
                    matrix.set(r, c[0], field.neg(coeff));
                    tags.push(RowTag::ModelRelation { block: i, relation: rel[o].clone() });
                    r += 1;
                }
            }
            Model::Exp => {
                let cx = v.coord_index(i, 0);
                let cy = v.coord_index(i, 1);
                let y = field.coordinate(cy);
                matrix.set(r, cy, field.one());
                matrix.set(r, cx, field.neg(&y));
                tags.push(RowTag::ModelRelation {
                    block: i,
                    relation: format!(
                        "delta {} - {} * delta {}",
                        names[cy], names[cy], names[cx]
                    ),
                });
                r += 1;
            }
            Model::SmallJ => unreachable!("rejected above"),
        }
    }
    Ok(ConstraintSystem {
        field,
        matrix,
        tags,
        generator_rows: v.generators().len(),
        coord_count,
        base_derivations: m,
        block_arity: v.model().block_arity(),
    })
}

impl ConstraintSystem {
    pub fn field(&self) -> &CoordField {
        &self.field
    }

    pub fn matrix(&self) -> &Matrix<CoordField> {
        &self.matrix
    }

    pub fn tags(&self) -> &[RowTag] {
        &self.tags
    }

    pub fn rows(&self) -> usize {
        self.tags.len()
    }

    pub fn coordinate_unknowns(&self) -> usize {
        self.coord_count
    }

    pub fn base_derivations(&self) -> usize {
        self.base_derivations
    }

    /// Names of the unknowns in column order.
    pub fn unknown_names(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .field
            .registry()
            .names()
            .iter()
            .map(|n| format!("delta {n}"))
            .collect();
        for l in 1..=self.base_derivations {
            out.push(format!("lambda {l}"));
        }
        out
    }

    /// Rank of the model rows modulo the generator rows, computed as the
    /// rank of the full system minus the rank of the generator rows alone.
    pub fn lambda_rank(&self) -> Result<usize> {
        let full = self.matrix.rank()?;
        let mut gens = Matrix::zero(self.field.clone(), self.generator_rows, self.matrix.cols());
        for r in 0..self.generator_rows {
            for c in 0..self.matrix.cols() {
                gens.set(r, c, self.matrix.at(r, c).clone());
            }
        }
        Ok(full - gens.rank()?)
    }

    /// Dimension of the solution space in the coordinate unknowns alone,
    /// every lambda pinned to zero: the derivations of the function field
    /// over the full base.
    pub fn solution_space_dimension(&self) -> Result<i64> {
        let a = self.coordinate_matrix();
        Ok(self.coord_count as i64 - a.rank()? as i64)
    }

    fn coordinate_matrix(&self) -> Matrix<CoordField> {
        let mut a = Matrix::zero(self.field.clone(), self.rows(), self.coord_count);
        for r in 0..self.rows() {
            for c in 0..self.coord_count {
                a.set(r, c, self.matrix.at(r, c).clone());
            }
        }
        a
    }

    /// Elimination order for the coordinate unknowns: jet coordinates first
    /// in registry order, then the block-leading coordinates in decreasing
    /// block order. The leading deltas are eliminated last, so they stay
    /// free whenever the system allows, and delta of the first coordinate is
    /// the most preferred free parameter.
    fn column_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.coord_count)
            .filter(|c| c % self.block_arity != 0)
            .collect();
        order.extend((0..self.coord_count).filter(|c| c % self.block_arity == 0).rev());
        order
    }

    fn solve_pinned(&self, unit: Option<usize>) -> Result<AffineSolution<CoordField>> {
        let order = self.column_order();
        let mut a = Matrix::zero(self.field.clone(), self.rows(), self.coord_count);
        for r in 0..self.rows() {
            for (pos, &c) in order.iter().enumerate() {
                a.set(r, pos, self.matrix.at(r, c).clone());
            }
        }
        let b = match unit {
            Some(k) => (0..self.rows())
                .map(|r| self.field.neg(self.matrix.at(r, self.coord_count + k)))
                .collect(),
            None => vec![self.field.zero(); self.rows()],
        };
        let permuted = a.solve_affine(&b)?;
        let unpermute = |v: &[CoordElem]| {
            let mut out = vec![self.field.zero(); self.coord_count];
            for (pos, &c) in order.iter().enumerate() {
                out[c] = v[pos].clone();
            }
            out
        };
        Ok(AffineSolution {
            particular: unpermute(&permuted.particular),
            kernel: permuted.kernel.iter().map(|k| unpermute(k)).collect(),
            free_cols: permuted.free_cols.iter().map(|&p| order[p]).collect(),
        })
    }
}

/// Convenience wrapper assembling the system first.
pub fn lambda_rank(v: &Variety) -> Result<usize> {
    assemble_constraints(v)?.lambda_rank()
}

/// A concrete derivation (or family of derivations) on the function field:
/// one value per coordinate for each derivation, plus the scaling of the
/// base derivation each one extends.
#[derive(Debug, Clone)]
pub struct DerivationWitness {
    field: CoordField,
    deltas: Vec<Vec<CoordElem>>,
    lambdas: Vec<CoordElem>,
    all_nonconstant: bool,
    verified: bool,
}

impl DerivationWitness {
    /// `deltas[k]` holds the coordinate values of the k-th derivation and
    /// `lambdas[k]` its scaling of the k-th base derivation. A constant base
    /// carries no lambdas and exactly one derivation.
    pub fn new(
        field: CoordField,
        deltas: Vec<Vec<CoordElem>>,
        lambdas: Vec<CoordElem>,
        all_nonconstant: bool,
        verified: bool,
    ) -> Self {
        assert!(!deltas.is_empty(), "a witness carries at least one derivation");
        assert_eq!(
            deltas.len(),
            lambdas.len().max(1),
            "one derivation per base derivation"
        );
        for d in &deltas {
            assert_eq!(d.len(), field.registry().len(), "one value per coordinate");
        }
        DerivationWitness { field, deltas, lambdas, all_nonconstant, verified }
    }

    pub fn field(&self) -> &CoordField {
        &self.field
    }

    pub fn derivations(&self) -> usize {
        self.deltas.len()
    }

    pub fn delta(&self, k: usize) -> &[CoordElem] {
        &self.deltas[k]
    }

    pub fn value(&self, k: usize, coord: usize) -> &CoordElem {
        &self.deltas[k][coord]
    }

    pub fn lambdas(&self) -> &[CoordElem] {
        &self.lambdas
    }

    pub fn all_nonconstant(&self) -> bool {
        self.all_nonconstant
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    pub(crate) fn set_flags(&mut self, all_nonconstant: bool, verified: bool) {
        self.all_nonconstant = all_nonconstant;
        self.verified = verified;
    }

    /// Derivation table of the k-th derivation: lambda_k on the k-th base
    /// parameter, zero on every other parameter, the stored values on the
    /// coordinates.
    pub fn table(&self, k: usize) -> DerTable {
        let mut t = DerTable::zero(&self.field);
        if k < self.lambdas.len() {
            t.param_values[k] = self.lambdas[k].clone();
        }
        t.coord_values = self.deltas[k].clone();
        t
    }
}

fn canonical_solution(
    field: &CoordField,
    sol: &AffineSolution<CoordField>,
    first_free_unit: bool,
) -> Vec<CoordElem> {
    let mut out = sol.particular.clone();
    if first_free_unit {
        if let Some(pos) = sol.free_cols.iter().position(|&c| c == 0) {
            for (o, k) in out.iter_mut().zip(&sol.kernel[pos]) {
                *o = field.add(o, k);
            }
        }
    }
    out
}

fn finish_witness(
    v: &Variety,
    field: CoordField,
    deltas: Vec<Vec<CoordElem>>,
    lambdas: Vec<CoordElem>,
) -> Result<DerivationWitness> {
    let mut w = DerivationWitness::new(field, deltas, lambdas, false, false);
    let report = verify_witness(v, &w);
    assert!(
        report.verified,
        "constructed witness failed its own verification: {:?}",
        report.failures
    );
    w.set_flags(report.all_nonconstant, true);
    Ok(w)
}

/// Extend the base derivation (or the trivial derivation of a constant
/// base) to the function field. The canonical solution zeroes every free
/// parameter except the first coordinate, which becomes 1 when the system
/// leaves it free.
pub fn extend_derivation(v: &Variety) -> Result<DerivationWitness> {
    let m = v.base().derivation_count();
    if m > 1 {
        return Err(Error::InvalidVariety(
            "the base field carries more than one derivation; use extend_derivations_multi"
                .into(),
        ));
    }
    let sys = assemble_constraints(v)?;
    let sol = sys.solve_pinned(if m == 1 { Some(0) } else { None })?;
    let delta = canonical_solution(sys.field(), &sol, true);
    let lambdas = if m == 1 { vec![sys.field().one()] } else { Vec::new() };
    finish_witness(v, sys.field().clone(), vec![delta], lambdas)
}

/// Outcome of the nonconstant extension: the witness, the hypothesis
/// warnings, and the constant used to combine the kernel basis.
#[derive(Debug)]
pub struct NonconstantOutcome {
    pub witness: DerivationWitness,
    pub warnings: Vec<String>,
    pub combination_constant: u64,
}

/// Over a constant base, produce a derivation with every coordinate value
/// nonzero, or name a coordinate no extension can move. The solution space
/// is probed through the functionals delta -> delta(v): one vanishing
/// identically pins the coordinate constant under every derivation, a
/// structural fact reported as `ConstantForced`.
pub fn extend_derivation_nonconstant(
    v: &Variety,
    provider: &mut ModularProvider,
    nmax: u32,
) -> Result<NonconstantOutcome> {
    if !v.base().is_constants_only() {
        return Err(Error::InvalidVariety(
            "nonconstant extension is defined over a constant base field".into(),
        ));
    }
    let sys = assemble_constraints(v)?;
    let mut warnings = Vec::new();
    if v.model() == Model::J {
        let broad = v.check_broadness()?;
        if broad.strongly_broad != Some(true) {
            warnings.push(
                "the variety is not strongly J-broad; a nonconstant extension is not guaranteed"
                    .into(),
            );
        }
        let free = v.check_freeness(provider, nmax)?;
        if !free.free {
            warnings.push(format!(
                "the variety is not J-free up to level {nmax}; a nonconstant extension is not guaranteed"
            ));
        }
    }
    let sol = sys.solve_pinned(None)?;
    let field = sys.field().clone();
    for coord in 0..sys.coordinate_unknowns() {
        if sol.kernel.iter().all(|k| field.is_zero(&k[coord])) {
            return Err(Error::ConstantForced(v.registry().names()[coord].clone()));
        }
    }
    // delta(v) under the combination sum_i c^i delta_i is a nonzero
    // polynomial in c of degree below the kernel dimension, so some c up to
    // coords * (dim - 1) + 1 avoids every root.
    let dim = sol.kernel.len();
    let limit = sys.coordinate_unknowns() as u64 * dim.saturating_sub(1) as u64 + 1;
    let mut chosen = None;
    for c in 1..=limit {
        let cval = field.from_rat(&rat_int(c as i64));
        let mut delta = vec![field.zero(); sys.coordinate_unknowns()];
        let mut power = field.one();
        for kvec in &sol.kernel {
            for (d, entry) in delta.iter_mut().zip(kvec) {
                *d = field.add(d, &field.mul(&power, entry));
            }
            power = field.mul(&power, &cval);
        }
        if delta.iter().all(|d| !field.is_zero(d)) {
            chosen = Some((c, delta));
            break;
        }
    }
    let (c, delta) = chosen.expect("a combination constant below the root bound exists");
    let witness = finish_witness(v, field, vec![delta], Vec::new())?;
    Ok(NonconstantOutcome { witness, warnings, combination_constant: c })
}

/// One commutator value [delta_a, delta_b] evaluated on a coordinate.
#[derive(Debug, Clone)]
pub struct CommutatorResidue {
    pub a: usize,
    pub b: usize,
    pub coordinate: String,
    pub value: CoordElem,
}

/// Result of the multi-derivation extension. The commutator residues are
/// informational: they are reported, never asserted.
#[derive(Debug)]
pub struct MultiOutcome {
    pub witness: DerivationWitness,
    pub commutators: Vec<CommutatorResidue>,
}

impl MultiOutcome {
    pub fn commutator_lines(&self) -> Vec<ReportLine> {
        let field = self.witness.field();
        self.commutators
            .iter()
            .map(|r| {
                ReportLine::kv(
                    format!("commutator_{}_{}_{}", r.a, r.b, r.coordinate),
                    field.fmt_elem(&r.value),
                )
            })
            .collect()
    }
}

/// Extend every base derivation at once: the k-th solve pins the lambda
/// vector to the k-th unit vector. Only the first derivation receives the
/// canonical free-coordinate unit; the later ones zero every free
/// parameter.
pub fn extend_derivations_multi(v: &Variety) -> Result<MultiOutcome> {
    let m = v.base().derivation_count();
    if m < 2 {
        return Err(Error::InvalidVariety(
            "the base field carries fewer than two derivations; use extend_derivation".into(),
        ));
    }
    let sys = assemble_constraints(v)?;
    let field = sys.field().clone();
    let mut deltas = Vec::with_capacity(m);
    for k in 0..m {
        let sol = sys.solve_pinned(Some(k))?;
        deltas.push(canonical_solution(&field, &sol, k == 0));
    }
    let lambdas = vec![field.one(); m];
    let witness = finish_witness(v, field.clone(), deltas, lambdas)?;
    let names = v.registry().names();
    let mut commutators = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let ta = witness.table(a);
            let tb = witness.table(b);
            for coord in 0..v.registry().len() {
                let dab = field.apply_derivation(&ta, witness.value(b, coord));
                let dba = field.apply_derivation(&tb, witness.value(a, coord));
                commutators.push(CommutatorResidue {
                    a: a + 1,
                    b: b + 1,
                    coordinate: names[coord].clone(),
                    value: field.sub(&dab, &dba),
                });
            }
        }
    }
    Ok(MultiOutcome { witness, commutators })
}

/// Result of checking a witness against a variety. Verification never
/// fails structurally: every problem becomes a listed failure.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub verified: bool,
    pub all_nonconstant: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl WitnessReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = Vec::new();
        for n in &self.notes {
            out.push(ReportLine::prose(n.clone()));
        }
        for f in &self.failures {
            out.push(ReportLine::kv("failing_relation", f.clone()));
        }
        out.push(ReportLine::kv("all_nonconstant", self.all_nonconstant));
        out.push(ReportLine::kv("verified", self.verified));
        out
    }

    fn structural(msg: String) -> Self {
        WitnessReport {
            verified: false,
            all_nonconstant: false,
            failures: vec![msg],
            notes: Vec::new(),
        }
    }
}

/// Check a witness against the variety: every generator prolongation and
/// every model relation must vanish under every derivation it carries. A J
/// block at a singular point is accepted exactly when the derivation
/// vanishes on the whole block. The witness field may present a finer
/// variety over a larger constant base; the generators are read there.
pub fn verify_witness(v: &Variety, w: &DerivationWitness) -> WitnessReport {
    let field = w.field();
    if field.registry().names() != v.registry().names() {
        return WitnessReport::structural(
            "the witness coordinates do not match the variety".into(),
        );
    }
    if v.model() == Model::SmallJ {
        return WitnessReport::structural(
            "the j model carries no derivation structure".into(),
        );
    }
    let wparams = field.base().registry();
    for name in v.base().field().registry().names() {
        if wparams.index_of(name).is_none() {
            return WitnessReport::structural(format!(
                "the witness base field lacks the parameter {name}"
            ));
        }
    }
    let m = v.base().derivation_count();
    if w.lambdas().len() != m {
        return WitnessReport::structural(format!(
            "the witness extends {} base derivations, the variety base carries {m}",
            w.lambdas().len()
        ));
    }
    for (l, name) in v.base().diff_params().iter().enumerate() {
        if wparams.names().get(l).map(String::as_str) != Some(name.as_str()) {
            return WitnessReport::structural(format!(
                "base derivation {} acts on {name}, which is not parameter {} of the witness base",
                l + 1,
                l + 1
            ));
        }
    }
    let same_base = field.base() == v.base().field();
    let gens: Vec<MPoly<FracField>> = v
        .generators()
        .iter()
        .map(|g| if same_base { g.clone() } else { extend_coeffs(g, field.base()) })
        .collect();
    let names = v.registry().names();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for k in 0..w.derivations() {
        let table = w.table(k);
        for (gi, g) in gens.iter().enumerate() {
            if !field.is_zero(&field.d_poly(&table, g)) {
                failures.push(format!(
                    "derivation {}: the prolongation of generator {} does not vanish",
                    k + 1,
                    gi + 1
                ));
            }
        }
        for i in 1..=v.block_count() {
            match v.model() {
                Model::J => {
                    let c: Vec<usize> = (0..4).map(|o| v.coord_index(i, o)).collect();
                    let imgs: Vec<CoordElem> =
                        c.iter().map(|&ci| field.coordinate(ci)).collect();
                    let dz = w.value(k, c[0]);
                    for o in 0..2 {
                        let lhs =
                            field.sub(w.value(k, c[o + 1]), &field.mul(&imgs[o + 2], dz));
                        if !field.is_zero(&lhs) {
                            failures.push(format!(
                                "derivation {}: delta {} - {} * delta {} does not vanish",
                                k + 1,
                                names[c[o + 1]],
                                names[c[o + 2]],
                                names[c[0]]
                            ));
                        }
                    }
                    match ode_eta(field, &imgs[1], &imgs[2], &imgs[3]) {
                        Ok(eta) => {
                            let lhs = field.sub(w.value(k, c[3]), &field.mul(&eta, dz));
                            if !field.is_zero(&lhs) {
                                failures.push(format!(
                                    "derivation {}: delta {} does not follow the third-order model value on block {i}",
                                    k + 1,
                                    names[c[3]]
                                ));
                            }
                        }
                        Err(_) => {
                            if c.iter().all(|&ci| field.is_zero(w.value(k, ci))) {
                                notes.push(format!(
                                    "block {i} sits at a singular point; the constant extension is accepted"
                                ));
                            } else {
                                failures.push(format!(
                                    "derivation {}: block {i} sits at a singular point yet the derivation does not vanish on it",
                                    k + 1
                                ));
                            }
                        }
                    }
                }
                Model::Exp => {
                    let cx = v.coord_index(i, 0);
                    let cy = v.coord_index(i, 1);
                    let y = field.coordinate(cy);
                    let lhs = field.sub(w.value(k, cy), &field.mul(&y, w.value(k, cx)));
                    if !field.is_zero(&lhs) {
                        failures.push(format!(
                            "derivation {}: delta {} - {} * delta {} does not vanish",
                            k + 1,
                            names[cy],
                            names[cy],
                            names[cx]
                        ));
                    }
                }
                Model::SmallJ => unreachable!("rejected above"),
            }
        }
    }
    let coords = v.registry().len();
    let all_nonconstant = (0..coords)
        .all(|ci| (0..w.derivations()).any(|k| !field.is_zero(w.value(k, ci))));
    WitnessReport { verified: failures.is_empty(), all_nonconstant, failures, notes }
}
