//! Varieties in the prolongation coordinates and their structure checks:
//! projection dimensions, broadness, freeness, rotundity, and the
//! singular-locus test for the third-order equation.
//!
//! A variety carries its model, its base field, and an eagerly computed
//! grevlex Groebner basis of the generator ideal. All dimension counts are
//! Krull dimensions of ideals over the base field; block indices are
//! 1-based throughout, matching the coordinate names.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::convert::canonical_generator;
use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::groebner::{buchberger, elimination_ideal, GroebnerBasis};
use crate::linalg::Matrix;
use crate::modular::ModularProvider;
use crate::mpoly::MPoly;
use crate::ratfunc::FracField;
use crate::rational::{gcd_int, lcm_int, rat_int, Rat};
use crate::report::ReportLine;
use crate::vars::{same_registry, MonomialOrder, VarRegistry};

// ---------------------------------------------------------------------------
// Models

/// Which differential equation the coordinates describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Blocks (z_i, j_i, jp_i, jpp_i): solutions of the third-order
    /// equation together with their first two derivatives.
    J,
    /// Blocks (z_i, j_i): solutions without derivative coordinates.
    SmallJ,
    /// Blocks (x_i, y_i): graphs of the exponential.
    Exp,
}

impl Model {
    pub fn block_arity(self) -> usize {
        match self {
            Model::J => 4,
            Model::SmallJ | Model::Exp => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Model::J => "J",
            Model::SmallJ => "j",
            Model::Exp => "exp",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "J" => Some(Model::J),
            "j" => Some(Model::SmallJ),
            "exp" => Some(Model::Exp),
            _ => None,
        }
    }

    /// Coordinate names of one block, 1-based.
    pub fn block_names(self, i: usize) -> Vec<String> {
        match self {
            Model::J => vec![
                format!("z{i}"),
                format!("j{i}"),
                format!("jp{i}"),
                format!("jpp{i}"),
            ],
            Model::SmallJ => vec![format!("z{i}"), format!("j{i}")],
            Model::Exp => vec![format!("x{i}"), format!("y{i}")],
        }
    }

    /// Registry of all coordinates for `n` blocks, block-major.
    pub fn registry(self, n: usize) -> Arc<VarRegistry> {
        let mut names = Vec::with_capacity(n * self.block_arity());
        for i in 1..=n {
            names.extend(self.block_names(i));
        }
        VarRegistry::new(names)
    }
}

// ---------------------------------------------------------------------------
// Base fields

/// The base differential field: Q with named parameters adjoined.
/// Parameters in `diff_params` carry the derivations d/dt_k; parameters in
/// `const_params` are transcendental constants killed by every derivation.
#[derive(Debug, Clone)]
pub struct BaseField {
    diff_params: Vec<String>,
    const_params: Vec<String>,
    field: FracField,
}

impl PartialEq for BaseField {
    fn eq(&self, other: &Self) -> bool {
        self.diff_params == other.diff_params && self.const_params == other.const_params
    }
}

impl BaseField {
    pub fn new(diff_params: Vec<String>, const_params: Vec<String>) -> Self {
        let mut names: Vec<String> = diff_params.clone();
        names.extend(const_params.iter().cloned());
        let seen: BTreeSet<&String> = names.iter().collect();
        assert_eq!(seen.len(), names.len(), "duplicate base parameter name");
        let field = FracField::new(VarRegistry::new(names));
        BaseField { diff_params, const_params, field }
    }

    pub fn rationals() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn with_diff_params(names: Vec<String>) -> Self {
        Self::new(names, Vec::new())
    }

    pub fn diff_params(&self) -> &[String] {
        &self.diff_params
    }

    pub fn const_params(&self) -> &[String] {
        &self.const_params
    }

    /// Number of derivations the base carries.
    pub fn derivation_count(&self) -> usize {
        self.diff_params.len()
    }

    pub fn is_constants_only(&self) -> bool {
        self.diff_params.is_empty()
    }

    /// The rational function field Q(params), differential parameters first.
    pub fn field(&self) -> &FracField {
        &self.field
    }

    pub fn param_count(&self) -> usize {
        self.diff_params.len() + self.const_params.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.field.registry().index_of(name)
    }

    /// Same differential structure with extra transcendental constants.
    pub fn extend_constants(&self, fresh: &[String]) -> Self {
        let mut consts = self.const_params.clone();
        consts.extend(fresh.iter().cloned());
        Self::new(self.diff_params.clone(), consts)
    }

    /// Header form of the differential part: `Q`, `Q(t)`, or `Q(t1..tm)`.
    pub fn descriptor(&self) -> String {
        let m = self.diff_params.len();
        match m {
            0 => "Q".into(),
            1 => format!("Q({})", self.diff_params[0]),
            _ => {
                let standard = (1..=m).all(|i| self.diff_params[i - 1] == format!("t{i}"));
                assert!(standard, "multi-parameter bases must be named t1..tm");
                format!("Q(t1..t{m})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Varieties

/// A subvariety of the ambient block space, presented by generators over
/// the base field. Generators are stored in canonical form (denominators
/// cleared, content removed, positive leading coefficient) and the grevlex
/// Groebner basis is computed up front, so an inconsistent presentation is
/// rejected at construction.
#[derive(Debug, Clone)]
pub struct Variety {
    model: Model,
    n: usize,
    base: BaseField,
    assume_prime: bool,
    gens: Vec<MPoly<FracField>>,
    reg: Arc<VarRegistry>,
    gb: GroebnerBasis<FracField>,
}

impl Variety {
    pub fn new(
        model: Model,
        n: usize,
        base: BaseField,
        assume_prime: bool,
        raw_gens: Vec<MPoly<FracField>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidVariety("a variety needs at least one block".into()));
        }
        let reg = model.registry(n);
        let mut gens = Vec::with_capacity(raw_gens.len());
        for g in &raw_gens {
            if same_registry(g.registry(), &reg).is_err() {
                return Err(Error::InvalidVariety(
                    "generator is written in different coordinates".into(),
                ));
            }
            if g.field() != base.field() {
                return Err(Error::InvalidVariety(
                    "generator coefficients live over a different base field".into(),
                ));
            }
            if g.is_zero() {
                continue;
            }
            gens.push(canonical_generator(g));
        }
        let gb = if gens.is_empty() {
            GroebnerBasis::zero_ideal(base.field().clone(), reg.clone(), MonomialOrder::GrevLex)
        } else {
            buchberger(&gens, MonomialOrder::GrevLex)?
        };
        if gb.is_unit_ideal() {
            return Err(Error::UnitIdeal(
                "generators span the unit ideal; the variety is empty".into(),
            ));
        }
        Ok(Variety { model, n, base, assume_prime, gens, reg, gb })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn block_count(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn assume_prime(&self) -> bool {
        self.assume_prime
    }

    pub fn generators(&self) -> &[MPoly<FracField>] {
        &self.gens
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn basis(&self) -> &GroebnerBasis<FracField> {
        &self.gb
    }

    pub fn dimension(&self) -> i64 {
        self.gb.dimension()
    }

    /// Index of coordinate `offset` within 1-based block `i`.
    pub fn coord_index(&self, i: usize, offset: usize) -> usize {
        assert!(1 <= i && i <= self.n, "block index out of range");
        assert!(offset < self.model.block_arity(), "offset outside block");
        (i - 1) * self.model.block_arity() + offset
    }

    /// All coordinate indices of 1-based block `i`.
    pub fn block_indices(&self, i: usize) -> Vec<usize> {
        (0..self.model.block_arity()).map(|o| self.coord_index(i, o)).collect()
    }

    /// The coordinate with index `v` as a polynomial.
    pub fn coordinate(&self, v: usize) -> MPoly<FracField> {
        MPoly::var(self.base.field().clone(), self.reg.clone(), MonomialOrder::GrevLex, v)
    }

    fn constant(&self, c: i64) -> MPoly<FracField> {
        MPoly::constant(
            self.base.field().clone(),
            self.reg.clone(),
            MonomialOrder::GrevLex,
            self.base.field().from_rat(&rat_int(c)),
        )
    }

    /// Dimension of the closure of the projection onto the named blocks.
    /// `blocks` must be strictly increasing, 1-based.
    pub fn projection_dimension(&self, blocks: &[usize]) -> Result<i64> {
        if blocks.is_empty()
            || blocks.windows(2).any(|w| w[0] >= w[1])
            || *blocks.last().unwrap() > self.n
        {
            return Err(Error::InvalidVariety(
                "projection blocks must be strictly increasing and within range".into(),
            ));
        }
        let keep: BTreeSet<usize> =
            blocks.iter().flat_map(|&i| self.block_indices(i)).collect();
        let eb = self.gb.eliminate(&keep)?;
        Ok(eb.dimension_over(&keep))
    }

    /// Broadness across every nonempty block tuple. J-model projections are
    /// held to 3k (strictly 3k+1); the derivative-free model to k.
    pub fn check_broadness(&self) -> Result<BroadnessReport> {
        if self.model == Model::Exp {
            return Err(Error::InvalidVariety(
                "broadness is a notion for the modular models".into(),
            ));
        }
        let mut records = Vec::new();
        let mut broad = true;
        let mut strongly = true;
        for tuple in block_tuples(self.n) {
            let dim = self.projection_dimension(&tuple)?;
            let k = tuple.len() as i64;
            let threshold = match self.model {
                Model::J => 3 * k,
                Model::SmallJ => k,
                Model::Exp => unreachable!(),
            };
            broad &= dim >= threshold;
            strongly &= dim >= threshold + 1;
            records.push(ProjectionRecord { blocks: tuple, dim, threshold });
        }
        let strongly_broad = match self.model {
            Model::J => Some(strongly),
            _ => None,
        };
        Ok(BroadnessReport { model: self.model, records, broad, strongly_broad })
    }

    /// Freeness: no coordinate is algebraic over the base, and no modular
    /// relation of level <= `nmax` holds between distinct j-coordinates.
    pub fn check_freeness(
        &self,
        provider: &mut ModularProvider,
        nmax: u32,
    ) -> Result<FreenessReport> {
        if self.model == Model::Exp {
            return Err(Error::InvalidVariety(
                "freeness is a notion for the modular models".into(),
            ));
        }
        let mut constant_coordinates = Vec::new();
        for v in 0..self.reg.len() {
            let keep: BTreeSet<usize> = [v].into();
            let eb = self.gb.eliminate(&keep)?;
            if !eb.is_zero_ideal() {
                constant_coordinates.push(self.reg.name(v).to_string());
            }
        }
        let mut modular_witnesses = Vec::new();
        for i in 1..=self.n {
            for k in i + 1..=self.n {
                let ji = self.coordinate(self.coord_index(i, 1));
                let jk = self.coordinate(self.coord_index(k, 1));
                for level in 1..=nmax {
                    let phi = provider.get(level)?;
                    if self.gb.contains(&phi.eval_poly(&ji, &jk)) {
                        modular_witnesses.push(ModularWitness { level, i, k });
                    }
                }
            }
        }
        let free = constant_coordinates.is_empty() && modular_witnesses.is_empty();
        Ok(FreenessReport { nmax, constant_coordinates, modular_witnesses, free })
    }

    /// Dimension of the closure of [M](V) for an integer matrix `m` with a
    /// row per output block: additively u = M x, multiplicatively v = y^M.
    pub fn monomial_image_dimension(&self, m: &[Vec<i64>]) -> Result<i64> {
        if self.model != Model::Exp {
            return Err(Error::InvalidVariety(
                "monomial images are a notion for the exponential model".into(),
            ));
        }
        let k = m.len();
        if k == 0 || m.iter().any(|row| row.len() != self.n) {
            return Err(Error::InvalidVariety(
                "matrix must be nonempty with one column per block".into(),
            ));
        }
        let f = self.base.field().clone();
        let order = MonomialOrder::GrevLex;

        let mut names: Vec<String> = self.reg.names().to_vec();
        for j in 1..=self.n {
            names.push(format!("w{j}"));
        }
        for i in 1..=k {
            names.push(format!("u{i}"));
        }
        for i in 1..=k {
            names.push(format!("v{i}"));
        }
        let ext = VarRegistry::new(names);
        let w0 = self.reg.len();
        let u0 = w0 + self.n;
        let v0 = u0 + k;
        let var = |v: usize| MPoly::var(f.clone(), ext.clone(), order.clone(), v);
        let one = MPoly::one(f.clone(), ext.clone(), order.clone());

        let embed: Vec<Option<usize>> = (0..self.reg.len()).map(Some).collect();
        let mut gens: Vec<MPoly<FracField>> = self
            .gens
            .iter()
            .map(|g| {
                g.map_registry(ext.clone(), order.clone(), &embed)
                    .expect("identity embedding maps every variable")
            })
            .collect();

        for j in 0..self.n {
            let y = var(self.coord_index(j + 1, 1));
            gens.push(y.mul(&var(w0 + j)).sub(&one));
        }
        for (i, row) in m.iter().enumerate() {
            let mut lin = var(u0 + i);
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    let x = var(self.coord_index(j + 1, 0));
                    lin = lin.sub(&x.scale(&f.from_rat(&rat_int(c))));
                }
            }
            gens.push(lin);

            let mut mono = one.clone();
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    mono = mono.mul(&var(self.coord_index(j + 1, 1)).pow(c as u32));
                } else if c < 0 {
                    mono = mono.mul(&var(w0 + j).pow((-c) as u32));
                }
            }
            gens.push(var(v0 + i).sub(&mono));
        }

        let keep: BTreeSet<usize> = (u0..u0 + 2 * k).collect();
        let eb = elimination_ideal(&gens, &keep)?;
        Ok(eb.dimension_over(&keep))
    }

    /// Rotundity over all integer matrices with entries in [-bound, bound],
    /// tested once per row space. Row spaces are canonicalized to primitive
    /// integer reduced echelon form; a failure is any space whose monomial
    /// image drops below the rank.
    pub fn check_rotund(&self, bound: i64) -> Result<RotundReport> {
        if self.model != Model::Exp {
            return Err(Error::InvalidVariety(
                "rotundity is a notion for the exponential model".into(),
            ));
        }
        assert!(bound >= 1, "rotundity bound must be positive");

        // Every bounded row is an integer multiple of a bounded primitive
        // direction, so spans of bounded matrices are exactly spans of
        // direction subsets of size <= n.
        let mut directions: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut odo = vec![-bound; self.n];
        loop {
            if odo.iter().any(|&e| e != 0) {
                let canon = canonical_rowspace(std::slice::from_ref(&odo), self.n);
                directions.insert(canon.into_iter().next().expect("nonzero row survives"));
            }
            if !advance(&mut odo, bound) {
                break;
            }
        }
        let directions: Vec<Vec<i64>> = directions.into_iter().collect();

        let mut seen: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
        let mut failures: Vec<(usize, Vec<Vec<i64>>, i64)> = Vec::new();
        for k in 1..=self.n.min(directions.len()) {
            let mut pick: Vec<usize> = (0..k).collect();
            loop {
                let rows: Vec<Vec<i64>> = pick.iter().map(|&i| directions[i].clone()).collect();
                let canon = canonical_rowspace(&rows, self.n);
                if seen.insert(canon.clone()) {
                    let rank = canon.len();
                    let dim = self.monomial_image_dimension(&canon)?;
                    if dim < rank as i64 {
                        failures.push((rank, canon, dim));
                    }
                }
                if !advance_combination(&mut pick, directions.len()) {
                    break;
                }
            }
        }

        failures.sort();
        let failing = failures.into_iter().next().map(|(rank, rows, dim)| FailingMatrix {
            rows,
            rank,
            dim,
        });
        Ok(RotundReport {
            bound,
            spaces_checked: seen.len(),
            rotund: failing.is_none(),
            failing,
        })
    }

    /// The third-order equation degenerates where j = 0, j = 1728, or
    /// j' = 0; passes when no block is forced onto that locus.
    pub fn singular_locus_check(&self) -> Result<SingularReport> {
        if self.model != Model::J {
            return Err(Error::InvalidVariety(
                "the singular-locus test needs the derivative coordinates".into(),
            ));
        }
        let mut hits = Vec::new();
        for i in 1..=self.n {
            let j = self.coordinate(self.coord_index(i, 1));
            let jp = self.coordinate(self.coord_index(i, 2));
            if self.gb.contains(&j) {
                hits.push(format!("j{i}"));
            }
            if self.gb.contains(&j.sub(&self.constant(1728))) {
                hits.push(format!("j{i}-1728"));
            }
            if self.gb.contains(&jp) {
                hits.push(format!("jp{i}"));
            }
        }
        Ok(SingularReport { clean: hits.is_empty(), hits })
    }
}

/// Nonempty subsets of 1..=n, smallest first, lexicographic within a size.
fn block_tuples(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..1 << n)
        .map(|mask| (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect())
        .collect();
    out.sort_by_key(|t| (t.len(), t.clone()));
    out
}

/// Advance a [-bound, bound] odometer; false when it wraps.
fn advance(odo: &mut [i64], bound: i64) -> bool {
    for e in odo.iter_mut().rev() {
        if *e < bound {
            *e += 1;
            return true;
        }
        *e = -bound;
    }
    false
}

/// Advance an increasing index combination below `len`; false at the end.
fn advance_combination(pick: &mut [usize], len: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < len - (k - i) {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Canonical basis of the row space: reduced echelon form with every row
/// scaled to a primitive integer vector, leading entry positive. Zero rows
/// are dropped, so the result has full rank.
fn canonical_rowspace(rows: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut mat = Matrix::zero(QField, rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        for (c, &e) in row.iter().enumerate() {
            mat.set(r, c, rat_int(e));
        }
    }
    mat.rref().expect("rational elimination cannot fail");
    let mut out = Vec::new();
    for r in 0..rows.len() {
        let row = mat.row(r);
        if row.iter().all(|e| e == &Rat::from_integer(0.into())) {
            continue;
        }
        let mut den = num_bigint::BigInt::from(1);
        for e in row {
            den = lcm_int(&den, e.denom());
        }
        let ints: Vec<num_bigint::BigInt> =
            row.iter().map(|e| e.numer() * &den / e.denom()).collect();
        let mut g = num_bigint::BigInt::from(0);
        for v in &ints {
            g = gcd_int(&g, v);
        }
        let lead_negative = ints
            .iter()
            .find(|v| v != &&num_bigint::BigInt::from(0))
            .map(|v| v < &num_bigint::BigInt::from(0))
            .unwrap_or(false);
        if lead_negative {
            g = -g;
        }
        out.push(
            ints.iter()
                .map(|v| (v / &g).to_i64().expect("canonical row entry fits in i64"))
                .collect(),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionRecord {
    pub blocks: Vec<usize>,
    pub dim: i64,
    pub threshold: i64,
}

#[derive(Debug, Clone)]
pub struct BroadnessReport {
    pub model: Model,
    pub records: Vec<ProjectionRecord>,
    pub broad: bool,
    pub strongly_broad: Option<bool>,
}

impl BroadnessReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = Vec::new();
        for rec in &self.records {
            let tuple = rec
                .blocks
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",");
            out.push(ReportLine::prose(format!(
                "projection ({tuple}): dimension {}, threshold {}",
                rec.dim, rec.threshold
            )));
            let key = rec
                .blocks
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("_");
            out.push(ReportLine::kv(format!("proj_{key}"), rec.dim));
        }
        match self.model {
            Model::J => {
                out.push(ReportLine::kv("J_broad", self.broad));
                out.push(ReportLine::kv(
                    "strongly",
                    self.strongly_broad.expect("J model records the strict form"),
                ));
            }
            Model::SmallJ => out.push(ReportLine::kv("j_broad", self.broad)),
            Model::Exp => unreachable!("broadness is never computed for exp"),
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularWitness {
    pub level: u32,
    pub i: usize,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct FreenessReport {
    pub nmax: u32,
    pub constant_coordinates: Vec<String>,
    pub modular_witnesses: Vec<ModularWitness>,
    pub free: bool,
}

impl FreenessReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = vec![ReportLine::kv("nmax", self.nmax)];
        for c in &self.constant_coordinates {
            out.push(ReportLine::prose(format!("{c} is algebraic over the base field")));
            out.push(ReportLine::kv("constant_coordinate", c));
        }
        for w in &self.modular_witnesses {
            out.push(ReportLine::prose(format!(
                "modular relation of level {} holds between j{} and j{}",
                w.level, w.i, w.k
            )));
            out.push(ReportLine::kv(
                "modular_witness",
                format!("{}:{}:{}", w.level, w.i, w.k),
            ));
        }
        out.push(ReportLine::kv("free", self.free));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailingMatrix {
    pub rows: Vec<Vec<i64>>,
    pub rank: usize,
    pub dim: i64,
}

#[derive(Debug, Clone)]
pub struct RotundReport {
    pub bound: i64,
    pub spaces_checked: usize,
    pub failing: Option<FailingMatrix>,
    pub rotund: bool,
}

impl RotundReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = vec![
            ReportLine::kv("bound", self.bound),
            ReportLine::kv("rowspaces", self.spaces_checked),
        ];
        if let Some(fm) = &self.failing {
            let rows = fm
                .rows
                .iter()
                .map(|r| {
                    r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
                })
                .collect::<Vec<_>>()
                .join("; ");
            out.push(ReportLine::prose(format!(
                "matrix of rank {} maps the variety to dimension {}",
                fm.rank, fm.dim
            )));
            out.push(ReportLine::kv("witness_matrix", rows));
            out.push(ReportLine::kv("witness_rank", fm.rank));
            out.push(ReportLine::kv("witness_dim", fm.dim));
        }
        out.push(ReportLine::kv("rotund", self.rotund));
        out
    }
}

#[derive(Debug, Clone)]
pub struct SingularReport {
    pub clean: bool,
    pub hits: Vec<String>,
}

impl SingularReport {
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out = Vec::new();
        for hit in &self.hits {
            out.push(ReportLine::prose(format!("{hit} vanishes on the variety")));
            out.push(ReportLine::kv("singular_witness", hit));
        }
        out.push(ReportLine::kv("singular_clean", self.clean));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::render_report;

    fn full(model: Model, n: usize) -> Variety {
        Variety::new(model, n, BaseField::rationals(), true, Vec::new()).unwrap()
    }

    fn vp(model: Model, n: usize, v: usize) -> MPoly<FracField> {
        let base = BaseField::rationals();
        MPoly::var(base.field().clone(), model.registry(n), MonomialOrder::GrevLex, v)
    }

    fn cp(model: Model, n: usize, c: i64) -> MPoly<FracField> {
        let base = BaseField::rationals();
        MPoly::constant(
            base.field().clone(),
            model.registry(n),
            MonomialOrder::GrevLex,
            base.field().from_rat(&rat_int(c)),
        )
    }

    fn make(model: Model, n: usize, gens: Vec<MPoly<FracField>>) -> Variety {
        Variety::new(model, n, BaseField::rationals(), true, gens).unwrap()
    }

    #[test]
    fn registries_and_full_space_dimensions() {
        assert_eq!(
            Model::J.registry(2).names(),
            ["z1", "j1", "jp1", "jpp1", "z2", "j2", "jp2", "jpp2"]
        );
        assert_eq!(Model::Exp.registry(1).names(), ["x1", "y1"]);
        assert_eq!(full(Model::J, 1).dimension(), 4);
        assert_eq!(full(Model::SmallJ, 2).dimension(), 4);
        assert_eq!(full(Model::Exp, 1).dimension(), 2);
    }

    #[test]
    fn base_field_descriptors() {
        assert_eq!(BaseField::rationals().descriptor(), "Q");
        assert_eq!(BaseField::with_diff_params(vec!["t".into()]).descriptor(), "Q(t)");
        assert_eq!(
            BaseField::with_diff_params(vec!["t1".into(), "t2".into()]).descriptor(),
            "Q(t1..t2)"
        );
        let b = BaseField::with_diff_params(vec!["t".into()])
            .extend_constants(&["a".into(), "b".into()]);
        assert_eq!(b.derivation_count(), 1);
        assert_eq!(b.param_index("b"), Some(2));
    }

    #[test]
    fn unit_ideal_presentations_are_rejected() {
        let z = vp(Model::J, 1, 0);
        let err = Variety::new(
            Model::J,
            1,
            BaseField::rationals(),
            true,
            vec![z.clone(), z.sub(&cp(Model::J, 1, 1))],
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnitIdeal(_)));
    }

    #[test]
    fn projection_dimensions_match_hand_counts() {
        let v = full(Model::J, 1);
        assert_eq!(v.projection_dimension(&[1]).unwrap(), 4);

        // Diagonal curve z = j = jp = jpp.
        let d = make(
            Model::J,
            1,
            vec![
                vp(Model::J, 1, 0).sub(&vp(Model::J, 1, 1)),
                vp(Model::J, 1, 1).sub(&vp(Model::J, 1, 2)),
                vp(Model::J, 1, 2).sub(&vp(Model::J, 1, 3)),
            ],
        );
        assert_eq!(d.dimension(), 1);
        assert_eq!(d.projection_dimension(&[1]).unwrap(), 1);

        // Point in block 1, full space in block 2.
        let p = make(
            Model::J,
            2,
            vec![
                vp(Model::J, 2, 0),
                vp(Model::J, 2, 1).sub(&cp(Model::J, 2, 1)),
                vp(Model::J, 2, 2).sub(&cp(Model::J, 2, 1)),
                vp(Model::J, 2, 3).sub(&cp(Model::J, 2, 1)),
            ],
        );
        assert_eq!(p.projection_dimension(&[1]).unwrap(), 0);
        assert_eq!(p.projection_dimension(&[2]).unwrap(), 4);
        assert_eq!(p.projection_dimension(&[1, 2]).unwrap(), 4);
        assert!(p.projection_dimension(&[2, 1]).is_err());
        assert!(p.projection_dimension(&[]).is_err());
    }

    #[test]
    fn full_spaces_are_strongly_broad() {
        for n in 1..=3 {
            let rep = full(Model::J, n).check_broadness().unwrap();
            assert!(rep.broad);
            assert_eq!(rep.strongly_broad, Some(true));
            assert_eq!(rep.records.len(), (1 << n) - 1);
        }
        let rep = full(Model::SmallJ, 2).check_broadness().unwrap();
        assert!(rep.broad);
        assert_eq!(rep.strongly_broad, None);
    }

    #[test]
    fn hyperplane_is_broad_but_not_strongly() {
        let h = make(
            Model::J,
            1,
            vec![vp(Model::J, 1, 0)
                .add(&vp(Model::J, 1, 1))
                .add(&vp(Model::J, 1, 2))
                .add(&vp(Model::J, 1, 3))],
        );
        let rep = h.check_broadness().unwrap();
        assert!(rep.broad);
        assert_eq!(rep.strongly_broad, Some(false));
        let text = render_report(&rep.lines());
        assert!(text.contains("proj_1=3\n"));
        assert!(text.contains("J_broad=true\n"));
        assert!(text.contains("strongly=false\n"));
    }

    #[test]
    fn block_with_a_point_breaks_broadness() {
        let p = make(
            Model::J,
            2,
            vec![
                vp(Model::J, 2, 0),
                vp(Model::J, 2, 1).sub(&cp(Model::J, 2, 1)),
                vp(Model::J, 2, 2).sub(&cp(Model::J, 2, 1)),
                vp(Model::J, 2, 3).sub(&cp(Model::J, 2, 1)),
            ],
        );
        let rep = p.check_broadness().unwrap();
        assert!(!rep.broad);
        assert_eq!(rep.strongly_broad, Some(false));
        let first = &rep.records[0];
        assert_eq!(first.blocks, vec![1]);
        assert_eq!(first.dim, 0);
        assert_eq!(first.threshold, 3);
    }

    #[test]
    fn full_space_is_free() {
        let mut provider = ModularProvider::new(16);
        let rep = full(Model::J, 2).check_freeness(&mut provider, 2).unwrap();
        assert!(rep.free);
        assert!(rep.constant_coordinates.is_empty());
        assert!(rep.modular_witnesses.is_empty());
    }

    #[test]
    fn equal_j_coordinates_are_caught_at_level_one() {
        let v = make(
            Model::J,
            2,
            vec![vp(Model::J, 2, 1).sub(&vp(Model::J, 2, 5))],
        );
        let mut provider = ModularProvider::new(16);
        let rep = v.check_freeness(&mut provider, 1).unwrap();
        assert!(!rep.free);
        assert_eq!(rep.modular_witnesses, vec![ModularWitness { level: 1, i: 1, k: 2 }]);
        assert!(rep.constant_coordinates.is_empty());
        let text = render_report(&rep.lines());
        assert!(text.contains("modular_witness=1:1:2\n"));
        assert!(text.contains("free=false\n"));
    }

    #[test]
    fn constant_coordinate_breaks_freeness() {
        let v = make(Model::J, 1, vec![vp(Model::J, 1, 0).sub(&cp(Model::J, 1, 5))]);
        let mut provider = ModularProvider::new(16);
        let rep = v.check_freeness(&mut provider, 5).unwrap();
        assert!(!rep.free);
        assert_eq!(rep.constant_coordinates, vec!["z1".to_string()]);
        assert!(rep.modular_witnesses.is_empty());
    }

    #[test]
    fn modular_relation_is_caught_at_its_level() {
        let mut provider = ModularProvider::new(16);
        let j1 = vp(Model::SmallJ, 2, 1);
        let j2 = vp(Model::SmallJ, 2, 3);
        let phi2 = provider.get(2).unwrap().eval_poly(&j1, &j2);
        let v = make(Model::SmallJ, 2, vec![phi2]);
        let rep = v.check_freeness(&mut provider, 2).unwrap();
        assert!(!rep.free);
        assert_eq!(rep.modular_witnesses, vec![ModularWitness { level: 2, i: 1, k: 2 }]);
    }

    #[test]
    fn monomial_images_of_the_plane_and_its_subsets() {
        let g = full(Model::Exp, 1);
        assert_eq!(g.monomial_image_dimension(&[vec![2]]).unwrap(), 2);

        let graph_line = make(Model::Exp, 1, vec![vp(Model::Exp, 1, 1).sub(&cp(Model::Exp, 1, 1))]);
        assert_eq!(graph_line.monomial_image_dimension(&[vec![1]]).unwrap(), 1);

        let point = make(
            Model::Exp,
            1,
            vec![
                vp(Model::Exp, 1, 0),
                vp(Model::Exp, 1, 1).sub(&cp(Model::Exp, 1, 1)),
            ],
        );
        assert_eq!(point.monomial_image_dimension(&[vec![1]]).unwrap(), 0);
    }

    #[test]
    fn rotundity_of_the_full_torus_and_of_degenerate_sets() {
        let rep = full(Model::Exp, 1).check_rotund(3).unwrap();
        assert!(rep.rotund);
        assert_eq!(rep.spaces_checked, 1);
        assert!(rep.failing.is_none());

        let point = make(
            Model::Exp,
            1,
            vec![
                vp(Model::Exp, 1, 0),
                vp(Model::Exp, 1, 1).sub(&cp(Model::Exp, 1, 1)),
            ],
        );
        let rep = point.check_rotund(3).unwrap();
        assert!(!rep.rotund);
        let fm = rep.failing.as_ref().unwrap();
        assert_eq!(fm.rows, vec![vec![1]]);
        assert_eq!(fm.dim, 0);
    }

    #[test]
    fn diagonal_pair_fails_rotundity_with_the_difference_vector() {
        let v = make(
            Model::Exp,
            2,
            vec![
                vp(Model::Exp, 2, 2).sub(&vp(Model::Exp, 2, 0)),
                vp(Model::Exp, 2, 3).sub(&vp(Model::Exp, 2, 1)),
            ],
        );
        let rep = v.check_rotund(3).unwrap();
        assert!(!rep.rotund);
        let fm = rep.failing.as_ref().unwrap();
        assert_eq!(fm.rows, vec![vec![1, -1]]);
        assert_eq!(fm.rank, 1);
        assert_eq!(fm.dim, 0);
        let text = render_report(&rep.lines());
        assert!(text.contains("witness_matrix=1 -1\n"));
        assert!(text.contains("rotund=false\n"));
    }

    #[test]
    fn singular_locus_hits_each_forbidden_divisor() {
        assert!(full(Model::J, 1).singular_locus_check().unwrap().clean);

        let at_1728 = make(Model::J, 1, vec![vp(Model::J, 1, 1).sub(&cp(Model::J, 1, 1728))]);
        let rep = at_1728.singular_locus_check().unwrap();
        assert!(!rep.clean);
        assert_eq!(rep.hits, vec!["j1-1728".to_string()]);

        let flat = make(Model::J, 1, vec![vp(Model::J, 1, 2)]);
        let rep = flat.singular_locus_check().unwrap();
        assert_eq!(rep.hits, vec!["jp1".to_string()]);

        assert!(full(Model::SmallJ, 1).singular_locus_check().is_err());
    }

    #[test]
    fn operations_reject_the_wrong_model() {
        assert!(full(Model::Exp, 1).check_broadness().is_err());
        assert!(full(Model::J, 1).check_rotund(2).is_err());
        assert!(full(Model::J, 1).monomial_image_dimension(&[vec![1]]).is_err());
    }

    #[test]
    fn canonical_rowspace_normalizes_scaling_and_order() {
        assert_eq!(
            canonical_rowspace(&[vec![-2, 2]], 2),
            vec![vec![1, -1]]
        );
        assert_eq!(
            canonical_rowspace(&[vec![2, 1], vec![1, 2]], 2),
            vec![vec![1, 0], vec![0, 1]]
        );
        assert_eq!(
            canonical_rowspace(&[vec![1, 1], vec![2, 2]], 2),
            vec![vec![1, 1]]
        );
        assert!(canonical_rowspace(&[vec![0, 0]], 2).is_empty());
    }
}
