//! Reduction steps between varieties: lifting derivative-free varieties
//! into the jet model, fibering away a block with a constant coordinate,
//! substituting a modular relation through a Möbius map, and lifting
//! witnesses back through a completed reduction.
//!
//! The Möbius step adjoins four fresh constant parameters a, b, c, d and
//! couples block i to block k by z_k = (a·z_i + b)/(c·z_i + d). Writing
//! u = c·z_i + d and D = ad - bc, the coupled relations are derived by
//! formal differentiation. The map itself gives z_k' = (D/u²)·z_i', so
//! differentiating the modular relation Phi(j_i, j_k) = 0 once along a
//! solution and clearing u² yields
//!
//!   R1 = Phi_X·jp_i·u² + Phi_Y·jp_k·D.
//!
//! Differentiating R1 = 0 once more, with Phi_X' = Phi_XX·jp_i +
//! Phi_XY·jp_k·D/u², Phi_Y' = Phi_XY·jp_i + Phi_YY·jp_k·D/u², and u' = c,
//! then clearing u² again, yields
//!
//!   R2 = Phi_XX·jp_i²·u⁴ + 2·Phi_XY·jp_i·jp_k·D·u² + Phi_YY·jp_k²·D²
//!        + Phi_X·(jpp_i·u⁴ + 2c·jp_i·u³) + Phi_Y·jpp_k·D².
//!
//! The same relations run backwards when lifting: on the locus they cut
//! out, the block-i coordinates and their derivation values are determined
//! by block k, with dz_i = u²·dz_k/D from the differentiated Möbius map.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::convert::extend_coeffs;
use crate::coordfield::CoordField;
use crate::derivation::{coordinate_field, verify_witness, DerivationWitness, WitnessReport};
use crate::error::{Error, Result};
use crate::field::{CoeffField, QField};
use crate::groebner::buchberger;
use crate::modular::{ode_eta, ModularProvider};
use crate::mpoly::{eval_in_field, MPoly, QPoly};
use crate::ratfunc::{FracField, RatFunc};
use crate::variety::{BroadnessReport, Model, Variety};
use crate::vars::{MonomialOrder, VarRegistry};

/// Substitution data of one reduction step.
#[derive(Debug, Clone)]
pub enum ReductionKind {
    /// Re-read a derivative-free variety in the jet model.
    JLift,
    /// Substitute a constant point for one block and drop the block.
    ConstantFiber {
        /// 1-based source block that was substituted away.
        block: usize,
        /// The point (z, j, jp, jpp) as base field elements.
        point: Vec<RatFunc<QField>>,
    },
    /// Eliminate the first block of the pair through the modular relation
    /// of the given level and a Möbius map with fresh constant parameters.
    MobiusModular {
        /// 1-based source blocks (i, k); block i is eliminated.
        pair: (usize, usize),
        level: u32,
        /// Names of the fresh constants, in the order a, b, c, d.
        constants: [String; 4],
    },
}

impl ReductionKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ReductionKind::JLift => "j-lift",
            ReductionKind::ConstantFiber { .. } => "constant-fiber",
            ReductionKind::MobiusModular { .. } => "mobius-modular",
        }
    }
}

/// Record of a reduction: the source and target varieties, the auxiliary
/// relation variety for the Möbius step, and the substitution data needed
/// to lift a target witness back to the source.
#[derive(Debug, Clone)]
pub struct ReductionCertificate {
    kind: ReductionKind,
    source: Variety,
    target: Variety,
    aux: Option<Variety>,
}

impl ReductionCertificate {
    /// Validates internal consistency: models, block counts, base
    /// compatibility, and the kind-specific substitution data.
    pub fn new(
        kind: ReductionKind,
        source: Variety,
        target: Variety,
        aux: Option<Variety>,
    ) -> Result<Self> {
        let fail = |msg: &str| Err(Error::InvalidCertificate(msg.into()));
        match &kind {
            ReductionKind::JLift => {
                if source.model() != Model::SmallJ || target.model() != Model::J {
                    return fail("a j-lift goes from the derivative-free model to the jet model");
                }
                if source.block_count() != target.block_count() {
                    return fail("a j-lift keeps the number of blocks");
                }
                if source.base() != target.base() {
                    return fail("a j-lift keeps the base field");
                }
                if aux.is_some() {
                    return fail("a j-lift carries no auxiliary variety");
                }
            }
            ReductionKind::ConstantFiber { block, point } => {
                if source.model() != Model::J || target.model() != Model::J {
                    return fail("a constant fiber stays in the jet model");
                }
                if source.block_count() < 2
                    || target.block_count() + 1 != source.block_count()
                {
                    return fail("a constant fiber drops exactly one block");
                }
                if *block == 0 || *block > source.block_count() {
                    return fail("the fibered block is out of range");
                }
                if point.len() != Model::J.block_arity() {
                    return fail("the fiber point needs one value per block coordinate");
                }
                if source.base() != target.base() {
                    return fail("a constant fiber keeps the base field");
                }
                if aux.is_some() {
                    return fail("a constant fiber carries no auxiliary variety");
                }
            }
            ReductionKind::MobiusModular { pair, level, constants } => {
                if source.model() != Model::J || target.model() != Model::J {
                    return fail("a Möbius reduction stays in the jet model");
                }
                let n = source.block_count();
                let (i, k) = *pair;
                if i == 0 || k == 0 || i > n || k > n || i == k {
                    return fail("the Möbius pair must name two distinct blocks");
                }
                if target.block_count() + 1 != n {
                    return fail("a Möbius reduction drops exactly one block");
                }
                if *level == 0 {
                    return fail("the modular level must be positive");
                }
                let aux = match aux.as_ref() {
                    Some(s) => s,
                    None => return fail("a Möbius reduction carries its relation variety"),
                };
                if aux.model() != Model::J || aux.block_count() != n {
                    return fail("the relation variety lives in the source jet space");
                }
                if aux.base() != target.base() {
                    return fail("the relation and target varieties share a base");
                }
                for name in constants {
                    if source.base().param_index(name).is_some() {
                        return fail("the Möbius constants must be fresh over the source base");
                    }
                    if !target.base().const_params().iter().any(|c| c == name) {
                        return fail("the Möbius constants must be declared on the target base");
                    }
                }
            }
        }
        Ok(ReductionCertificate { kind, source, target, aux })
    }

    pub fn kind(&self) -> &ReductionKind {
        &self.kind
    }

    pub fn source(&self) -> &Variety {
        &self.source
    }

    pub fn target(&self) -> &Variety {
        &self.target
    }

    pub fn aux(&self) -> Option<&Variety> {
        self.aux.as_ref()
    }
}

/// A reduction step's result: the certificate plus the broadness evidence
/// computed along the way.
#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub certificate: ReductionCertificate,
    /// Broadness of the target variety.
    pub target_broadness: BroadnessReport,
    /// Broadness of the source, for the steps that check it.
    pub source_broadness: Option<BroadnessReport>,
}

/// Rewrites a polynomial into another registry along an index map from old
/// variables to new ones. Every variable in the support must be mapped.
fn remap_poly(
    p: &MPoly<FracField>,
    reg: &Arc<VarRegistry>,
    map: &[Option<usize>],
) -> MPoly<FracField> {
    let terms = p
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut mm = vec![0u32; reg.len()];
            for (old, e) in m.iter().enumerate() {
                if *e > 0 {
                    let new = map[old].expect("remapped polynomial mentions a dropped variable");
                    mm[new] += *e;
                }
            }
            (mm, c.clone())
        })
        .collect();
    MPoly::from_terms(p.field().clone(), reg.clone(), p.order().clone(), terms)
}

/// Index map that drops one jet block and renumbers the later ones.
fn drop_block_map(n: usize, block: usize) -> Vec<Option<usize>> {
    let a = Model::J.block_arity();
    (0..n * a)
        .map(|old| {
            let b = old / a + 1;
            match b.cmp(&block) {
                std::cmp::Ordering::Less => Some(old),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(old - a),
            }
        })
        .collect()
}

/// Re-reads a derivative-free variety in the jet model on the same
/// generators, leaving the derivative coordinates unconstrained, and checks
/// broadness on both sides: projections gain two free coordinates per
/// block, so broadness of the source gives jet-model broadness of the lift.
#[allow(non_snake_case)]
pub fn lift_j_to_J(v: &Variety) -> Result<ReductionOutcome> {
    if v.model() != Model::SmallJ {
        return Err(Error::InvalidVariety(
            "only derivative-free varieties lift to the jet model".into(),
        ));
    }
    let n = v.block_count();
    let target_reg = Model::J.registry(n);
    let map: Vec<Option<usize>> = (0..v.registry().len())
        .map(|old| Some(4 * (old / 2) + old % 2))
        .collect();
    let gens = v
        .generators()
        .iter()
        .map(|g| remap_poly(g, &target_reg, &map))
        .collect();
    let target = Variety::new(Model::J, n, v.base().clone(), v.assume_prime(), gens)?;
    let source_broadness = v.check_broadness()?;
    let target_broadness = target.check_broadness()?;
    let certificate =
        ReductionCertificate::new(ReductionKind::JLift, v.clone(), target, None)?;
    Ok(ReductionOutcome {
        certificate,
        target_broadness,
        source_broadness: Some(source_broadness),
    })
}

/// Substitutes a constant point for one block and drops the block. The
/// block must have a coordinate that is constant on the variety, verified
/// by elimination; the point must be a nondegenerate jet (nonzero first
/// derivative, away from the singular fibers of the equation). Broadness
/// of the fiber is checked and reported.
pub fn fiber_constant_coordinate(
    v: &Variety,
    block: usize,
    point: &[RatFunc<QField>],
) -> Result<ReductionOutcome> {
    if v.model() != Model::J {
        return Err(Error::InvalidVariety(
            "fibering is a jet-model construction".into(),
        ));
    }
    let n = v.block_count();
    if n < 2 {
        return Err(Error::InvalidVariety(
            "fibering needs a block to keep".into(),
        ));
    }
    if block == 0 || block > n {
        return Err(Error::InvalidVariety("the fibered block is out of range".into()));
    }
    if point.len() != Model::J.block_arity() {
        return Err(Error::InvalidVariety(
            "the fiber point needs one value per block coordinate".into(),
        ));
    }
    let mut constant = false;
    for c in v.block_indices(block) {
        let keep: BTreeSet<usize> = [c].into();
        if !v.basis().eliminate(&keep)?.is_zero_ideal() {
            constant = true;
            break;
        }
    }
    if !constant {
        return Err(Error::NoConstantCoordinate(block));
    }
    let bf = v.base().field();
    if bf.is_zero(&point[2]) {
        return Err(Error::SingularLocus(
            "the fiber point needs a nonzero first derivative".into(),
        ));
    }
    ode_eta(bf, &point[1], &point[2], &point[3]).map_err(|_| {
        Error::SingularLocus("the fiber point sits at a singular point of the equation".into())
    })?;
    let idx = v.block_indices(block);
    let substituted: Vec<MPoly<FracField>> = v
        .generators()
        .iter()
        .map(|g| {
            let mut s = g.clone();
            for (o, c) in idx.iter().enumerate() {
                let value = MPoly::constant(
                    bf.clone(),
                    v.registry().clone(),
                    MonomialOrder::GrevLex,
                    point[o].clone(),
                );
                s = s.substitute(*c, &value);
            }
            s
        })
        .collect();
    let m = n - 1;
    let target_reg = Model::J.registry(m);
    let map = drop_block_map(n, block);
    let gens = substituted
        .iter()
        .map(|g| remap_poly(g, &target_reg, &map))
        .collect();
    let target = Variety::new(Model::J, m, v.base().clone(), v.assume_prime(), gens)
        .map_err(|e| match e {
            Error::UnitIdeal(_) => Error::FiberEmpty,
            other => other,
        })?;
    let target_broadness = target.check_broadness()?;
    let certificate = ReductionCertificate::new(
        ReductionKind::ConstantFiber { block, point: point.to_vec() },
        v.clone(),
        target,
        None,
    )?;
    Ok(ReductionOutcome {
        certificate,
        target_broadness,
        source_broadness: None,
    })
}

/// Fresh parameter names for the Möbius constants over the given base.
fn fresh_mobius_names(v: &Variety) -> [String; 4] {
    let taken = |name: &str| v.base().param_index(name).is_some();
    let plain = ["a", "b", "c", "d"];
    if !plain.iter().any(|n| taken(n)) {
        return plain.map(String::from);
    }
    let mut suffix = 1usize;
    loop {
        let cand = plain.map(|n| format!("{n}{suffix}"));
        if !cand.iter().any(|n| taken(n)) {
            return cand;
        }
        suffix += 1;
    }
}

/// Evaluates a two-variable rational-coefficient polynomial at coordinate
/// polynomials.
fn eval_xy(
    q: &QPoly,
    x: &MPoly<FracField>,
    y: &MPoly<FracField>,
) -> MPoly<FracField> {
    let f = x.field().clone();
    let mut acc = MPoly::zero(f.clone(), x.registry().clone(), x.order().clone());
    for (m, c) in q.terms() {
        let term = x.pow(m[0]).mul(&y.pow(m[1])).scale(&f.from_rat(c));
        acc = acc.add(&term);
    }
    acc
}

/// The four generators of the Möbius relation variety for blocks (i, k) at
/// the given level, over a base that already carries the constants.
fn mobius_relations(
    reg: &Arc<VarRegistry>,
    field: &FracField,
    names: &[String; 4],
    pair: (usize, usize),
    phi: &crate::modular::ModularPolynomial,
) -> Vec<MPoly<FracField>> {
    let ord = MonomialOrder::GrevLex;
    let var = |i: usize| MPoly::var(field.clone(), reg.clone(), ord.clone(), i);
    let cpar = |name: &str| {
        let idx = field.registry().index_of(name).expect("constant is a base parameter");
        MPoly::constant(field.clone(), reg.clone(), ord.clone(), field.var(idx))
    };
    let a = Model::J.block_arity();
    let (i, k) = pair;
    let zi = var(a * (i - 1));
    let ji = var(a * (i - 1) + 1);
    let jpi = var(a * (i - 1) + 2);
    let jppi = var(a * (i - 1) + 3);
    let zk = var(a * (k - 1));
    let jk = var(a * (k - 1) + 1);
    let jpk = var(a * (k - 1) + 2);
    let jppk = var(a * (k - 1) + 3);
    let (ca, cb, cc, cd) = (cpar(&names[0]), cpar(&names[1]), cpar(&names[2]), cpar(&names[3]));
    let u = cc.mul(&zi).add(&cd);
    let det = ca.mul(&cd).sub(&cb.mul(&cc));
    let two = field.from_rat(&crate::rational::rat_int(2));
    let phix = eval_xy(&phi.partial_x(), &ji, &jk);
    let phiy = eval_xy(&phi.partial_y(), &ji, &jk);
    let phixx = eval_xy(&phi.partial_x().partial(0), &ji, &jk);
    let phixy = eval_xy(&phi.partial_x().partial(1), &ji, &jk);
    let phiyy = eval_xy(&phi.partial_y().partial(1), &ji, &jk);
    let g1 = phi.eval_poly(&ji, &jk);
    let g2 = ca.mul(&zi).add(&cb).sub(&zk.mul(&u));
    let g3 = phix.mul(&jpi).mul(&u.pow(2)).add(&phiy.mul(&jpk).mul(&det));
    let g4 = phixx
        .mul(&jpi.pow(2))
        .mul(&u.pow(4))
        .add(&phixy.mul(&jpi).mul(&jpk).mul(&det).mul(&u.pow(2)).scale(&two))
        .add(&phiyy.mul(&jpk.pow(2)).mul(&det.pow(2)))
        .add(&phix.mul(&jppi.mul(&u.pow(4)).add(&jpi.mul(&u.pow(3)).mul(&cc).scale(&two))))
        .add(&phiy.mul(&jppk).mul(&det.pow(2)));
    vec![g1, g2, g3, g4]
}

/// Couples blocks i and k through the modular relation of the given level
/// and a Möbius map with fresh constants, then eliminates block i. The
/// modular relation must already hold on the variety. Broadness of the
/// eliminated variety is checked and reported.
pub fn mobius_modular_reduction(
    v: &Variety,
    pair: (usize, usize),
    level: u32,
    provider: &mut ModularProvider,
) -> Result<ReductionOutcome> {
    if v.model() != Model::J {
        return Err(Error::InvalidVariety(
            "the Möbius reduction is a jet-model construction".into(),
        ));
    }
    let n = v.block_count();
    let (i, k) = pair;
    if i == 0 || k == 0 || i > n || k > n || i == k {
        return Err(Error::InvalidVariety(
            "the Möbius pair must name two distinct blocks".into(),
        ));
    }
    let phi = provider.get(level)?;
    let ji = v.coordinate(v.coord_index(i, 1));
    let jk = v.coordinate(v.coord_index(k, 1));
    if !v.basis().contains(&phi.eval_poly(&ji, &jk)) {
        return Err(Error::ModularRelationAbsent { i, k, level });
    }
    let names = fresh_mobius_names(v);
    let base = v.base().extend_constants(&names);
    let s_gens = mobius_relations(v.registry(), base.field(), &names, pair, phi);
    let s = Variety::new(Model::J, n, base.clone(), true, s_gens)?;
    let mut all: Vec<MPoly<FracField>> = s.generators().to_vec();
    for g in v.generators() {
        all.push(extend_coeffs(g, base.field()));
    }
    let gb = buchberger(&all, MonomialOrder::GrevLex)?;
    let keep: BTreeSet<usize> = (0..v.registry().len())
        .filter(|c| c / Model::J.block_arity() + 1 != i)
        .collect();
    let eb = gb.eliminate(&keep)?;
    let m = n - 1;
    let target_reg = Model::J.registry(m);
    let map = drop_block_map(n, i);
    let gens = eb
        .generators()
        .iter()
        .map(|g| remap_poly(g, &target_reg, &map))
        .collect();
    let target = Variety::new(Model::J, m, base, v.assume_prime(), gens)?;
    let target_broadness = target.check_broadness()?;
    let certificate = ReductionCertificate::new(
        ReductionKind::MobiusModular { pair, level, constants: names },
        v.clone(),
        target,
        Some(s),
    )?;
    Ok(ReductionOutcome {
        certificate,
        target_broadness,
        source_broadness: None,
    })
}

/// A lifted witness together with its verification report against the
/// reduction source.
#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub witness: DerivationWitness,
    pub report: WitnessReport,
}

/// Lifts a verified witness of the reduction target back to the source.
/// The lifted witness lives in the coordinate field of the source sliced
/// along the reduction data (constant block substituted, or Möbius
/// relations adjoined over the extended constants); it is verified against
/// the source before being returned.
pub fn lift_point(w: &DerivationWitness, cert: &ReductionCertificate) -> Result<LiftOutcome> {
    match cert.kind() {
        ReductionKind::JLift => Err(Error::InvalidWitness(
            "witnesses live in the jet model; the j-lift step does not transform them".into(),
        )),
        ReductionKind::ConstantFiber { block, point } => {
            lift_constant_fiber(w, cert, *block, point)
        }
        ReductionKind::MobiusModular { pair, level, constants } => {
            lift_mobius(w, cert, *pair, *level, constants)
        }
    }
}

/// Checks that a witness is presented over the coordinate field of the
/// expected variety.
fn expect_target_field(w: &DerivationWitness, target: &Variety) -> Result<()> {
    let expected = coordinate_field(target)?;
    if w.field() != &expected {
        return Err(Error::InvalidWitness(
            "the witness is not over the reduction target".into(),
        ));
    }
    Ok(())
}

/// Moves a fraction written over the target registry into the lift field,
/// renumbering blocks along the inverse of the dropping map.
fn import_elem(
    value: &RatFunc<FracField>,
    fine: &CoordField,
    map: &[Option<usize>],
) -> Result<crate::coordfield::CoordElem> {
    let inverse: Vec<Option<usize>> = {
        let mut inv = vec![None; fine.registry().len()];
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                inv[*n] = Some(old);
            }
        }
        let target_len = map.iter().filter(|m| m.is_some()).count();
        inv.truncate(target_len);
        inv
    };
    let num = remap_poly(value.num(), fine.registry(), &inverse);
    let den = remap_poly(value.den(), fine.registry(), &inverse);
    fine.reduce(&RatFunc::new(num, den)?)
}

fn lift_constant_fiber(
    w: &DerivationWitness,
    cert: &ReductionCertificate,
    block: usize,
    point: &[RatFunc<QField>],
) -> Result<LiftOutcome> {
    let v = cert.source();
    expect_target_field(w, cert.target())?;
    let bf = v.base().field();
    let ord = MonomialOrder::GrevLex;
    let mut gens = v.generators().to_vec();
    for (o, c) in v.block_indices(block).iter().enumerate() {
        let coord = MPoly::var(bf.clone(), v.registry().clone(), ord.clone(), *c);
        let value =
            MPoly::constant(bf.clone(), v.registry().clone(), ord.clone(), point[o].clone());
        gens.push(coord.sub(&value));
    }
    let gb = buchberger(&gens, ord)?;
    if gb.is_unit_ideal() {
        return Err(Error::FiberEmpty);
    }
    let fine = CoordField::from_basis(bf.clone(), v.registry().clone(), gb);
    let map = drop_block_map(v.block_count(), block);
    let mut deltas = Vec::with_capacity(w.derivations());
    for kk in 0..w.derivations() {
        let mut row = vec![fine.zero(); v.registry().len()];
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                row[old] = import_elem(w.value(kk, *n), &fine, &map)?;
            }
        }
        deltas.push(row);
    }
    let lambdas = w
        .lambdas()
        .iter()
        .map(|l| import_elem(l, &fine, &map))
        .collect::<Result<Vec<_>>>()?;
    let mut witness = DerivationWitness::new(fine, deltas, lambdas, false, false);
    let report = verify_witness(v, &witness);
    witness.set_flags(report.all_nonconstant, report.verified);
    Ok(LiftOutcome { witness, report })
}

fn lift_mobius(
    w: &DerivationWitness,
    cert: &ReductionCertificate,
    pair: (usize, usize),
    level: u32,
    constants: &[String; 4],
) -> Result<LiftOutcome> {
    let v = cert.source();
    let s = cert.aux().expect("a validated Möbius certificate carries its relation variety");
    expect_target_field(w, cert.target())?;
    let base = s.base();
    let bf = base.field();
    let mut gens: Vec<MPoly<FracField>> = s.generators().to_vec();
    for g in v.generators() {
        gens.push(extend_coeffs(g, bf));
    }
    let gb = buchberger(&gens, MonomialOrder::GrevLex)?;
    if gb.is_unit_ideal() {
        return Err(Error::LiftSingular(
            "the reduction locus is empty over the extended constants".into(),
        ));
    }
    let fine = CoordField::from_basis(bf.clone(), v.registry().clone(), gb);
    let (i, _) = pair;
    let arity = Model::J.block_arity();
    let cpar = |name: &str| {
        let idx = bf.registry().index_of(name).expect("constant is a base parameter");
        fine.from_base(&bf.var(idx))
    };
    let (ca, cb, cc, cd) = (
        cpar(&constants[0]),
        cpar(&constants[1]),
        cpar(&constants[2]),
        cpar(&constants[3]),
    );
    let zi = fine.coordinate(arity * (i - 1));
    let jii = fine.coordinate(arity * (i - 1) + 1);
    let jpi = fine.coordinate(arity * (i - 1) + 2);
    let jppi = fine.coordinate(arity * (i - 1) + 3);
    let u = fine.add(&fine.mul(&cc, &zi), &cd);
    if fine.is_zero(&u) {
        return Err(Error::LiftSingular(
            "the Möbius denominator vanishes on the lift locus".into(),
        ));
    }
    let jkk = fine.coordinate(arity * (pair.1 - 1) + 1);
    let phix = {
        let mut provider = ModularProvider::new(0);
        eval_in_field(
            &provider.get(level)?.partial_x(),
            &[jii.clone(), jkk],
            &fine,
        )
    };
    if fine.is_zero(&phix) {
        return Err(Error::LiftSingular(
            "the modular relation is singular at the lifted point".into(),
        ));
    }
    let det = fine.sub(&fine.mul(&ca, &cd), &fine.mul(&cb, &cc));
    let eta = ode_eta(&fine, &jii, &jpi, &jppi).map_err(|_| {
        Error::LiftSingular(format!(
            "block {i} of the lifted point sits at a singular point of the equation"
        ))
    })?;
    let map = drop_block_map(v.block_count(), i);
    let dzk_index = map[arity * (pair.1 - 1)].expect("the kept block survives the projection");
    let mut deltas = Vec::with_capacity(w.derivations());
    for kk in 0..w.derivations() {
        let mut row = vec![fine.zero(); v.registry().len()];
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                row[old] = import_elem(w.value(kk, *n), &fine, &map)?;
            }
        }
        let dzk = import_elem(w.value(kk, dzk_index), &fine, &map)?;
        let dzi = fine
            .div(&fine.mul(&fine.mul(&u, &u), &dzk), &det)
            .expect("the Möbius determinant is a nonzero constant");
        row[arity * (i - 1)] = dzi.clone();
        row[arity * (i - 1) + 1] = fine.mul(&jpi, &dzi);
        row[arity * (i - 1) + 2] = fine.mul(&jppi, &dzi);
        row[arity * (i - 1) + 3] = fine.mul(&eta, &dzi);
        deltas.push(row);
    }
    let lambdas = w
        .lambdas()
        .iter()
        .map(|l| import_elem(l, &fine, &map))
        .collect::<Result<Vec<_>>>()?;
    let mut witness = DerivationWitness::new(fine, deltas, lambdas, false, false);
    let report = verify_witness(v, &witness);
    witness.set_flags(report.all_nonconstant, report.verified);
    Ok(LiftOutcome { witness, report })
}
