//! Text interfaces: the expression grammar, base-field descriptors, and
//! the variety file format. Everything is UTF-8, line oriented, and exact;
//! `#` starts a comment anywhere on a line.
//!
//! Expression grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := ["-"] term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := atom ("^" nat)?
//! atom   := nat | ident | "(" expr ")"
//! ```
//!
//! `poly` lines must denote polynomials: denominators have to reduce to
//! constants. Witness values are unrestricted rational functions in the
//! same grammar. A `constants=` header line after `base=` introduces
//! transcendental constants of the base field by name; it is emitted only
//! when such constants are present.

use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::coordfield::{CoordElem, CoordField};
use crate::derivation::DerivationWitness;
use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::mpoly::MPoly;
use crate::ratfunc::{FracField, RatFunc};
use crate::rational::Rat;
use crate::reductions::{ReductionCertificate, ReductionKind};
use crate::variety::{BaseField, Model, Variety};
use crate::vars::{MonomialOrder, VarRegistry};

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

// ---------------------------------------------------------------------------
// Tokens

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn tokenize(line: usize, text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n: num_bigint::BigInt = digits.parse().expect("digit run parses");
            out.push(Spanned { tok: Tok::Num(Rat::from_integer(n)), col });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Ident(name), col });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(perr(line, col, format!("unexpected character '{c}'"))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expressions

/// Name resolution for expressions: coordinates from the variety registry,
/// parameters from the base field.
pub struct ExprScope {
    base: FracField,
    coords: Arc<VarRegistry>,
}

impl ExprScope {
    pub fn new(base: &BaseField, coords: &Arc<VarRegistry>) -> Self {
        ExprScope { base: base.field().clone(), coords: coords.clone() }
    }

    fn order(&self) -> MonomialOrder {
        MonomialOrder::GrevLex
    }

    fn constant(&self, r: &Rat) -> RatFunc<FracField> {
        RatFunc::from_poly(MPoly::constant(
            self.base.clone(),
            self.coords.clone(),
            self.order(),
            self.base.from_rat(r),
        ))
    }

    fn resolve(&self, name: &str) -> Option<RatFunc<FracField>> {
        if let Some(v) = self.coords.index_of(name) {
            return Some(RatFunc::from_poly(MPoly::var(
                self.base.clone(),
                self.coords.clone(),
                self.order(),
                v,
            )));
        }
        self.base.registry().index_of(name).map(|p| {
            RatFunc::from_poly(MPoly::constant(
                self.base.clone(),
                self.coords.clone(),
                self.order(),
                self.base.var(p),
            ))
        })
    }
}

struct Parser<'a> {
    line: usize,
    toks: Vec<Spanned>,
    pos: usize,
    scope: &'a ExprScope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|s| s.col).unwrap_or_else(|| {
            self.toks.last().map(|s| s.col + 1).unwrap_or(1)
        })
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let col = self.col();
        match self.bump() {
            Some(s) if s.tok == want => Ok(()),
            _ => Err(perr(self.line, col, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<RatFunc<FracField>> {
        let mut acc = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc<FracField>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc
                        .div(&rhs)
                        .map_err(|_| perr(self.line, col, "division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFunc<FracField>> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.bump();
        let col = self.col();
        let Some(Spanned { tok: Tok::Num(r), .. }) = self.bump() else {
            return Err(perr(self.line, col, "expected a natural-number exponent"));
        };
        let e = r
            .to_integer()
            .to_u32()
            .filter(|_| r.is_integer())
            .ok_or_else(|| perr(self.line, col, "exponent out of range"))?;
        Ok(RatFunc::new(base.num().pow(e), base.den().pow(e))
            .expect("powers of a nonzero denominator stay nonzero"))
    }

    fn atom(&mut self) -> Result<RatFunc<FracField>> {
        let col = self.col();
        match self.bump().map(|s| s.tok) {
            Some(Tok::Num(r)) => Ok(self.scope.constant(&r)),
            Some(Tok::Ident(name)) => self
                .scope
                .resolve(&name)
                .ok_or_else(|| perr(self.line, col, format!("unknown coordinate {name}"))),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            _ => Err(perr(self.line, col, "expected a number, name, or parenthesis")),
        }
    }
}

/// Parse one expression into a rational function over the scope.
pub fn parse_expression(
    line: usize,
    text: &str,
    scope: &ExprScope,
) -> Result<RatFunc<FracField>> {
    let toks = tokenize(line, text)?;
    if toks.is_empty() {
        return Err(perr(line, 1, "empty expression"));
    }
    let mut p = Parser { line, toks, pos: 0, scope };
    let value = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(perr(line, p.col(), "unexpected token after expression"));
    }
    Ok(value)
}

/// Parse an expression that must denote a polynomial in the coordinates.
pub fn parse_polynomial(
    line: usize,
    text: &str,
    scope: &ExprScope,
) -> Result<MPoly<FracField>> {
    let value = parse_expression(line, text, scope)?;
    if !value.is_polynomial() {
        return Err(perr(line, 1, "expression is not polynomial in the coordinates"));
    }
    let c = value.den().constant_term();
    let inv = value.den().field().inv(&c).expect("denominator is a nonzero constant");
    Ok(value.num().scale(&inv))
}

// ---------------------------------------------------------------------------
// Base descriptors

/// Parse `Q`, `Q(t)`, or `Q(t1..tm)` into differential parameter names.
pub fn parse_base_descriptor(line: usize, s: &str) -> Result<Vec<String>> {
    if s == "Q" {
        return Ok(Vec::new());
    }
    let inner = s
        .strip_prefix("Q(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| perr(line, 1, format!("malformed base descriptor '{s}'")))?;
    let valid = |name: &str| {
        let mut cs = name.chars();
        cs.next() == Some('t') && cs.all(|c| c.is_ascii_digit())
    };
    if let Some((first, last)) = inner.split_once("..") {
        let m: usize = last
            .strip_prefix('t')
            .and_then(|d| d.parse().ok())
            .filter(|&m| m >= 2 && first == "t1")
            .ok_or_else(|| perr(line, 1, format!("malformed parameter range '{inner}'")))?;
        return Ok((1..=m).map(|i| format!("t{i}")).collect());
    }
    if !valid(inner) || inner.is_empty() {
        return Err(perr(line, 1, format!("malformed base parameter '{inner}'")));
    }
    Ok(vec![inner.to_string()])
}

// ---------------------------------------------------------------------------
// Variety files

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(at) => &raw[..at],
        None => raw,
    }
}

fn header_value<'a>(line: usize, s: &'a str, key: &str) -> Result<&'a str> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| perr(line, 1, format!("expected {key}=<value>")))?;
    if k.trim() != key {
        return Err(perr(line, 1, format!("expected {key}=<value>, found '{}'", k.trim())));
    }
    Ok(v.trim())
}

fn parse_name_list(line: usize, v: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for part in v.split(',') {
        let name = part.trim();
        let mut cs = name.chars();
        let head_ok = cs.next().map(|c| c.is_ascii_alphabetic()).unwrap_or(false);
        if !head_ok || !cs.all(|c| c.is_ascii_alphanumeric()) {
            return Err(perr(line, 1, format!("malformed name '{name}'")));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

pub fn parse_variety(text: &str) -> Result<Variety> {
    let mut stage = 0;
    let mut model = Model::J;
    let mut n = 0usize;
    let mut diff: Vec<String> = Vec::new();
    let mut consts: Vec<String> = Vec::new();
    let mut assume = false;
    let mut polys: Vec<(usize, String)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let s = strip_comment(raw).trim();
        if s.is_empty() {
            continue;
        }
        match stage {
            0 => {
                if s != "variety" {
                    return Err(perr(line, 1, "expected 'variety' header"));
                }
                stage = 1;
            }
            1 => {
                let tag = header_value(line, s, "model")?;
                model = Model::from_tag(tag)
                    .ok_or_else(|| perr(line, 1, format!("unknown model '{tag}'")))?;
                stage = 2;
            }
            2 => {
                n = header_value(line, s, "n")?
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| perr(line, 1, "n must be a positive integer"))?;
                stage = 3;
            }
            3 => {
                diff = parse_base_descriptor(line, header_value(line, s, "base")?)?;
                stage = 4;
            }
            4 => {
                if s.starts_with("constants") {
                    consts = parse_name_list(line, header_value(line, s, "constants")?)?;
                    stage = 5;
                } else {
                    assume = parse_bool(line, header_value(line, s, "assume_prime")?)?;
                    stage = 6;
                }
            }
            5 => {
                assume = parse_bool(line, header_value(line, s, "assume_prime")?)?;
                stage = 6;
            }
            _ => {
                let body = s
                    .strip_prefix("poly")
                    .filter(|r| r.starts_with(char::is_whitespace))
                    .ok_or_else(|| perr(line, 1, "expected a 'poly <expr>' line"))?;
                polys.push((line, body.trim().to_string()));
            }
        }
    }
    if stage < 6 {
        return Err(perr(last_line + 1, 1, "file ends before the variety headers are complete"));
    }

    let base = BaseField::new(diff, consts);
    let reg = model.registry(n);
    let scope = ExprScope::new(&base, &reg);
    let mut gens = Vec::with_capacity(polys.len());
    for (line, body) in polys {
        gens.push(parse_polynomial(line, &body, &scope)?);
    }
    Variety::new(model, n, base, assume, gens)
}

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(perr(line, 1, format!("expected true or false, found '{v}'"))),
    }
}

pub fn serialize_variety(v: &Variety) -> String {
    let mut out = String::from("variety\n");
    out.push_str(&format!("model={}\n", v.model().tag()));
    out.push_str(&format!("n={}\n", v.block_count()));
    out.push_str(&format!("base={}\n", v.base().descriptor()));
    if !v.base().const_params().is_empty() {
        out.push_str(&format!("constants={}\n", v.base().const_params().join(",")));
    }
    out.push_str(&format!("assume_prime={}\n", v.assume_prime()));
    for g in v.generators() {
        out.push_str(&format!("poly {}\n", g.to_expr_string()));
    }
    out
}

/// Render a witness in the text format. The base must present the same
/// parameter field the witness values live over.
pub fn serialize_witness(base: &BaseField, w: &DerivationWitness) -> String {
    assert!(
        base.field() == w.field().base(),
        "witness values live over a different base"
    );
    let mut out = String::from("witness\n");
    out.push_str(&format!("base={}\n", base.descriptor()));
    if !base.const_params().is_empty() {
        out.push_str(&format!("constants={}\n", base.const_params().join(",")));
    }
    out.push_str(&format!("derivations={}\n", w.derivations()));
    let names = w.field().registry().names();
    for k in 0..w.derivations() {
        for (ci, name) in names.iter().enumerate() {
            out.push_str(&format!(
                "delta {} {} = {}\n",
                k + 1,
                name,
                w.value(k, ci).to_expr_string()
            ));
        }
    }
    for (l, lam) in w.lambdas().iter().enumerate() {
        out.push_str(&format!("lambda {} = {}\n", l + 1, lam.to_expr_string()));
    }
    out.push_str(&format!("flag all_nonconstant = {}\n", w.all_nonconstant()));
    out.push_str(&format!("flag verified = {}\n", w.verified()));
    out
}

fn split_assignment(line: usize, s: &str) -> Result<(&str, &str, usize)> {
    let at = s
        .find('=')
        .ok_or_else(|| perr(line, 1, "expected an '=' sign"))?;
    Ok((&s[..at], &s[at + 1..], at))
}

fn parse_index(line: usize, tok: &str, max: usize) -> Result<usize> {
    tok.parse()
        .ok()
        .filter(|&k| k >= 1 && k <= max)
        .ok_or_else(|| perr(line, 1, format!("index must lie in 1..={max}, found '{tok}'")))
}

fn reduce_expr(
    line: usize,
    rhs: &str,
    offset: usize,
    scope: &ExprScope,
    field: &CoordField,
) -> Result<CoordElem> {
    let raw = parse_expression(line, rhs, scope).map_err(|e| match e {
        Error::Parse { line, col, msg } if col > 0 => {
            Error::Parse { line, col: col + offset + 1, msg }
        }
        other => other,
    })?;
    field
        .reduce(&raw)
        .map_err(|_| perr(line, 0, "the denominator vanishes on the variety"))
}

/// Parse a witness file against a prepared function field: `field` fixes
/// the coordinates and the reduction, `base` the parameters. The headers
/// must match the base, and every coordinate of every derivation needs a
/// value; completeness failures surface as `InvalidWitness`.
pub fn parse_witness(
    text: &str,
    base: &BaseField,
    field: &CoordField,
) -> Result<DerivationWitness> {
    assert!(base.field() == field.base(), "field and base disagree");
    let scope = ExprScope::new(base, field.registry());
    let m = base.derivation_count();
    let expected = m.max(1);
    let coords = field.registry().len();
    let mut stage = 0;
    let mut deltas: Vec<Vec<Option<CoordElem>>> = vec![vec![None; coords]; expected];
    let mut lambdas: Vec<Option<CoordElem>> = vec![None; m];
    let mut nonconstant_flag: Option<bool> = None;
    let mut verified_flag: Option<bool> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let s = strip_comment(raw).trim();
        if s.is_empty() {
            continue;
        }
        match stage {
            0 => {
                if s != "witness" {
                    return Err(perr(line, 1, "expected 'witness' header"));
                }
                stage = 1;
            }
            1 => {
                let diff = parse_base_descriptor(line, header_value(line, s, "base")?)?;
                if diff != base.diff_params() {
                    return Err(perr(line, 1, "the witness base does not match the expected base"));
                }
                stage = if base.const_params().is_empty() { 3 } else { 2 };
            }
            2 => {
                let consts = parse_name_list(line, header_value(line, s, "constants")?)?;
                if consts != base.const_params() {
                    return Err(perr(line, 1, "the witness constants do not match the expected base"));
                }
                stage = 3;
            }
            3 => {
                let d: usize = header_value(line, s, "derivations")?
                    .parse()
                    .ok()
                    .filter(|&d| d >= 1)
                    .ok_or_else(|| perr(line, 1, "derivations must be a positive integer"))?;
                if d != expected {
                    return Err(perr(line, 1, format!("derivations must be {expected} for this base")));
                }
                stage = 4;
            }
            _ => {
                let (lhs, rhs, eq_at) = split_assignment(line, s)?;
                let toks: Vec<&str> = lhs.split_whitespace().collect();
                match toks.first().copied() {
                    Some("delta") => {
                        if toks.len() != 3 {
                            return Err(perr(line, 1, "expected delta <k> <coordinate> = <expr>"));
                        }
                        let k = parse_index(line, toks[1], expected)?;
                        let ci = field.registry().index_of(toks[2]).ok_or_else(|| {
                            perr(line, 1, format!("unknown coordinate {}", toks[2]))
                        })?;
                        if deltas[k - 1][ci].is_some() {
                            return Err(perr(
                                line,
                                1,
                                format!("duplicate value for delta {k} {}", toks[2]),
                            ));
                        }
                        deltas[k - 1][ci] = Some(reduce_expr(line, rhs, eq_at, &scope, field)?);
                    }
                    Some("lambda") => {
                        if toks.len() != 2 {
                            return Err(perr(line, 1, "expected lambda <k> = <expr>"));
                        }
                        if m == 0 {
                            return Err(perr(line, 1, "the base field carries no derivations"));
                        }
                        let k = parse_index(line, toks[1], m)?;
                        if lambdas[k - 1].is_some() {
                            return Err(perr(line, 1, format!("duplicate value for lambda {k}")));
                        }
                        lambdas[k - 1] = Some(reduce_expr(line, rhs, eq_at, &scope, field)?);
                    }
                    Some("flag") => {
                        if toks.len() != 2 {
                            return Err(perr(line, 1, "expected flag <name> = <bool>"));
                        }
                        let val = parse_bool(line, rhs.trim())?;
                        let slot = match toks[1] {
                            "all_nonconstant" => &mut nonconstant_flag,
                            "verified" => &mut verified_flag,
                            other => {
                                return Err(perr(line, 1, format!("unknown flag '{other}'")))
                            }
                        };
                        if slot.is_some() {
                            return Err(perr(line, 1, format!("duplicate flag {}", toks[1])));
                        }
                        *slot = Some(val);
                    }
                    _ => return Err(perr(line, 1, "expected a delta, lambda, or flag line")),
                }
            }
        }
    }
    if stage < 4 {
        return Err(perr(last_line + 1, 1, "file ends before the witness headers are complete"));
    }

    let names = field.registry().names();
    let mut delta_vals = Vec::with_capacity(expected);
    for (k, row) in deltas.into_iter().enumerate() {
        let mut vals = Vec::with_capacity(coords);
        for (ci, v) in row.into_iter().enumerate() {
            vals.push(v.ok_or_else(|| {
                Error::InvalidWitness(format!("delta {} {} has no value", k + 1, names[ci]))
            })?);
        }
        delta_vals.push(vals);
    }
    let mut lambda_vals = Vec::with_capacity(m);
    for (l, v) in lambdas.into_iter().enumerate() {
        lambda_vals
            .push(v.ok_or_else(|| Error::InvalidWitness(format!("lambda {} has no value", l + 1)))?);
    }
    let all_nonconstant = nonconstant_flag
        .ok_or_else(|| Error::InvalidWitness("flag all_nonconstant is missing".into()))?;
    let verified = verified_flag
        .ok_or_else(|| Error::InvalidWitness("flag verified is missing".into()))?;
    Ok(DerivationWitness::new(
        field.clone(),
        delta_vals,
        lambda_vals,
        all_nonconstant,
        verified,
    ))
}

// ---------------------------------------------------------------------------
// Certificate files

/// Render a reduction certificate: kind and substitution headers, then the
/// involved varieties as named `begin`/`end` sections in their own format.
pub fn serialize_certificate(cert: &ReductionCertificate) -> String {
    let mut out = String::from("certificate\n");
    out.push_str(&format!("kind={}\n", cert.kind().tag()));
    match cert.kind() {
        ReductionKind::JLift => {}
        ReductionKind::ConstantFiber { block, point } => {
            out.push_str(&format!("block={block}\n"));
            let f = cert.source().base().field();
            for (name, val) in POINT_COORDS.iter().zip(point) {
                out.push_str(&format!("point {name} = {}\n", f.fmt_elem(val)));
            }
        }
        ReductionKind::MobiusModular { pair, level, constants } => {
            out.push_str(&format!("pair={},{}\n", pair.0, pair.1));
            out.push_str(&format!("level={level}\n"));
            out.push_str(&format!("mobius={}\n", constants.join(",")));
        }
    }
    for (name, v) in [("source", Some(cert.source())), ("target", Some(cert.target())), ("aux", cert.aux())]
    {
        if let Some(v) = v {
            out.push_str(&format!("begin {name}\n"));
            out.push_str(&serialize_variety(v));
            out.push_str(&format!("end {name}\n"));
        }
    }
    out
}

const POINT_COORDS: [&str; 4] = ["z", "j", "jp", "jpp"];

struct Section {
    name: String,
    start_line: usize,
    body: String,
}

/// Splits a certificate file into loose header lines and named sections.
/// Section bodies keep their raw lines so the inner parser sees them as
/// written; their line numbers are offset by `start_line` on errors.
fn split_sections(text: &str) -> Result<(Vec<(usize, String)>, Vec<Section>)> {
    let mut headers = Vec::new();
    let mut sections = Vec::new();
    let mut current: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = strip_comment(raw).trim();
        match current.as_mut() {
            Some(sec) => {
                if s == format!("end {}", sec.name) {
                    sections.push(current.take().expect("section in progress"));
                } else {
                    sec.body.push_str(raw);
                    sec.body.push('\n');
                }
            }
            None => {
                if s.is_empty() {
                    continue;
                }
                if let Some(rest) = s.strip_prefix("begin ") {
                    current = Some(Section {
                        name: rest.trim().to_string(),
                        start_line: line,
                        body: String::new(),
                    });
                } else {
                    headers.push((line, s.to_string()));
                }
            }
        }
    }
    if let Some(sec) = current {
        return Err(perr(sec.start_line, 1, format!("section '{}' is never closed", sec.name)));
    }
    Ok((headers, sections))
}

fn parse_variety_section(sec: &Section) -> Result<Variety> {
    parse_variety(&sec.body).map_err(|e| match e {
        Error::Parse { line, col, msg } => {
            Error::Parse { line: line + sec.start_line, col, msg }
        }
        other => other,
    })
}

/// Parse a certificate file. The embedded varieties are parsed with their
/// own format; the rebuilt certificate passes the usual validation, so a
/// file whose substitution data does not fit its varieties is rejected.
pub fn parse_certificate(text: &str) -> Result<ReductionCertificate> {
    let (headers, raw_sections) = split_sections(text)?;

    let mut source_sec = None;
    let mut target_sec = None;
    let mut aux_sec = None;
    for sec in raw_sections {
        let slot = match sec.name.as_str() {
            "source" => &mut source_sec,
            "target" => &mut target_sec,
            "aux" => &mut aux_sec,
            other => return Err(perr(sec.start_line, 1, format!("unknown section '{other}'"))),
        };
        if slot.is_some() {
            return Err(perr(sec.start_line, 1, format!("duplicate section '{}'", sec.name)));
        }
        *slot = Some(sec);
    }
    let last = text.lines().count() + 1;
    let source = parse_variety_section(
        source_sec.as_ref().ok_or_else(|| perr(last, 1, "missing 'source' section"))?,
    )?;
    let target = parse_variety_section(
        target_sec.as_ref().ok_or_else(|| perr(last, 1, "missing 'target' section"))?,
    )?;
    let aux = aux_sec.as_ref().map(parse_variety_section).transpose()?;

    let mut it = headers.into_iter();
    let (line, s) = it.next().ok_or_else(|| perr(1, 1, "expected 'certificate' header"))?;
    if s != "certificate" {
        return Err(perr(line, 1, "expected 'certificate' header"));
    }
    let (line, s) = it.next().ok_or_else(|| perr(line + 1, 1, "expected kind=<value>"))?;
    let tag = header_value(line, &s, "kind")?;
    let kind = match tag {
        "j-lift" => ReductionKind::JLift,
        "constant-fiber" => {
            let (bline, bs) =
                it.next().ok_or_else(|| perr(line + 1, 1, "expected block=<index>"))?;
            let block: usize = header_value(bline, &bs, "block")?
                .parse()
                .map_err(|_| perr(bline, 1, "block must be an integer"))?;
            let empty = VarRegistry::new(Vec::<String>::new());
            let scope = ExprScope::new(source.base(), &empty);
            let mut point = Vec::with_capacity(POINT_COORDS.len());
            let mut prev = bline;
            for name in POINT_COORDS {
                let (pline, ps) = it
                    .next()
                    .ok_or_else(|| perr(prev + 1, 1, format!("expected point {name} = <expr>")))?;
                prev = pline;
                let (lhs, rhs, eq_at) = split_assignment(pline, &ps)?;
                let toks: Vec<&str> = lhs.split_whitespace().collect();
                if toks != ["point", name] {
                    return Err(perr(pline, 1, format!("expected point {name} = <expr>")));
                }
                let expr = parse_expression(pline, rhs, &scope).map_err(|e| match e {
                    Error::Parse { line, col, msg } if col > 0 => {
                        Error::Parse { line, col: col + eq_at + 1, msg }
                    }
                    other => other,
                })?;
                let f = source.base().field();
                let value = f
                    .div(&expr.num().constant_term(), &expr.den().constant_term())
                    .map_err(|_| perr(pline, 1, "point value has a zero denominator"))?;
                point.push(value);
            }
            ReductionKind::ConstantFiber { block, point }
        }
        "mobius-modular" => {
            let (pline, ps) = it.next().ok_or_else(|| perr(line + 1, 1, "expected pair=<i>,<k>"))?;
            let pv = header_value(pline, &ps, "pair")?;
            let pair = pv
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| perr(pline, 1, format!("malformed pair '{pv}'")))?;
            let (lline, ls) =
                it.next().ok_or_else(|| perr(pline + 1, 1, "expected level=<N>"))?;
            let level: u32 = header_value(lline, &ls, "level")?
                .parse()
                .map_err(|_| perr(lline, 1, "level must be a positive integer"))?;
            let (mline, ms) =
                it.next().ok_or_else(|| perr(lline + 1, 1, "expected mobius=<a>,<b>,<c>,<d>"))?;
            let names = parse_name_list(mline, header_value(mline, &ms, "mobius")?)?;
            let constants: [String; 4] = names
                .try_into()
                .map_err(|_| perr(mline, 1, "the Möbius map takes four constants"))?;
            ReductionKind::MobiusModular { pair, level, constants }
        }
        other => return Err(perr(line, 1, format!("unknown certificate kind '{other}'"))),
    };
    if let Some((line, _)) = it.next() {
        return Err(perr(line, 1, "unexpected line after the certificate headers"));
    }
    ReductionCertificate::new(kind, source, target, aux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{coordinate_field, extend_derivation, extend_derivations_multi};
    use crate::rational::rat;

    fn scope_j1_t() -> (BaseField, ExprScope) {
        let base = BaseField::with_diff_params(vec!["t".into()]);
        let reg = Model::J.registry(1);
        let scope = ExprScope::new(&base, &reg);
        (base, scope)
    }

    #[test]
    fn expressions_evaluate_with_precedence() {
        let (_, scope) = scope_j1_t();
        let v = parse_expression(1, "z1 + 2*j1^2 - 1/2", &scope).unwrap();
        let z = parse_expression(1, "z1", &scope).unwrap();
        let j = parse_expression(1, "j1", &scope).unwrap();
        let (_, s2) = scope_j1_t();
        let half = s2.constant(&rat(1, 2));
        let two = s2.constant(&rat(2, 1));
        let expect = z.add(&two.mul(&j).mul(&j)).sub(&half);
        assert_eq!(v, expect);

        // 3/4*z1 means (3/4)*z1 by left association.
        let v = parse_expression(1, "3/4*z1", &scope).unwrap();
        assert_eq!(v, s2.constant(&rat(3, 4)).mul(&z));
    }

    #[test]
    fn unary_minus_and_parentheses() {
        let (_, scope) = scope_j1_t();
        let v = parse_expression(1, "-(z1 - j1)^2", &scope).unwrap();
        let z = parse_expression(1, "z1", &scope).unwrap();
        let j = parse_expression(1, "j1", &scope).unwrap();
        let d = z.sub(&j);
        assert_eq!(v, d.mul(&d).neg());
    }

    #[test]
    fn division_builds_rational_functions() {
        let (_, scope) = scope_j1_t();
        let v = parse_expression(1, "(jp1 + 1)/(j1 - 1728)", &scope).unwrap();
        assert!(!v.is_polynomial());
        let back = parse_expression(2, &v.to_expr_string(), &scope).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn parameters_resolve_as_coefficients() {
        let (_, scope) = scope_j1_t();
        let v = parse_polynomial(1, "t*z1 + 1", &scope).unwrap();
        assert_eq!(v.total_degree(), Some(1));
        assert!(v.degree_in(0) == 1);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let (_, scope) = scope_j1_t();
        let err = parse_expression(7, "z1 + w1", &scope).unwrap_err();
        assert_eq!(err, Error::Parse { line: 7, col: 6, msg: "unknown coordinate w1".into() });

        let err = parse_expression(3, "z1 + ", &scope).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));

        let err = parse_expression(1, "z1 $ j1", &scope).unwrap_err();
        assert!(matches!(err, Error::Parse { col: 4, .. }));

        let err = parse_expression(1, "1/(z1 - z1)", &scope).unwrap_err();
        assert_eq!(err, Error::Parse { line: 1, col: 2, msg: "division by zero".into() });

        let err = parse_polynomial(1, "1/z1", &scope).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn base_descriptors_round_trip() {
        assert_eq!(parse_base_descriptor(1, "Q").unwrap(), Vec::<String>::new());
        assert_eq!(parse_base_descriptor(1, "Q(t)").unwrap(), vec!["t"]);
        assert_eq!(
            parse_base_descriptor(1, "Q(t1..t3)").unwrap(),
            vec!["t1", "t2", "t3"]
        );
        assert!(parse_base_descriptor(1, "Q(x)").is_err());
        assert!(parse_base_descriptor(1, "Q(t1..t1)").is_err());
        assert!(parse_base_descriptor(1, "Q[t]").is_err());

        for names in [vec![], vec!["t".to_string()], vec!["t1".into(), "t2".into()]] {
            let b = BaseField::with_diff_params(names.clone());
            assert_eq!(parse_base_descriptor(1, &b.descriptor()).unwrap(), names);
        }
    }

    #[test]
    fn minimal_variety_file_parses() {
        let text = "variety\nmodel=J\nn=1\nbase=Q(t)\nassume_prime=true\npoly z1 + j1\n";
        let v = parse_variety(text).unwrap();
        assert_eq!(v.model(), Model::J);
        assert_eq!(v.block_count(), 1);
        assert_eq!(v.base().diff_params(), ["t"]);
        assert!(v.assume_prime());
        assert_eq!(v.generators().len(), 1);
        assert_eq!(v.generators()[0].to_expr_string(), "z1 + j1");
    }

    #[test]
    fn variety_files_round_trip_byte_exactly() {
        let text = "variety\nmodel=exp\nn=2\nbase=Q\nassume_prime=true\npoly x1 - x2\npoly y1 - y2\n";
        let v = parse_variety(text).unwrap();
        let ser = serialize_variety(&v);
        assert_eq!(ser, text);
        let v2 = parse_variety(&ser).unwrap();
        assert_eq!(serialize_variety(&v2), ser);

        // A non-canonical spelling normalizes to the same bytes.
        let flipped = parse_variety(
            "variety\nmodel=exp\nn=2\nbase=Q\nassume_prime=true\npoly x2 - x1\npoly y2 - y1\n",
        )
        .unwrap();
        assert_eq!(serialize_variety(&flipped), ser);
    }

    #[test]
    fn comments_and_blanks_are_ignored_and_constants_survive() {
        let text = "# fiber example\nvariety\nmodel=J\nn=1\n\nbase=Q # over the rationals\nconstants=a,b\nassume_prime=false\npoly z1 - a*j1\n";
        let v = parse_variety(text).unwrap();
        assert_eq!(v.base().const_params(), ["a", "b"]);
        assert!(!v.assume_prime());
        let ser = serialize_variety(&v);
        assert!(ser.contains("constants=a,b\n"));
        let v2 = parse_variety(&ser).unwrap();
        assert_eq!(serialize_variety(&v2), ser);
    }

    #[test]
    fn malformed_files_are_rejected_with_positions() {
        assert!(matches!(
            parse_variety("variety\nmodel=K\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_variety("variety\nmodel=J\nn=0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_variety("variety\nmodel=J\nn=1\nbase=Q\n"),
            Err(Error::Parse { line: 5, .. })
        ));
        assert!(matches!(
            parse_variety("variety\nmodel=J\nn=1\nbase=Q\nassume_prime=true\npoly w1 + j1\n"),
            Err(Error::Parse { line: 6, .. })
        ));
        assert!(matches!(
            parse_variety("variety\nmodel=J\nn=1\nbase=Q\nassume_prime=true\nquux\n"),
            Err(Error::Parse { line: 6, .. })
        ));
    }

    #[test]
    fn canonical_generators_serialize_canonically() {
        // Parsed generators are canonicalized, so scaling disappears.
        let text = "variety\nmodel=J\nn=1\nbase=Q\nassume_prime=true\npoly 2*z1 - 2*j1\n";
        let v = parse_variety(text).unwrap();
        assert_eq!(serialize_variety(&v).lines().last().unwrap(), "poly z1 - j1");
    }

    #[test]
    fn witness_round_trip_is_byte_identical() {
        let base = BaseField::with_diff_params(vec!["t".into()]);
        let v = Variety::new(Model::J, 1, base, true, Vec::new()).unwrap();
        let w = extend_derivation(&v).unwrap();
        let text = serialize_witness(v.base(), &w);
        assert!(text.starts_with("witness\nbase=Q(t)\nderivations=1\ndelta 1 z1 = 1\n"));
        assert!(text.contains("lambda 1 = 1\n"));
        assert!(text.ends_with("flag all_nonconstant = true\nflag verified = true\n"));
        let field = coordinate_field(&v).unwrap();
        let parsed = parse_witness(&text, v.base(), &field).unwrap();
        assert_eq!(parsed.derivations(), 1);
        for c in 0..4 {
            assert_eq!(parsed.value(0, c), w.value(0, c));
        }
        assert!(parsed.verified());
        assert!(parsed.all_nonconstant());
        assert_eq!(serialize_witness(v.base(), &parsed), text);
    }

    #[test]
    fn constant_base_witness_has_no_lambda_lines() {
        let v = Variety::new(Model::Exp, 1, BaseField::rationals(), true, Vec::new()).unwrap();
        let w = extend_derivation(&v).unwrap();
        let text = serialize_witness(v.base(), &w);
        assert!(!text.contains("lambda"));
        assert!(text.contains("base=Q\n"));
        let field = coordinate_field(&v).unwrap();
        let parsed = parse_witness(&text, v.base(), &field).unwrap();
        assert_eq!(serialize_witness(v.base(), &parsed), text);
    }

    #[test]
    fn multi_witness_round_trip() {
        let base = BaseField::with_diff_params(vec!["t1".into(), "t2".into()]);
        let v = Variety::new(Model::Exp, 1, base, true, Vec::new()).unwrap();
        let out = extend_derivations_multi(&v).unwrap();
        let text = serialize_witness(v.base(), &out.witness);
        assert!(text.contains("derivations=2\n"));
        assert!(text.contains("delta 2 x1 = 0\n"));
        assert!(text.contains("lambda 2 = 1\n"));
        let field = coordinate_field(&v).unwrap();
        let parsed = parse_witness(&text, v.base(), &field).unwrap();
        assert_eq!(serialize_witness(v.base(), &parsed), text);
    }

    #[test]
    fn witness_parse_rejections() {
        let base = BaseField::with_diff_params(vec!["t".into()]);
        let v = Variety::new(Model::Exp, 1, base, true, Vec::new()).unwrap();
        let field = coordinate_field(&v).unwrap();
        let head = "witness\nbase=Q(t)\nderivations=1\n";
        let cases: Vec<(String, usize)> = vec![
            (format!("{head}delta 1 w1 = 1\n"), 4),
            (format!("{head}delta 2 x1 = 1\n"), 4),
            (format!("{head}delta 1 x1 = 1\ndelta 1 x1 = 2\n"), 5),
            (format!("{head}flag shiny = true\n"), 4),
            (format!("{head}lambda 1 = 1\nlambda 1 = 1\n"), 5),
            ("witness\nbase=Q\nderivations=1\n".to_string(), 2),
            ("witness\nbase=Q(t)\nderivations=2\n".to_string(), 3),
        ];
        for (text, line) in cases {
            match parse_witness(&text, v.base(), &field) {
                Err(Error::Parse { line: at, .. }) => assert_eq!(at, line, "{text}"),
                other => panic!("expected a parse error for {text}, got {other:?}"),
            }
        }
        let incomplete = format!("{head}delta 1 x1 = 1\nflag all_nonconstant = true\nflag verified = true\n");
        match parse_witness(&incomplete, v.base(), &field) {
            Err(Error::InvalidWitness(msg)) => assert!(msg.contains("delta 1 y1")),
            other => panic!("expected InvalidWitness, got {other:?}"),
        }
        let no_lambda = format!(
            "{head}delta 1 x1 = 1\ndelta 1 y1 = y1\nflag all_nonconstant = true\nflag verified = true\n"
        );
        match parse_witness(&no_lambda, v.base(), &field) {
            Err(Error::InvalidWitness(msg)) => assert!(msg.contains("lambda 1")),
            other => panic!("expected InvalidWitness, got {other:?}"),
        }
    }

    #[test]
    fn certificates_round_trip_through_text() {
        use crate::modular::ModularProvider;
        use crate::rational::rat_int;
        use crate::reductions::{
            fiber_constant_coordinate, lift_j_to_J, mobius_modular_reduction,
        };

        let v = parse_variety(
            "variety\nmodel=j\nn=1\nbase=Q(t)\nassume_prime=true\npoly z1 - j1\n",
        )
        .unwrap();
        let lift = lift_j_to_J(&v).unwrap();
        let text = serialize_certificate(&lift.certificate);
        assert!(text.starts_with("certificate\nkind=j-lift\nbegin source\n"));
        let back = parse_certificate(&text).unwrap();
        assert_eq!(serialize_certificate(&back), text);

        let v = parse_variety(
            "variety\nmodel=J\nn=2\nbase=Q(t)\nassume_prime=true\npoly z1 - 5\n",
        )
        .unwrap();
        let p: Vec<_> = [5, 2, 1, 1]
            .iter()
            .map(|&n| v.base().field().from_rat(&rat_int(n)))
            .collect();
        let fiber = fiber_constant_coordinate(&v, 1, &p).unwrap();
        let text = serialize_certificate(&fiber.certificate);
        assert!(text.contains("kind=constant-fiber\nblock=1\npoint z = 5\npoint j = 2\n"));
        let back = parse_certificate(&text).unwrap();
        assert_eq!(serialize_certificate(&back), text);

        let v = parse_variety(
            "variety\nmodel=J\nn=2\nbase=Q(t)\nassume_prime=true\npoly j1 - j2\n",
        )
        .unwrap();
        let mut provider = ModularProvider::new(8);
        let red = mobius_modular_reduction(&v, (1, 2), 1, &mut provider).unwrap();
        let text = serialize_certificate(&red.certificate);
        assert!(text.contains("kind=mobius-modular\npair=1,2\nlevel=1\nmobius=a,b,c,d\n"));
        assert!(text.contains("begin aux\n"));
        let back = parse_certificate(&text).unwrap();
        assert_eq!(serialize_certificate(&back), text);
    }

    #[test]
    fn certificate_files_validate_their_content() {
        use crate::rational::rat_int;
        use crate::reductions::fiber_constant_coordinate;

        let v = parse_variety(
            "variety\nmodel=J\nn=2\nbase=Q(t)\nassume_prime=true\npoly z1 - 5\n",
        )
        .unwrap();
        let p: Vec<_> = [5, 2, 1, 1]
            .iter()
            .map(|&n| v.base().field().from_rat(&rat_int(n)))
            .collect();
        let good = serialize_certificate(
            &fiber_constant_coordinate(&v, 1, &p).unwrap().certificate,
        );

        let bad = good.replace("block=1", "block=3");
        assert!(matches!(parse_certificate(&bad), Err(Error::InvalidCertificate(_))));

        let cut = &good[..good.find("end target").unwrap()];
        assert!(matches!(parse_certificate(cut), Err(Error::Parse { .. })));

        let noise = good.replace("certificate\n", "certificate\nextra=1\n");
        assert!(matches!(parse_certificate(&noise), Err(Error::Parse { line: 2, .. })));
    }
}
