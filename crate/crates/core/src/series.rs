//! Truncated Laurent series with exact rational coefficients.
//!
//! Exponents live on a grid with denominator `d` in {1, 2}: a stored
//! exponent `k` stands for q^(k/d). The half grid carries level-2
//! expansions in q^(1/2) without adjoining roots; after symmetrization
//! only rational coefficients occur.
//!
//! Truncation is tracked, not assumed: a series knows its coefficients for
//! all grid exponents strictly below `trunc`, and every operation computes
//! the truncation its result is actually valid to (min for addition,
//! `min(Ta + lo_b, Tb + lo_a)` for products, `T - 2*lo` for inversion).

use crate::error::{Error, Result};
use crate::rational::{rat, rat_int, Rat};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    grid: u8,
    /// Scaled exponent of coeffs[0]; equals `trunc` for the zero series.
    lo: i64,
    coeffs: Vec<Rat>,
    /// Coefficients are known for scaled exponents strictly below this.
    trunc: i64,
}

impl LaurentSeries {
    pub fn new(grid: u8, lo: i64, coeffs: Vec<Rat>, trunc: i64) -> Self {
        assert!(grid == 1 || grid == 2, "grid denominator must be 1 or 2");
        let mut s = LaurentSeries { grid, lo, coeffs, trunc };
        s.normalize();
        s
    }

    pub fn zero(grid: u8, trunc: i64) -> Self {
        Self::new(grid, trunc, Vec::new(), trunc)
    }

    pub fn constant(grid: u8, c: Rat, trunc: i64) -> Self {
        Self::new(grid, 0, vec![c], trunc)
    }

    pub fn one(grid: u8, trunc: i64) -> Self {
        Self::constant(grid, rat_int(1), trunc)
    }

    /// The monomial c·q^(k/grid).
    pub fn monomial(grid: u8, c: Rat, k: i64, trunc: i64) -> Self {
        Self::new(grid, k, vec![c], trunc)
    }

    fn normalize(&mut self) {
        if self.lo >= self.trunc {
            self.coeffs.clear();
            self.lo = self.trunc;
            return;
        }
        let keep = (self.trunc - self.lo) as usize;
        self.coeffs.truncate(keep);
        let lead_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.lo += lead_zeros as i64;
        }
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.lo = self.trunc;
        }
    }

    pub fn grid(&self) -> u8 {
        self.grid
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Scaled exponent of the leading term; None for a zero series.
    pub fn lowest(&self) -> Option<i64> {
        if self.coeffs.is_empty() { None } else { Some(self.lo) }
    }

    /// First unknown scaled exponent if the series vanishes through truncation.
    fn effective_lo(&self) -> i64 {
        self.lowest().unwrap_or(self.trunc)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at scaled exponent k. Panics beyond truncation.
    pub fn coeff(&self, k: i64) -> Rat {
        assert!(k < self.trunc, "coefficient at exponent {} beyond truncation {}", k, self.trunc);
        if k < self.lo || k - self.lo >= self.coeffs.len() as i64 {
            Rat::zero()
        } else {
            self.coeffs[(k - self.lo) as usize].clone()
        }
    }

    /// Nonzero terms as (scaled exponent, coefficient), ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    /// Move the operand to the half grid (exponents double).
    pub fn promote(&self) -> Self {
        if self.grid == 2 {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * 2);
        for c in &self.coeffs {
            coeffs.push(c.clone());
            coeffs.push(Rat::zero());
        }
        Self::new(2, self.lo * 2, coeffs, self.trunc * 2)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        match (self.grid, other.grid) {
            (1, 2) => (self.promote(), other.clone()),
            (2, 1) => (self.clone(), other.promote()),
            _ => (self.clone(), other.clone()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let trunc = a.trunc.min(b.trunc);
        // Allocate over the union of supports, not up to the truncation:
        // exactly-known values carry an effectively unbounded truncation.
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (k, _) in a.terms().chain(b.terms()) {
            if k < trunc {
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
        if lo > hi {
            return Self::zero(a.grid, trunc);
        }
        let mut coeffs = vec![Rat::zero(); (hi - lo + 1) as usize];
        for (k, c) in a.terms() {
            if k < trunc {
                coeffs[(k - lo) as usize] += c;
            }
        }
        for (k, c) in b.terms() {
            if k < trunc {
                coeffs[(k - lo) as usize] += c;
            }
        }
        Self::new(a.grid, lo, coeffs, trunc)
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            grid: self.grid,
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.grid, self.trunc);
        }
        LaurentSeries {
            grid: self.grid,
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            trunc: self.trunc,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let trunc = (a.trunc + b.effective_lo()).min(b.trunc + a.effective_lo());
        if a.is_zero() || b.is_zero() {
            return Self::zero(a.grid, trunc);
        }
        let lo = a.lo + b.lo;
        let hi_a = a.lo + a.coeffs.len() as i64 - 1;
        let hi_b = b.lo + b.coeffs.len() as i64 - 1;
        let hi = (hi_a + hi_b).min(trunc - 1);
        if hi < lo {
            return Self::zero(a.grid, trunc);
        }
        let mut coeffs = vec![Rat::zero(); (hi - lo + 1) as usize];
        for (i, ca) in a.terms() {
            for (j, cb) in b.terms() {
                let k = i + j;
                if k <= hi {
                    coeffs[(k - lo) as usize] += ca * cb;
                }
            }
        }
        Self::new(a.grid, lo, coeffs, trunc)
    }

    /// Multiplicative inverse, valid through `trunc - 2*lowest`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::SeriesDivisionByZero);
        }
        let m = self.lo;
        let n = (self.trunc - m) as usize;
        // b solves (sum a_{m+t} x^t)(sum b_s x^s) = 1 coefficient by coefficient.
        let a = |t: usize| -> Rat {
            if t < self.coeffs.len() { self.coeffs[t].clone() } else { Rat::zero() }
        };
        let lead_inv = rat_int(1) / a(0);
        let mut b = Vec::with_capacity(n);
        b.push(lead_inv.clone());
        for s in 1..n {
            let mut acc = Rat::zero();
            for t in 1..=s {
                acc += a(t) * &b[s - t];
            }
            b.push(-acc * &lead_inv);
        }
        Ok(Self::new(self.grid, -m, b, self.trunc - 2 * m))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.grid, self.trunc);
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// The operator q·d/dq: coefficient at q^(k/d) scales by k/d.
    pub fn theta(&self) -> Self {
        let d = self.grid as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * rat(self.lo + i as i64, d))
            .collect();
        Self::new(self.grid, self.lo, coeffs, self.trunc)
    }

    /// Substitute q -> q^n for n >= 1 (grid preserved).
    pub fn substitute_power(&self, n: u32) -> Self {
        assert!(n >= 1);
        let n = n as i64;
        let mut coeffs = vec![Rat::zero(); ((self.coeffs.len() as i64 - 1) * n + 1).max(0) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * n as usize] = c.clone();
        }
        Self::new(self.grid, self.lo * n, coeffs, self.trunc * n)
    }

    /// Substitute q -> -q (integer grid only).
    pub fn negate_variable(&self) -> Self {
        assert_eq!(self.grid, 1, "sign substitution needs the integer grid");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.lo + i as i64;
                if k.rem_euclid(2) == 1 { -c } else { c.clone() }
            })
            .collect();
        Self::new(self.grid, self.lo, coeffs, self.trunc)
    }

    /// From f(q) on the integer grid, build f(q^(1/2)) or f(-q^(1/2)) on
    /// the half grid: stored exponents are reinterpreted as halves.
    pub fn half_exponents(&self, negate: bool) -> Self {
        assert_eq!(self.grid, 1, "operand already on the half grid");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.lo + i as i64;
                if negate && k.rem_euclid(2) == 1 { -c } else { c.clone() }
            })
            .collect();
        Self::new(2, self.lo, coeffs, self.trunc)
    }

    /// Inverse of `promote`: a half-grid series supported on even scaled
    /// exponents returns to the integer grid.
    pub fn demote(&self) -> Self {
        assert_eq!(self.grid, 2, "operand already on the integer grid");
        let trunc = self.trunc.div_euclid(2) + if self.trunc.rem_euclid(2) > 0 { 1 } else { 0 };
        let mut out = std::collections::BTreeMap::new();
        for (k, c) in self.terms() {
            assert!(k % 2 == 0, "support not on integer exponents");
            out.insert(k / 2, c.clone());
        }
        Self::from_support_map(1, out, trunc)
    }

    /// Zero out coefficients whose exponent is not a multiple of n.
    pub fn keep_multiples(&self, n: u32) -> Self {
        let n = n as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.lo + i as i64;
                if k.rem_euclid(n) == 0 { c.clone() } else { Rat::zero() }
            })
            .collect();
        Self::new(self.grid, self.lo, coeffs, self.trunc)
    }

    /// Substitute q^n -> q on a series supported on multiples of n.
    /// Truncation becomes ceil(trunc / n).
    pub fn compress(&self, n: u32) -> Self {
        let n = n as i64;
        let trunc = self.trunc.div_euclid(n) + if self.trunc.rem_euclid(n) > 0 { 1 } else { 0 };
        let mut out = std::collections::BTreeMap::new();
        for (k, c) in self.terms() {
            assert!(k.rem_euclid(n) == 0, "support not on multiples of {}", n);
            out.insert(k.div_euclid(n), c.clone());
        }
        Self::from_support_map(self.grid, out, trunc)
    }

    fn from_support_map(grid: u8, map: std::collections::BTreeMap<i64, Rat>, trunc: i64) -> Self {
        let kept: Vec<(i64, Rat)> = map.into_iter().filter(|(k, _)| *k < trunc).collect();
        let Some(&(lo, _)) = kept.first() else {
            return Self::zero(grid, trunc);
        };
        let hi = kept.last().unwrap().0;
        let mut coeffs = vec![Rat::zero(); (hi - lo + 1) as usize];
        for (k, c) in kept {
            coeffs[(k - lo) as usize] = c;
        }
        Self::new(grid, lo, coeffs, trunc)
    }

    /// Lower the truncation (discarding known coefficients).
    pub fn truncate_to(&self, trunc: i64) -> Self {
        assert!(trunc <= self.trunc, "cannot raise truncation");
        Self::new(self.grid, self.lo, self.coeffs.clone(), trunc)
    }
}

impl std::fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0 + O(q^{})", exp_str(self.trunc, self.grid));
        }
        let mut first = true;
        for (k, c) in self.terms() {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if k == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "q^{}", exp_str(k, self.grid))?;
            } else {
                write!(f, "{}*q^{}", mag, exp_str(k, self.grid))?;
            }
        }
        write!(f, " + O(q^{})", exp_str(self.trunc, self.grid))
    }
}

fn exp_str(k: i64, grid: u8) -> String {
    if grid == 1 || k % 2 == 0 {
        format!("{}", k / grid as i64)
    } else {
        format!("({}/2)", k)
    }
}
